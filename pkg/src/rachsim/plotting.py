"""Figure rendering for the report path: throughput curves, the Pareto
frontier, drift trajectories, and the protocol-comparison panels.  Figures
are written next to the delimited output so a report needs no extra
tooling."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.4,
}


def _save(fig, out_dir: Path, stem: str) -> Path:
    path = out_dir / f"{stem}.png"
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_throughput_curves(rows: list[dict], out_dir: Path) -> Path:
    """Expected throughput vs access probability, one curve per slot count."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ks = sorted({r["k"] for r in rows})
        for k in ks:
            sub = [r for r in rows if r["k"] == k]
            ax.plot([r["p"] for r in sub], [r["throughput"] for r in sub],
                    label=f"k={k} (l={1 << k})")
        ax.set_xlabel("access probability p")
        ax.set_ylabel("expected successes per round")
        ax.legend()
        return _save(fig, out_dir, "throughput_curves")


def plot_pareto(frontier_rows: list[dict], curve_rows: list[dict], out_dir: Path) -> Path:
    """Expected resources vs expected throughput with the frontier overlaid
    on the per-k achievable curves."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k in sorted({r["k"] for r in curve_rows}):
            sub = [r for r in curve_rows if r["k"] == k]
            ax.plot([r["throughput"] for r in sub], [r["resources"] for r in sub],
                    color="0.6", linewidth=0.8)
        ax.plot([r["throughput"] for r in frontier_rows],
                [r["resources"] for r in frontier_rows],
                color="C3", linewidth=1.8, label="Pareto frontier")
        ax.set_xlabel("expected successes per round")
        ax.set_ylabel("expected resource blocks per round")
        ax.legend()
        return _save(fig, out_dir, "pareto_frontier")


def plot_drift(rows: list[dict], out_dir: Path) -> Path:
    """Expected backlog trajectory of the drift recursion."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        labels = sorted({r["label"] for r in rows})
        for label in labels:
            sub = [r for r in rows if r["label"] == label]
            ax.plot([r["round"] for r in sub], [r["backlog"] for r in sub], label=label)
        ax.set_xlabel("contention round")
        ax.set_ylabel("expected backlog")
        if labels:
            ax.legend()
        return _save(fig, out_dir, "drift_trajectories")


def plot_summary_panels(rows: list[dict], out_dir: Path) -> list[Path]:
    """Per arrival shape: service time, total resources, and efficiency vs
    burst size, one line per protocol variant."""
    paths = []
    shapes = sorted({r["scenario"] for r in rows})
    metrics = [
        ("mean_service_time_ms", "mean service time [ms]"),
        ("total_resources_rb", "total resources [RB]"),
        ("efficiency", "resource efficiency"),
    ]
    with plt.rc_context(STYLE):
        for shape in shapes:
            fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6))
            sub = [r for r in rows if r["scenario"] == shape]
            variants = sorted({(r["protocol"], r["variant"]) for r in sub})
            for ax, (col, label) in zip(axes, metrics):
                for proto, variant in variants:
                    vr = sorted(
                        (r for r in sub if r["protocol"] == proto and r["variant"] == variant),
                        key=lambda r: r["N"],
                    )
                    name = f"{proto}-{variant}" if variant else proto
                    ax.plot([r["N"] for r in vr], [float(r[col]) for r in vr],
                            marker="o", markersize=3, label=name)
                ax.set_xlabel("burst size N")
                ax.set_ylabel(label)
            axes[0].legend()
            fig.suptitle(f"{shape} arrivals")
            paths.append(_save(fig, out_dir, f"summary_{shape}"))
    return paths
