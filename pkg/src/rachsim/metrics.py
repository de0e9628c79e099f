"""Aggregation of simulation replications into the three evaluation
metrics: mean service time, total consumed resources, and resource
efficiency (successes per consumed resource block, averaged per round)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .model import DomainError
from .sim import SimulationResult


@dataclass(frozen=True)
class MetricSummary:
    mean_service_time_ms: float
    total_resources: float
    efficiency: float
    ci_service: float
    ci_resources: float
    ci_efficiency: float
    replication_count: int
    rounds_to_resolution: float


def run_efficiency(result: SimulationResult, skip_idle_rounds: bool = False) -> float:
    """Per-round success-per-resource ratio averaged over the resolution
    period.  All-idle rounds contribute a zero term unless skipped."""
    if result.rounds == 0:
        return 0.0
    terms = []
    for row in result.trace:
        if row.occupied == 0 and skip_idle_rounds:
            continue
        terms.append(row.successes / row.resources if row.resources > 0 else 0.0)
    return float(np.mean(terms)) if terms else 0.0


def _ci_halfwidth(values: np.ndarray, confidence: float = 0.95) -> float:
    if values.size < 2:
        return math.nan
    sem = stats.sem(values)
    if sem == 0:
        return 0.0
    return float(sem * stats.t.ppf(0.5 + confidence / 2.0, values.size - 1))


def summarize(results: list[SimulationResult], skip_idle_rounds: bool = False) -> MetricSummary:
    """Aggregate replications; confidence halfwidths are Student-t at 95%
    and reported as NaN below two replications."""
    if not results:
        raise DomainError("summarize requires at least one result")
    service = np.array([float(np.mean(r.service_times_ms)) if r.n_ues else 0.0 for r in results])
    resources = np.array([r.total_resources for r in results])
    efficiency = np.array([run_efficiency(r, skip_idle_rounds) for r in results])
    rounds = np.array([r.rounds for r in results], dtype=float)
    return MetricSummary(
        mean_service_time_ms=float(service.mean()),
        total_resources=float(resources.mean()),
        efficiency=float(efficiency.mean()),
        ci_service=_ci_halfwidth(service),
        ci_resources=_ci_halfwidth(resources),
        ci_efficiency=_ci_halfwidth(efficiency),
        replication_count=len(results),
        rounds_to_resolution=float(rounds.mean()),
    )
