"""Closed-form round expectations and the drift predictor of burst
resolution time.

The central quantity is the expected per-round throughput

    S(n, p, k) = (n p / l) * sum_{h=1..l} (1 - (h/l)(p/M))^(n-1),   l = 2^k,

the expected number of preambles that end the round with a successfully
arbitrated contender.  Expected occupancy and resource consumption follow
from the same Bernoulli thinning argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import DomainError, OperatingPoint, SystemConfig


def _pow1m(x: np.ndarray | float, e: float) -> np.ndarray | float:
    # (1 - x)^e via exp(e * log1p(-x)); stable for tiny x and large e.
    return np.exp(e * np.log1p(-np.asarray(x, dtype=float)))


def expected_throughput(n: float, p: float, k: int, M: int) -> float:
    """Expected successful preambles in one round with backlog n.

    Accepts fractional n (backlog estimates are real-valued); returns 0 for
    an empty backlog.
    """
    if n < 0:
        raise DomainError(f"backlog must be >= 0, got {n}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"access probability must be in (0, 1], got {p}")
    if k < 0:
        raise DomainError(f"slot count must be >= 0, got {k}")
    if M < 1:
        raise DomainError(f"preamble count must be >= 1, got {M}")
    if n == 0:
        return 0.0
    l = 1 << k
    h = np.arange(1, l + 1, dtype=float)
    terms = _pow1m(h / l * (p / M), n - 1.0)
    return float(n * p / l * np.sum(terms))


def expected_occupied(n: float, p: float, M: int) -> float:
    """Expected occupied (successful or collided) preambles in one round."""
    if n < 0:
        raise DomainError(f"backlog must be >= 0, got {n}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"access probability must be in (0, 1], got {p}")
    if M < 1:
        raise DomainError(f"preamble count must be >= 1, got {M}")
    if n == 0:
        return 0.0
    return float(M - M * _pow1m(p / M, n))


def expected_resources(n: float, point: OperatingPoint, config: SystemConfig) -> float:
    """Expected uplink resource blocks consumed in one round."""
    occ = expected_occupied(n, point.p, config.preambles)
    return config.round_resources(point.k, occ)


@dataclass(frozen=True)
class FrontierPoint:
    throughput: float
    resources: float
    point: OperatingPoint


@dataclass(frozen=True)
class ParetoResult:
    """Non-dominated (throughput, resources) set plus the raw per-k curves."""

    frontier: list[FrontierPoint]
    curves: dict[int, list[FrontierPoint]]  # k -> achievable curve over the p grid


def pareto_frontier(n: float, config: SystemConfig, p_grid_resolution: int = 1000) -> ParetoResult:
    """Enumerate (S, R) over the (p, k) grid and keep non-dominated points.

    Higher throughput and lower resource consumption are both preferred.
    The frontier is sorted by resource consumption ascending.
    """
    if n < 1:
        raise DomainError(f"backlog must be >= 1, got {n}")
    if p_grid_resolution < 2:
        raise DomainError("p grid needs at least 2 points")
    p_grid = np.linspace(0.0, 1.0, p_grid_resolution + 1)[1:]  # (0, 1]
    curves: dict[int, list[FrontierPoint]] = {}
    all_points: list[FrontierPoint] = []
    for k in range(config.max_crs + 1):
        curve = []
        for p in p_grid:
            point = OperatingPoint(p=float(p), k=k)
            s = expected_throughput(n, point.p, k, config.preambles)
            r = expected_resources(n, point, config)
            curve.append(FrontierPoint(s, r, point))
        curves[k] = curve
        all_points.extend(curve)

    # Sweep by ascending R, tie-broken by descending S; a point survives iff
    # it strictly improves the best throughput seen so far.
    ordered = sorted(all_points, key=lambda fp: (fp.resources, -fp.throughput))
    frontier: list[FrontierPoint] = []
    best_s = -np.inf
    for fp in ordered:
        if fp.throughput > best_s:
            frontier.append(fp)
            best_s = fp.throughput
    return ParetoResult(frontier=frontier, curves=curves)


class DriftDivergedError(RuntimeError):
    """The drift recursion did not drain the backlog within the round cap."""


@dataclass(frozen=True)
class DriftPrediction:
    rounds_to_resolution: int
    trajectory: list[tuple[float, float, float]]  # (backlog, arrivals, successes) per round
    epsilon: float


def drift_burst_resolution(
    scenario,
    policy: Callable[[float], OperatingPoint],
    config: SystemConfig,
    epsilon: float = 1.0,
    max_rounds: int = 10**6,
) -> DriftPrediction:
    """Predict burst resolution time by iterating the expected backlog.

    The recursion is E[n_{i+1}] = E[n_i] - S(E[n_i], policy(E[n_i])) + E[a_{i+1}],
    where E[a_i] is the expected arrival mass falling in round i (from the
    scenario's activation-time density).  Stops at the first round whose
    expected backlog is below `epsilon` with no arrivals left.
    """
    from .traffic import expected_arrivals_in_round  # local import to avoid a cycle

    if epsilon <= 0:
        raise DomainError("epsilon must be > 0")
    arrival_rounds = scenario.last_arrival_round(config.round_duration_ms)
    backlog = expected_arrivals_in_round(scenario, 0, config.round_duration_ms)
    trajectory: list[tuple[float, float, float]] = []
    i = 0
    while i < max_rounds:
        if backlog < epsilon and i > arrival_rounds:
            return DriftPrediction(rounds_to_resolution=i, trajectory=trajectory, epsilon=epsilon)
        if backlog > 0:
            point = policy(backlog)
            s = min(expected_throughput(backlog, point.p, point.k, config.preambles), backlog)
        else:
            s = 0.0
        arrivals = expected_arrivals_in_round(scenario, i + 1, config.round_duration_ms)
        trajectory.append((backlog, arrivals, s))
        backlog = max(0.0, backlog - s) + arrivals
        i += 1
    raise DriftDivergedError(f"backlog not below {epsilon} after {max_rounds} rounds")
