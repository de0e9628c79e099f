"""Resource-constrained throughput maximization.

Given a backlog estimate and a per-round resource budget, pick the
operating point (access probability p, countdown slot count k) that
maximizes the expected throughput subject to the expected consumption
staying within the budget.  The constraint is handled by reduction to a
closed half-plane p <= p_max for each fixed k, and the fixed-k subproblem
is unimodal in p, so a bounded scalar maximization (or the faster
root-finding approximation) nails it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .analytics import expected_occupied, expected_resources, expected_throughput
from .model import DomainError, OperatingPoint, SystemConfig


class InfeasibleBudgetError(ValueError):
    """The resource budget cannot cover even a bare round."""


@dataclass(frozen=True)
class ResourceBudget:
    """Per-round cap on expected uplink resource consumption.

    `proportionality_c` is recorded when the cap was derived as C times a
    reference (plain dynamic-barring) consumption; it is informational here.
    """

    epsilon_r: float
    proportionality_c: float | None = None

    def check_feasible(self, config: SystemConfig) -> None:
        if self.epsilon_r <= config.prach_resources:
            raise InfeasibleBudgetError(
                f"budget {self.epsilon_r} cannot exceed the PRACH floor {config.prach_resources}"
            )


def reference_budget(n_hat: float, config: SystemConfig, proportionality_c: float) -> ResourceBudget:
    """Budget proportional to what dynamic barring (k=0, p=min(1, M/n)) would
    be expected to consume at the same backlog."""
    p_ref = aloha_optimal_p(n_hat, config.preambles)
    ref = expected_resources(max(n_hat, 0.0), OperatingPoint(p=p_ref, k=0), config)
    return ResourceBudget(epsilon_r=proportionality_c * ref, proportionality_c=proportionality_c)


def aloha_optimal_p(n: float, M: int) -> float:
    """Throughput-optimal access probability without countdown slots.

    For an empty backlog there is no contention to gate, so return 1.
    """
    if n < 0:
        raise DomainError(f"backlog must be >= 0, got {n}")
    if n == 0:
        return 1.0
    return min(1.0, M / n)


def crs_decision(n_hat: float, p: float, budget: ResourceBudget, config: SystemConfig) -> int:
    """Number of countdown slots affordable this round.

    Solves the expected-consumption identity for k and takes the largest
    integer k whose expected consumption stays within the budget, clamped
    to [0, max_crs].  With no expected occupancy there is nothing to
    arbitrate and k is 0.
    """
    if n_hat < 0:
        raise DomainError(f"backlog estimate must be >= 0, got {n_hat}")
    occ = expected_occupied(n_hat, p, config.preambles) if n_hat > 0 else 0.0
    if occ <= 0.0:
        return 0
    k_raw = (1.0 / config.crs_overhead) * (
        (budget.epsilon_r - config.prach_resources) / (config.msg3_resources * occ) - 1.0
    )
    # floor with a hair of slack so exact-integer solutions are not lost to
    # floating point; rounding up would overshoot the budget by a fraction
    # of a slot, so never round to nearest here
    k = math.floor(k_raw + 1e-9)
    return max(0, min(k, config.max_crs))


def budget_p_max(n: float, k: int, budget: ResourceBudget, config: SystemConfig) -> float:
    """Largest access probability whose expected consumption with k slots
    fits the budget; the constraint region is the half-plane p <= p_max."""
    budget.check_feasible(config)
    M = config.preambles
    headroom = (budget.epsilon_r - config.prach_resources) / (
        M * config.msg3_resources * (1.0 + k * config.crs_overhead)
    )
    base = 1.0 - headroom
    if base <= 0.0:
        return 1.0  # even p=1 fits
    p_max = M - M * base ** (1.0 / n)
    return min(1.0, max(p_max, 0.0))


def _unconstrained_p_exact(n: float, k: int, M: int) -> float:
    """Maximizer of the exact expected-throughput sum over p in (0, 1]."""
    res = optimize.minimize_scalar(
        lambda p: -expected_throughput(n, p, k, M), bounds=(1e-9, 1.0), method="bounded",
        options={"xatol": 1e-10},
    )
    # the bounded search can stop a whisker inside the boundary when the
    # maximum sits at p = 1
    if expected_throughput(n, 1.0, k, M) >= -res.fun:
        return 1.0
    return float(res.x)


def root_find_p(n: float, k: int, M: int) -> float:
    """Fast approximate maximizer of the fixed-k throughput via the
    exponential-approximation root equation.

    Substituting x = n p / (M l) into the geometric-series form of the
    approximated throughput and zeroing its log-derivative gives

        (1 - x) + e^(-x l) ((1 - x l)(e^(-x) - 1) + x) - e^(-x) = 0

    on x in (0, n/(M l)].  If the bracket holds no root, the boundary
    x = n/(M l) (i.e. p = 1) is the maximizer.
    """
    if n < 2:
        raise DomainError("root-finding path requires n >= 2")
    l = 1 << k

    def f(x: float) -> float:
        return (1.0 - x) + math.exp(-x * l) * ((1.0 - x * l) * (math.expm1(-x)) + x) - math.exp(-x)

    hi = n / (M * l)
    if hi <= 1e-6:
        return 1.0  # bracket is numerically empty; boundary maximizer
    # f(0) = 0 with f ~ l x^2 > 0 just above it, so the interior root is the
    # first crossing into negative territory; start the scan away from the
    # cancellation noise around 0
    xs = np.geomspace(1e-6, hi, 400)
    fs = np.array([f(x) for x in xs])
    negative = np.flatnonzero(fs < 0.0)
    if negative.size == 0:
        x_star = hi
    else:
        idx = int(negative[0])
        a = xs[idx - 1] if idx > 0 else 1e-12
        x_star = float(optimize.brentq(f, a, xs[idx], xtol=1e-9))
    return min(1.0, x_star * M * l / n)


def solve_fixed_k(
    n: float,
    k: int,
    budget: ResourceBudget,
    config: SystemConfig,
    method: str = "exact",
) -> float:
    """Optimal access probability for a fixed slot count under the budget.

    `method` selects the exact unimodal maximization of the throughput sum
    ("exact") or the root-finding approximation ("approx"); both are then
    clipped to the budget's p_max half-plane.
    """
    budget.check_feasible(config)
    if n < 2:
        return min(1.0, budget_p_max(max(n, 1.0), k, budget, config))
    if method == "exact":
        p_free = _unconstrained_p_exact(n, k, config.preambles)
    elif method == "approx":
        p_free = root_find_p(n, k, config.preambles)
    else:
        raise ValueError(f"unknown method {method!r}")
    return min(p_free, budget_p_max(n, k, budget, config), 1.0)


def solve_operating_point(
    n_hat: float,
    budget: ResourceBudget,
    config: SystemConfig,
    method: str = "exact",
) -> OperatingPoint:
    """Budget-constrained throughput-maximizing operating point.

    Searches k over [0, max_crs], solving the unimodal fixed-k subproblem
    for each; ties on throughput go to the cheaper point so the result is
    strongly Pareto-optimal.  A sub-unit backlog estimate needs no gating
    or arbitration at all.
    """
    budget.check_feasible(config)
    if n_hat < 0:
        raise DomainError(f"backlog estimate must be >= 0, got {n_hat}")
    if n_hat < 1:
        return OperatingPoint(p=1.0, k=0)
    best: OperatingPoint | None = None
    best_s = -np.inf
    best_r = np.inf
    for k in range(config.max_crs + 1):
        p = solve_fixed_k(n_hat, k, budget, config, method=method)
        if p <= 0.0:
            continue
        point = OperatingPoint(p=p, k=k)
        s = expected_throughput(n_hat, p, k, config.preambles)
        r = expected_resources(n_hat, point, config)
        if r > budget.epsilon_r + 1e-6:
            continue
        if s > best_s + 1e-12 or (abs(s - best_s) <= 1e-12 and r < best_r):
            best, best_s, best_r = point, s, r
    if best is None:
        raise InfeasibleBudgetError(f"no feasible operating point under budget {budget.epsilon_r}")
    return best
