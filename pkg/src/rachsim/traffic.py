"""Burst arrival generation and per-round expected arrival mass.

Activation times of the N burst devices are i.i.d. over an activation
window of length T_a, with one of three densities: a Beta(alpha, beta)
pulse (the standard bursty model), a uniform spread, or a delta spike in
which everything activates at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import DomainError

SHAPES = ("beta", "uniform", "delta")


@dataclass(frozen=True)
class BurstScenario:
    """Arrival process for one burst of `n_ues` devices."""

    n_ues: int
    shape: str = "beta"
    window_ms: float = 1000.0
    alpha: float = 3.0
    beta: float = 4.0

    def __post_init__(self) -> None:
        if self.n_ues < 0:
            raise DomainError(f"n_ues must be >= 0, got {self.n_ues}")
        if self.shape not in SHAPES:
            raise DomainError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.shape == "beta" and (self.alpha <= 0 or self.beta <= 0):
            raise DomainError("beta shape parameters must be > 0")
        if self.shape != "delta" and self.window_ms <= 0:
            raise DomainError("window_ms must be > 0")

    def last_arrival_round(self, round_duration_ms: float) -> int:
        """Index of the last round with nonzero expected arrival mass; -1 if
        there are no arrivals at all."""
        if self.n_ues == 0:
            return -1
        if self.shape == "delta":
            return 0
        # window (0, T_a): mass ends strictly before T_a
        return int(np.ceil(self.window_ms / round_duration_ms)) - 1


def sample_activation_times(scenario: BurstScenario, rng: np.random.Generator) -> np.ndarray:
    """Draw the N i.i.d. activation times (ms) of the burst."""
    n = scenario.n_ues
    if scenario.shape == "delta":
        return np.zeros(n)
    if scenario.shape == "uniform":
        return rng.uniform(0.0, scenario.window_ms, size=n)
    return scenario.window_ms * rng.beta(scenario.alpha, scenario.beta, size=n)


def _activation_cdf(scenario: BurstScenario, t_ms: float) -> float:
    """P[activation time <= t]."""
    if t_ms <= 0:
        return 0.0
    if t_ms >= scenario.window_ms and scenario.shape != "delta":
        return 1.0
    if scenario.shape == "delta":
        return 1.0
    if scenario.shape == "uniform":
        return t_ms / scenario.window_ms
    return float(special.betainc(scenario.alpha, scenario.beta, t_ms / scenario.window_ms))


def expected_arrivals_in_round(scenario: BurstScenario, round_index: int, round_duration_ms: float) -> float:
    """Expected number of activations falling inside round `round_index`.

    Rounds are 0-based: round i covers [i*T, (i+1)*T).  Summed over all
    rounds this equals N exactly (CDF telescoping).
    """
    if round_index < 0:
        raise DomainError(f"round_index must be >= 0, got {round_index}")
    n = scenario.n_ues
    if n == 0:
        return 0.0
    if scenario.shape == "delta":
        return float(n) if round_index == 0 else 0.0
    lo = round_index * round_duration_ms
    hi = (round_index + 1) * round_duration_ms
    return n * (_activation_cdf(scenario, hi) - _activation_cdf(scenario, lo))
