"""Pseudo-Bayesian backlog estimation with burst boosting.

The controller never sees the backlog directly.  Treating it as Poisson
with mean equal to the running a-priori estimate, the observed idle
preamble count yields a correction

    dn = p * n_prior * (exp(-p*n_prior/M) - idle/M) / (1 - exp(-p*n_prior/M)),

applied to form the a-posteriori estimate.  Consecutive positive
corrections signal an ongoing burst; a boosting counter q multiplies the
positive correction into the next round's arrival allowance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import DomainError


@dataclass(frozen=True)
class EstimatorState:
    """Running state: a-priori and a-posteriori backlog estimates, the last
    idle-observation correction, and the burst boosting counter."""

    n_prior: float = 1.0
    n_posterior: float = 1.0
    delta_n: float = 0.0
    boost_q: int = 0


def observe_idle(state: EstimatorState, p: float, idle_count: int, M: int) -> EstimatorState:
    """Fold the observed idle-preamble count into the a-posteriori estimate.

    At a zero prior the correction takes its continuity limit M - idle
    (the observed occupancy): lim_{n->0} p n (e^{-pn/M} - I/M)/(1 - e^{-pn/M})
    = M - I.  Defining it as 0 instead would make the zero prior an
    absorbing state: with p pinned at 1 and the channel saturated, the
    estimator could never climb back out and staggered bursts would
    deadlock.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"access probability must be in (0, 1], got {p}")
    if not 0 <= idle_count <= M:
        raise DomainError(f"idle count {idle_count} out of range [0, {M}]")
    if state.n_prior <= 0.0:
        delta = float(M - idle_count)
    else:
        e = math.exp(-p * state.n_prior / M)
        denom = 1.0 - e
        delta = 0.0 if denom == 0.0 else p * state.n_prior * (e - idle_count / M) / denom
    posterior = max(0.0, state.n_prior + delta)
    return replace(state, n_posterior=posterior, delta_n=delta)


def observe_successes(
    state: EstimatorState, successes: int, update_base: str = "posterior"
) -> EstimatorState:
    """Roll the estimate forward after the round's successes are known.

    A positive idle correction increments the boosting counter q (reset
    otherwise), and q times the positive correction is added as the
    expected fresh-arrival mass.  `update_base` selects whether the
    a-posteriori ("posterior", the default; tracks the true backlog more
    tightly under bursts) or the a-priori ("prior") estimate anchors the
    next prior.
    """
    if successes < 0:
        raise DomainError(f"success count must be >= 0, got {successes}")
    if update_base not in ("prior", "posterior"):
        raise DomainError(f"update_base must be 'prior' or 'posterior', got {update_base!r}")
    q_next = state.boost_q + 1 if state.delta_n > 0 else 0
    base = state.n_prior if update_base == "prior" else state.n_posterior
    prior_next = max(0.0, base + q_next * max(0.0, state.delta_n) - successes)
    return EstimatorState(
        n_prior=prior_next,
        n_posterior=state.n_posterior,
        delta_n=state.delta_n,
        boost_q=q_next,
    )
