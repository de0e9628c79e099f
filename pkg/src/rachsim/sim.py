"""Round-based simulation of the contention protocols over the collision
channel.

Three protocols share the same channel mechanics:

* dbca  -- access barring jointly tuned with binary-countdown arbitration,
           driven by the pseudo-Bayesian estimator and a per-round
           resource budget;
* dacb  -- dynamic access barring alone (k = 0), estimator-driven or with
           genie backlog knowledge;
* qtra  -- q-ary splitting-tree collision resolution without barring.

A replication is strictly sequential; each owns four named RNG streams
(activation, barring, preamble choice, priority choice) derived from the
master seed so that paired-seed comparisons across protocols reuse
identical activation draws.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import estimator as est
from .model import DomainError, OperatingPoint, SystemConfig
from .optimizer import (
    InfeasibleBudgetError,
    ResourceBudget,
    aloha_optimal_p,
    crs_decision,
    reference_budget,
    solve_operating_point,
)
from .traffic import BurstScenario, sample_activation_times

_STREAM_ACTIVATION = 0
_STREAM_ACB = 1
_STREAM_PREAMBLE = 2
_STREAM_PRIORITY = 3


class NonTerminationError(RuntimeError):
    """The burst did not resolve within the round cap."""

    def __init__(self, message: str, trace: list["RoundTrace"]):
        super().__init__(message)
        self.trace = trace


def replication_streams(master_seed: int, replication: int) -> dict[str, np.random.Generator]:
    """One generator per concern; the activation stream depends only on
    (seed, replication) so every protocol sees the same arrival draws."""
    def gen(concern: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, replication, concern))))

    return {
        "activation": gen(_STREAM_ACTIVATION),
        "acb": gen(_STREAM_ACB),
        "preamble": gen(_STREAM_PREAMBLE),
        "priority": gen(_STREAM_PRIORITY),
    }


@dataclass(frozen=True)
class RoundTrace:
    round_index: int
    n_true: int
    n_hat_prior: float
    n_hat_post: float
    q_boost: int
    p: float
    k: int
    idle: int
    occupied: int
    successes: int
    resources: float


@dataclass
class SimulationResult:
    protocol: str
    n_ues: int
    rounds: int
    service_times_ms: np.ndarray
    total_resources: float
    trace: list[RoundTrace] = field(default_factory=list)


def _resolve_winners(
    survivors: np.ndarray,
    preambles: np.ndarray,
    priorities: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Winners across all occupied preambles of one round.

    Vectorized form of per-preamble arbitration: within a preamble the
    unique minimum priority wins, a lone contender always wins.  Returns
    (winner UE ids, occupied preamble count).
    """
    if survivors.size == 0:
        return survivors[:0], 0
    order = np.lexsort((priorities, preambles))
    pre_s = preambles[order]
    prio_s = priorities[order]
    starts = np.flatnonzero(np.r_[True, pre_s[1:] != pre_s[:-1]])
    ends = np.r_[starts[1:], pre_s.size]
    sizes = ends - starts
    next_idx = np.minimum(starts + 1, pre_s.size - 1)
    wins = (sizes == 1) | (prio_s[starts] < prio_s[next_idx])
    winners = survivors[order[starts[wins]]]
    return winners, int(starts.size)


def _contention_round(
    contenders: np.ndarray,
    p: float,
    k_from_idle: "callable",
    config: SystemConfig,
    rng_acb: np.random.Generator,
    rng_pre: np.random.Generator,
    rng_prio: np.random.Generator,
) -> tuple[np.ndarray, int, int, int]:
    """One barred-and-arbitrated round.

    `k_from_idle` maps the observed idle count to the slot count for this
    round (the controller decides k only after seeing the preamble
    activations).  Returns (winner ids, idle, occupied, k).
    """
    if contenders.size:
        passed = rng_acb.random(contenders.size) < p
        survivors = contenders[passed]
    else:
        survivors = contenders
    preambles = rng_pre.integers(0, config.preambles, size=survivors.size)
    occupied = int(np.unique(preambles).size)
    idle = config.preambles - occupied
    k = int(k_from_idle(idle))
    levels = 1 << k
    priorities = rng_prio.integers(0, levels, size=survivors.size)
    winners, occ_check = _resolve_winners(survivors, preambles, priorities)
    assert occ_check == occupied
    return winners, idle, occupied, k


def _activation_rounds(scenario: BurstScenario, config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    times = sample_activation_times(scenario, rng)
    return np.floor(times / config.round_duration_ms).astype(np.int64)


def _finish(
    protocol: str,
    scenario: BurstScenario,
    config: SystemConfig,
    activation: np.ndarray,
    success_round: np.ndarray,
    trace: list[RoundTrace],
) -> SimulationResult:
    rounds = len(trace)
    service = (success_round - activation + 1) * config.round_duration_ms
    total = float(sum(t.resources for t in trace))
    return SimulationResult(
        protocol=protocol,
        n_ues=scenario.n_ues,
        rounds=rounds,
        service_times_ms=service.astype(float),
        total_resources=total,
        trace=trace,
    )


def run_dbca(
    scenario: BurstScenario,
    config: SystemConfig,
    proportionality_c: float,
    master_seed: int,
    replication: int = 0,
    solver_method: str = "approx",
    constraint_mode: str = "soft",
    update_base: str = "posterior",
    max_rounds: int = 200_000,
) -> SimulationResult:
    """Run the joint barring + countdown protocol until burst resolution.

    Per round: barred MSG1s -> idle observation -> estimator correction ->
    slot-count decision under the budget -> arbitration -> success
    observation -> next round's access probability from the constrained
    throughput maximization.  The budget is re-derived every round as
    C times the reference (k = 0, p = M/n) consumption at the current
    estimate.
    """
    if constraint_mode not in ("soft", "hard"):
        raise DomainError(f"constraint_mode must be 'soft' or 'hard', got {constraint_mode!r}")
    streams = replication_streams(master_seed, replication)
    activation = _activation_rounds(scenario, config, streams["activation"])
    n = scenario.n_ues
    success_round = np.full(n, -1, dtype=np.int64)
    connected = np.zeros(n, dtype=bool)
    last_arrival = int(activation.max()) if n else -1

    state = est.EstimatorState()
    p = 1.0
    trace: list[RoundTrace] = []
    i = 0
    while True:
        pending = n and not connected.all()
        if not pending and i > last_arrival:
            return _finish("dbca", scenario, config, activation, success_round, trace)
        if n == 0:
            return _finish("dbca", scenario, config, activation, success_round, trace)
        if i >= max_rounds:
            raise NonTerminationError(f"dbca burst unresolved after {max_rounds} rounds", trace)

        contenders = np.flatnonzero((activation <= i) & ~connected)
        prior = state.n_prior

        def decide_k(idle: int) -> int:
            nonlocal state
            state = est.observe_idle(state, p, idle, config.preambles)
            budget = reference_budget(max(state.n_posterior, 1.0), config, proportionality_c)
            n_for_k = state.n_posterior
            if constraint_mode == "hard":
                # replace the expected idle term with the observation
                occ_obs = config.preambles - idle
                if occ_obs <= 0:
                    return 0
                k_raw = (1.0 / config.crs_overhead) * (
                    (budget.epsilon_r - config.prach_resources)
                    / (config.msg3_resources * occ_obs)
                    - 1.0
                )
                return max(0, min(math.floor(k_raw + 1e-9), config.max_crs))
            return crs_decision(n_for_k, p, budget, config)

        winners, idle, occupied, k = _contention_round(
            contenders, p, decide_k, config, streams["acb"], streams["preamble"], streams["priority"]
        )
        connected[winners] = True
        success_round[winners] = i
        resources = config.round_resources(k, occupied)
        state = est.observe_successes(state, winners.size, update_base=update_base)
        trace.append(
            RoundTrace(i, int(contenders.size), prior, state.n_posterior, state.boost_q,
                       p, k, idle, occupied, int(winners.size), resources)
        )
        if state.n_prior < 1.0:
            p = 1.0
        else:
            budget = reference_budget(state.n_prior, config, proportionality_c)
            p = solve_operating_point(state.n_prior, budget, config, method=solver_method).p
        i += 1


def run_dacb(
    scenario: BurstScenario,
    config: SystemConfig,
    master_seed: int,
    replication: int = 0,
    mode: str = "estimated",
    update_base: str = "posterior",
    max_rounds: int = 200_000,
) -> SimulationResult:
    """Dynamic access barring baseline: k = 0, p = min(1, M / backlog).

    `mode` selects the backlog source: the pseudo-Bayesian estimate
    ("estimated") or perfect knowledge of the contender count ("genie").
    """
    if mode not in ("estimated", "genie"):
        raise DomainError(f"mode must be 'estimated' or 'genie', got {mode!r}")
    streams = replication_streams(master_seed, replication)
    activation = _activation_rounds(scenario, config, streams["activation"])
    n = scenario.n_ues
    success_round = np.full(n, -1, dtype=np.int64)
    connected = np.zeros(n, dtype=bool)
    last_arrival = int(activation.max()) if n else -1

    state = est.EstimatorState()
    p = 1.0
    trace: list[RoundTrace] = []
    protocol = f"dacb-{mode}"
    i = 0
    while True:
        pending = n and not connected.all()
        if (not pending and i > last_arrival) or n == 0:
            return _finish(protocol, scenario, config, activation, success_round, trace)
        if i >= max_rounds:
            raise NonTerminationError(f"{protocol} burst unresolved after {max_rounds} rounds", trace)

        contenders = np.flatnonzero((activation <= i) & ~connected)
        if mode == "genie":
            p = aloha_optimal_p(float(contenders.size), config.preambles)
        prior = state.n_prior

        def observe(idle: int) -> int:
            nonlocal state
            state = est.observe_idle(state, p, idle, config.preambles)
            return 0

        winners, idle, occupied, k = _contention_round(
            contenders, p, observe, config, streams["acb"], streams["preamble"], streams["priority"]
        )
        connected[winners] = True
        success_round[winners] = i
        state = est.observe_successes(state, winners.size, update_base=update_base)
        trace.append(
            RoundTrace(i, int(contenders.size), prior, state.n_posterior, state.boost_q,
                       p, 0, idle, occupied, int(winners.size), config.round_resources(0, occupied))
        )
        if mode == "estimated":
            p = 1.0 if state.n_prior < 1.0 else min(1.0, config.preambles / state.n_prior)
        i += 1


def run_qtra(
    scenario: BurstScenario,
    config: SystemConfig,
    q: int,
    master_seed: int,
    replication: int = 0,
    max_rounds: int = 200_000,
) -> SimulationResult:
    """q-ary splitting-tree baseline, run without a resource constraint.

    Fresh devices contend over all preambles only while no tree is active;
    otherwise they wait in a gate pool.  Every collision reserves q
    preambles in the next round with capacity, and its members re-split
    uniformly over those q.  A FIFO queue holds splits when demand exceeds
    the per-round preamble budget.  Resource accounting is k = 0: PRACH
    plus one MSG3 per occupied preamble.
    """
    if q < 2:
        raise DomainError(f"branching factor must be >= 2, got {q}")
    if q > config.preambles:
        raise DomainError("branching factor cannot exceed the preamble count")
    streams = replication_streams(master_seed, replication)
    activation = _activation_rounds(scenario, config, streams["activation"])
    rng_pre = streams["preamble"]
    n = scenario.n_ues
    success_round = np.full(n, -1, dtype=np.int64)
    connected = np.zeros(n, dtype=bool)
    last_arrival = int(activation.max()) if n else -1

    gate: list[np.ndarray] = []  # arrivals held back while trees are active
    queue: deque[np.ndarray] = deque()  # pending collision groups
    trace: list[RoundTrace] = []
    M = config.preambles
    i = 0
    while True:
        done = (n == 0) or (connected.all() and i > last_arrival and not queue and not gate)
        if done:
            return _finish(f"qtra-{q}", scenario, config, activation, success_round, trace)
        if i >= max_rounds:
            raise NonTerminationError(f"qtra-{q} burst unresolved after {max_rounds} rounds", trace)

        fresh = np.flatnonzero(activation == i) if n else np.empty(0, dtype=np.int64)
        active = int(np.count_nonzero((activation <= i) & ~connected)) if n else 0
        occupied = 0
        successes: list[np.ndarray] = []
        new_groups: list[np.ndarray] = []

        if queue:
            gate.append(fresh)
            used = 0
            while queue and used + q <= M:
                group = queue.popleft()
                slots = rng_pre.integers(0, q, size=group.size)
                for s in range(q):
                    members = group[slots == s]
                    if members.size == 0:
                        continue
                    occupied += 1
                    if members.size == 1:
                        successes.append(members)
                    else:
                        new_groups.append(members)
                used += q
        else:
            pool = np.concatenate(gate + [fresh]) if (gate or fresh.size) else fresh
            gate = []
            if pool.size:
                choice = rng_pre.integers(0, M, size=pool.size)
                for j in np.unique(choice):
                    members = pool[choice == j]
                    occupied += 1
                    if members.size == 1:
                        successes.append(members)
                    else:
                        new_groups.append(members)

        queue.extend(new_groups)
        won = np.concatenate(successes) if successes else np.empty(0, dtype=np.int64)
        connected[won] = True
        success_round[won] = i
        trace.append(
            RoundTrace(i, active, math.nan, math.nan, 0,
                       1.0, 0, M - occupied, occupied, int(won.size),
                       config.round_resources(0, occupied))
        )
        i += 1


def simulate_fixed_rounds(
    n: int,
    p: float,
    k: int,
    M: int,
    rounds: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-round success counts for `rounds` independent rounds at constant
    backlog n and a frozen operating point.

    Monte Carlo bridge for the closed-form throughput: survivors are
    binomial, preamble occupancy is multinomial, and each occupied
    preamble succeeds with the exact unique-minimum-priority probability
    for its multiplicity.  Marginally this is distributed exactly like a
    fully per-device simulated round.
    """
    l = 1 << k
    win_table = np.array([unique_min_probability(m, l) for m in range(n + 1)])
    survivors = rng.binomial(n, p, size=rounds)
    counts = rng.multinomial(survivors, np.full(M, 1.0 / M))
    draws = rng.random(counts.shape)
    succ = (draws < win_table[counts]) & (counts > 0)
    return succ.sum(axis=1)


def unique_min_probability(m: int, levels: int) -> float:
    """P[the minimum of m i.i.d. uniform draws over `levels` values is held
    by exactly one of them].  Elementary counting; m = 0 gives 0, m = 1
    gives 1."""
    if m == 0:
        return 0.0
    if m == 1:
        return 1.0
    if levels == 1:
        return 0.0
    total = 0.0
    for v in range(levels):
        total += m * (1.0 / levels) * ((levels - 1 - v) / levels) ** (m - 1)
    return total
