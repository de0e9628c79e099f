"""Contention-round simulator and numerical-optimization library for
massive-IoT random access with joint access barring and binary countdown
contention resolution."""

from .model import (
    DomainError,
    OperatingPoint,
    PreambleOutcome,
    PrioritySequence,
    RoundOutcome,
    SystemConfig,
    encode_priority,
    resolve_preamble,
)
from .analytics import (
    DriftPrediction,
    drift_burst_resolution,
    expected_occupied,
    expected_resources,
    expected_throughput,
    pareto_frontier,
)
from .estimator import EstimatorState, observe_idle, observe_successes
from .optimizer import (
    InfeasibleBudgetError,
    ResourceBudget,
    aloha_optimal_p,
    crs_decision,
    reference_budget,
    root_find_p,
    solve_fixed_k,
    solve_operating_point,
)
from .traffic import BurstScenario, expected_arrivals_in_round, sample_activation_times
from .sim import SimulationResult, run_dacb, run_dbca, run_qtra
from .metrics import MetricSummary, summarize

__version__ = "0.1.0"
