"""Routing and rescheduling for a single home-care round with same-day requests.

The library models one caregiver's day: a cost-optimal baseline tour over the
pre-scheduled customers fixes promised visit times, then same-day requests are
profitably inserted, or rejected at a cost, under a total travel budget and a
per-customer disruption cap.  The solver is a memetic loop: an adaptive
neighborhood search builds a population, a dual-tabu local search refines it,
and a fitness-distance rule keeps the population diverse.
"""

from .alns import SaState, alns_run, build_population, sa_accept, select_operator
from .baseline import OriginalSchedule, build_original_schedule, solve_tsp
from .config import SolverConfig, load_config
from .instances import (
    DerivedLimits,
    Instance,
    Node,
    NodeKind,
    build_instance,
    compute_limits,
    load_instance,
    parse_instance,
)
from .lpmodel import export_original, export_rescheduling, gap
from .memetic import (
    RunReport,
    fdr,
    memetic_solve,
    population_update,
    solve_with_algorithm,
)
from .operators import OperatorBank, update_weight
from .oracle import OracleResult, exhaustive_optimum
from .solution import (
    FeasibilityReport,
    Relax,
    Solution,
    Verdict,
    ViolationMeasure,
    check_feasible,
    disruption,
    evaluate,
    solution_distance,
)
from .tabu import PenaltyState, phi_eval, ts_run, update_phi

__version__ = "0.1.0"

__all__ = [
    "DerivedLimits",
    "FeasibilityReport",
    "Instance",
    "Node",
    "NodeKind",
    "OperatorBank",
    "OracleResult",
    "OriginalSchedule",
    "PenaltyState",
    "Relax",
    "RunReport",
    "SaState",
    "Solution",
    "SolverConfig",
    "Verdict",
    "ViolationMeasure",
    "alns_run",
    "build_instance",
    "build_original_schedule",
    "build_population",
    "check_feasible",
    "compute_limits",
    "disruption",
    "evaluate",
    "exhaustive_optimum",
    "export_original",
    "export_rescheduling",
    "fdr",
    "gap",
    "load_config",
    "load_instance",
    "memetic_solve",
    "parse_instance",
    "phi_eval",
    "population_update",
    "sa_accept",
    "select_operator",
    "solution_distance",
    "solve_tsp",
    "solve_with_algorithm",
    "ts_run",
    "update_phi",
    "update_weight",
]
