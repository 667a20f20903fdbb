"""Ground solving, instantiation rounds and strategies."""
from .backend import BackendError, ExternalBackend
from .epr import EprExport, EprExportError, epr_export, epr_violations
from .ground import GroundSolver, SolverTimeout
from .instances import Instance, InstanceCache, InvariantViolation, d_t1_round, eager_bound, eager_instances
from .solver import MODES, Stats, Strategy, StrategyError, Verdict, decide, recheck, split_pairs

__all__ = [
    "BackendError", "ExternalBackend", "EprExport", "EprExportError", "epr_export", "epr_violations",
    "GroundSolver", "SolverTimeout", "Instance", "InstanceCache", "InvariantViolation", "d_t1_round",
    "eager_bound", "eager_instances", "MODES", "Stats", "Strategy", "StrategyError", "Verdict",
    "decide", "recheck", "split_pairs",
]
