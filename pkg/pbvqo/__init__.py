from .hamiltonians import HardwareModel, ProblemGraph, ring_graph
from .optimizers import BfgsOptions, GaConfig, bfgs_minimize, ga_minimize
from .pulses import PulseAnsatz, CircuitParams
from .records import RunRecord, StudyResult
from .simulator import EvolutionConfig, evolve, initial_state
from .workflows import (
    PbvqoProblem, QaoaParams, histogram_study, meta_learn, run_pbvqo,
    run_qaoa, sweep_duration,
)

__all__ = [
    "HardwareModel",
    "ProblemGraph",
    "ring_graph",
    "BfgsOptions",
    "GaConfig",
    "bfgs_minimize",
    "ga_minimize",
    "PulseAnsatz",
    "CircuitParams",
    "RunRecord",
    "StudyResult",
    "EvolutionConfig",
    "evolve",
    "initial_state",
    "PbvqoProblem",
    "QaoaParams",
    "histogram_study",
    "meta_learn",
    "run_pbvqo",
    "run_qaoa",
    "sweep_duration",
]

__version__ = "0.0.1"
