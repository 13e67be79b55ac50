"""
rou-lab: simulation and drift estimation for the Rosenblatt Ornstein-Uhlenbeck
process with periodic mean.
"""

__version__ = "0.1.0"

from .errors import EstimationError, RouLabError, ValidationError
from .estimators import EstimateResult, EstimatorKind, estimate
from .kernel import HurstParams, KernelConstants, calibrate_constants
from .model import DriftSpec, ModelParams, SamplePath, TrigBasisFunction, classify_assumption, simulate_rou
from .montecarlo import ExperimentConfig, ExperimentKind, run_experiment
from .rosenblatt import generate_brownian, rosenblatt_path_bruteforce, rosenblatt_path_fast

__all__ = [
    "__version__",
    "DriftSpec",
    "EstimateResult",
    "EstimationError",
    "EstimatorKind",
    "ExperimentConfig",
    "ExperimentKind",
    "HurstParams",
    "KernelConstants",
    "ModelParams",
    "RouLabError",
    "SamplePath",
    "TrigBasisFunction",
    "ValidationError",
    "calibrate_constants",
    "classify_assumption",
    "estimate",
    "generate_brownian",
    "rosenblatt_path_bruteforce",
    "rosenblatt_path_fast",
    "run_experiment",
    "simulate_rou",
]
