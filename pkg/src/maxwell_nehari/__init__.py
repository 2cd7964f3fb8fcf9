"""Ground states of the curl-curl Nehari-Pankov problem on rectangular cavities and cylinders."""

__version__ = "0.1.0"

from .basis import BoxDomain, ModeBasis, StateVector, enumerate_modes, split_spaces
from .energy import EnergyContext, J_eval, J_grad
from .errors import AliasingError, ConvergenceError, RegimeError, StructureError
from .nehari import SolverConfig, ground_state, inner_maximize, oracle_dense
from .nonlinearity import NonlinearitySpec, check_conditions, kerr_from_physics

__all__ = [
    "BoxDomain", "ModeBasis", "StateVector", "enumerate_modes", "split_spaces", "EnergyContext", "J_eval",
    "J_grad", "AliasingError", "ConvergenceError", "RegimeError", "StructureError", "SolverConfig",
    "ground_state", "inner_maximize", "oracle_dense", "NonlinearitySpec", "check_conditions",
    "kerr_from_physics",
]
