"""Learnability diagnostics for parametrized quantum circuits.

The central quantity is the relative fluctuation ``sigma / sigma_0`` of a cost
landscape, estimated by sampling discrete (Clifford) parameter points and
evaluating them on a stabilizer simulator.
"""

from .circuit import (
    Circuit,
    CircuitBuilder,
    build_brickwall_1d,
    build_hva_tfi,
    build_ladder,
    causal_cone,
    local_depth,
)
from .errors import CapacityError, DimensionError, EngineError, RFLabError
from .models import ModelSpec, build_model, exact_solution_circuit
from .pauli import Hamiltonian, PauliString
from .rf import (
    RFReport,
    SamplePlan,
    estimate_sigma,
    estimate_sigma_continuous,
    relative_fluctuation,
    resolve_m_eff,
    sigma_haar,
    sigma_zero,
    theorem1_bound,
)
from .stabilizer import StabilizerState
from .statevector import effective_dimension, qfi_matrix, train_adam

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CircuitBuilder",
    "build_brickwall_1d",
    "build_hva_tfi",
    "build_ladder",
    "causal_cone",
    "local_depth",
    "CapacityError",
    "DimensionError",
    "EngineError",
    "RFLabError",
    "ModelSpec",
    "build_model",
    "exact_solution_circuit",
    "Hamiltonian",
    "PauliString",
    "RFReport",
    "SamplePlan",
    "estimate_sigma",
    "estimate_sigma_continuous",
    "relative_fluctuation",
    "resolve_m_eff",
    "sigma_haar",
    "sigma_zero",
    "theorem1_bound",
    "StabilizerState",
    "effective_dimension",
    "qfi_matrix",
    "train_adam",
]
