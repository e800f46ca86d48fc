"""Eigenstate tracking for open quantum systems.

Simulation library and CLI that follow a chosen instantaneous Hamiltonian
eigenstate of a driven open system: adiabatic-frame superoperators,
target-first P-Q partitioned time-convolutionless propagation, exact
non-Markovian qubit solvers, and pulse/noise control protocols.
"""

__version__ = "0.1.0"

from .numerics import (
    DEFAULT_POLICY,
    NumericPolicy,
    TimeGrid,
    herm_eigendecompose,
    matrix_exp,
    time_ordered_product,
)
from .controls import ChaoticTrain, ImpulseNoise, RectTrain, SteadySignal
from .frame import SpectralFrame, build_adiabatic_ops, build_spectral_frame
from .partition import block_propagators, interaction_picture, partition
from .tcl import (
    KernelTable,
    propagate_closed,
    propagate_projected,
    sigma_first_order,
)
from .bath import BathSpec, bruteforce_liouville, exact_qubit_me, solve_c_plus
from .models import (
    OpenQubitModel,
    RotatingFieldQubit,
    TwoQubitEffectiveModel,
    adiabatic_condition,
    exact_closed_amplitude,
)
from .results import TrajectoryResult

__all__ = [
    "__version__",
    "DEFAULT_POLICY",
    "NumericPolicy",
    "TimeGrid",
    "herm_eigendecompose",
    "matrix_exp",
    "time_ordered_product",
    "SteadySignal",
    "RectTrain",
    "ChaoticTrain",
    "ImpulseNoise",
    "SpectralFrame",
    "build_spectral_frame",
    "build_adiabatic_ops",
    "partition",
    "block_propagators",
    "interaction_picture",
    "KernelTable",
    "propagate_projected",
    "propagate_closed",
    "sigma_first_order",
    "BathSpec",
    "solve_c_plus",
    "exact_qubit_me",
    "bruteforce_liouville",
    "OpenQubitModel",
    "RotatingFieldQubit",
    "TwoQubitEffectiveModel",
    "exact_closed_amplitude",
    "adiabatic_condition",
    "TrajectoryResult",
]
