"""qcollide: quantum collisions as work sources.

Simulates the collision of a structured particle with a fixed system at
three fidelities — exact multichannel scattering map, momentum-averaged
random-unitary reduction, and single-unitary work-source limit — alongside
the equivalent time-driven interaction model, and quantifies when the
collision exchanges energy at zero entropy change.
"""
from .core import (
    HBAR,
    CouplingOperator,
    DensityMatrix,
    InternalSystem,
    tensor_factorize,
    unitary_from_generator,
    von_neumann_entropy,
)
from .kinetics import (
    KineticState,
    RegimeReport,
    classify_regime,
    gaussian_mixed,
    gaussian_pure,
    purity,
    wigner,
)
from .maps import (
    AppliedState,
    CPTPReport,
    MapTensor,
    QuadratureError,
    QuadratureSpec,
    apply_map,
    choi_matrix,
    collision_unitary,
    cptp_check,
    magnus_first_order,
    magnus_second_order_norm,
    random_unitary_map,
    scattering_map_tensor,
    semiclassical_collision,
    time_dependent_evolve,
    time_dependent_propagator,
)
from .potentials import SpatialPotential, TemporalPotential
from .smatrix import (
    ClosedChannelError,
    MultichannelSolver,
    SMatrixAtE,
    semiclassical_smatrix,
    solve_multichannel,
    unitarity_defect,
)
from .spins import TwoSpinParams, analytic_unitary, build_two_spin, rabi_cycle_lambdas
from .thermo import (
    CollisionReport,
    build_report,
    energy_change,
    entropy_change,
    sector_observables,
)

__version__ = "0.1.0"

__all__ = [
    "HBAR",
    "AppliedState",
    "CPTPReport",
    "ClosedChannelError",
    "CollisionReport",
    "CouplingOperator",
    "DensityMatrix",
    "InternalSystem",
    "KineticState",
    "MapTensor",
    "MultichannelSolver",
    "QuadratureError",
    "QuadratureSpec",
    "RegimeReport",
    "SMatrixAtE",
    "SpatialPotential",
    "TemporalPotential",
    "TwoSpinParams",
    "analytic_unitary",
    "apply_map",
    "build_report",
    "build_two_spin",
    "choi_matrix",
    "classify_regime",
    "collision_unitary",
    "cptp_check",
    "energy_change",
    "entropy_change",
    "gaussian_mixed",
    "gaussian_pure",
    "magnus_first_order",
    "magnus_second_order_norm",
    "purity",
    "rabi_cycle_lambdas",
    "random_unitary_map",
    "scattering_map_tensor",
    "sector_observables",
    "semiclassical_collision",
    "semiclassical_smatrix",
    "solve_multichannel",
    "tensor_factorize",
    "time_dependent_evolve",
    "time_dependent_propagator",
    "unitarity_defect",
    "unitary_from_generator",
    "von_neumann_entropy",
    "wigner",
]
