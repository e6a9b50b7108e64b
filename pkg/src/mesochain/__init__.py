"""Mesoscale averaging and deconvolution closure for 1D particle chains."""

from .averaging import (
    average_density,
    average_momentum,
    average_velocity,
    exact_convective_stress,
    exact_interaction_stress,
    exact_micro_fields,
)
from .chain import (
    ChainState,
    GranularGaussian,
    GranularSine,
    LJDeterministic,
    LJNoisy,
    advance,
    init_positions,
    initial_velocities,
    total_energy,
    total_forces,
    total_momentum,
    verlet_step,
)
from .closure import (
    Reconstruction,
    balance_residuals,
    closed_convective_stress,
    closed_interaction_stress,
    reconstruct,
    reconstruction_from_fields,
)
from .deconvolution import (
    ConditionReport,
    ConvolutionOperator,
    assemble_operator,
    condition_report,
    landweber_solve,
    min_norm_solve,
    tikhonov_solve,
)
from .errors import (
    ConfigError,
    NumericalError,
    OrderingError,
    ReconstructionError,
    VacuumError,
)
from .kernel import WindowKernel
from .meshes import Field, Mesh
from .potentials import (
    Granular,
    LennardJones,
    pair_force,
    potential_deriv,
    potential_energy,
)

__version__ = "0.1.0"
