"""One-dimensional Dirac quantum cellular automaton and its deformed kinematics."""

from .engine import (
    LatticeState,
    PositiveBranchProjection,
    SpectralAmplitude,
    UnitaryAtK,
    amplitude_norm,
    boost_state,
    brillouin_grid,
    eigensystem,
    embed_positive_branch,
    evolve_amplitude,
    evolve_direct,
    evolve_spectral,
    localized_state,
    position_density,
    project_positive_branch,
    step_backend,
    step_direct,
)
from .kinematics import (
    Boost,
    MassParam,
    OnShellPoint,
    PseudoEnergyMomentum,
    Region,
    deformed_boost,
    delinearize,
    dispersion,
    group_velocity,
    invariant_measure,
    linearize,
    linearize_jacobian,
    region_of,
    standard_boost,
    velocity_composition,
)

__version__ = "0.1.0"
