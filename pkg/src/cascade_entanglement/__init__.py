"""Nonreciprocal mechanical entanglement in cascaded spinning optomechanical resonators."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    CascadeError,
    ConfigError,
    NonPhysicalStateError,
    NumericalError,
    UnstableDynamicsError,
)
from .model import (  # noqa: E402
    Direction,
    DriveConfig,
    Environment,
    LinkConfig,
    Orientation,
    ResonatorParams,
    Scenario,
    SpinConfig,
    drive_amplitude,
    effective_detunings,
    sagnac_shift,
    single_photon_coupling,
    thermal_occupancy,
)
from .steadystate import SteadyState, linearized_couplings, solve_steady_state  # noqa: E402
from .dynamics import LinearSystem, diffusion_matrix, drift_matrix, linear_system, stability  # noqa: E402
from .gaussian import (  # noqa: E402
    log_negativity,
    physicality_check,
    reduce_cm,
    solve_lyapunov,
    symplectic_min_eigenvalue,
    wigner_density,
    wigner_projection,
)
from .scenario import (  # noqa: E402
    Axis,
    directional_pair,
    revival_coefficient,
    revival_map,
    run_scenario,
    sweep,
)
