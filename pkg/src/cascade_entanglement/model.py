"""
Physical parameters of the two-resonator cascade and their closed-form derived
quantities: rotation-induced (Sagnac/Fizeau) resonance shift, single-photon
optomechanical coupling, drive amplitude, thermal phonon occupancy and the
effective optical detunings.

SI units throughout; every frequency and rate is an angular frequency in rad/s.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from scipy import constants

from .exceptions import ConfigError

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c

__all__ = [
    "Direction",
    "Orientation",
    "ResonatorParams",
    "SpinConfig",
    "LinkConfig",
    "DriveConfig",
    "Environment",
    "Scenario",
    "sagnac_shift",
    "single_photon_coupling",
    "drive_amplitude",
    "thermal_occupancy",
    "effective_detunings",
]


class Direction(str, enum.Enum):
    """Side of the fiber the drive laser enters from."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> "Direction":
        return Direction.RIGHT if self is Direction.LEFT else Direction.LEFT


class Orientation(str, enum.Enum):
    CCW = "CCW"
    CW = "CW"
    STATIC = "static"


@dataclass(frozen=True)
class ResonatorParams:
    """Optical and mechanical constants of one whispering-gallery resonator.

    Give either ``wavelength`` or ``omega_c``; the other is derived
    (``omega_c = 2 pi c / wavelength``).  ``dn_dlambda`` is in 1/m.
    """

    refractive_index: float
    radius: float
    mass: float
    kappa_0: float
    kappa_ex: float
    omega_m: float
    gamma_m: float
    wavelength: float | None = None
    omega_c: float | None = None
    dn_dlambda: float = 0.0

    def __post_init__(self):
        if self.wavelength is None and self.omega_c is None:
            raise ConfigError("one of wavelength or omega_c is required", "wavelength")
        if self.wavelength is None:
            _positive(self.omega_c, "omega_c")
            object.__setattr__(self, "wavelength", 2 * math.pi * C_LIGHT / self.omega_c)
        elif self.omega_c is None:
            _positive(self.wavelength, "wavelength")
            object.__setattr__(self, "omega_c", 2 * math.pi * C_LIGHT / self.wavelength)
        else:
            _positive(self.wavelength, "wavelength")
            _positive(self.omega_c, "omega_c")
            expected = 2 * math.pi * C_LIGHT / self.wavelength
            if abs(self.omega_c - expected) > 1e-12 * expected:
                raise ConfigError(
                    f"omega_c={self.omega_c!r} inconsistent with wavelength "
                    f"(expected {expected!r})",
                    "omega_c",
                )
        for name in ("radius", "mass", "kappa_0", "kappa_ex", "omega_m", "gamma_m"):
            _positive(getattr(self, name), name)
        if not self.refractive_index > 1:
            raise ConfigError(f"must be > 1, got {self.refractive_index!r}", "refractive_index")
        if not math.isfinite(self.dn_dlambda):
            raise ConfigError("must be finite", "dn_dlambda")

    @property
    def total_decay(self) -> float:
        """Total optical energy decay rate kappa_0 + kappa_ex."""
        return self.kappa_0 + self.kappa_ex

    def with_mechanical_frequency(self, omega_m: float) -> "ResonatorParams":
        return replace(self, omega_m=omega_m)


@dataclass(frozen=True)
class SpinConfig:
    angular_velocity: float = 0.0
    orientation: Orientation = Orientation.STATIC

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not (math.isfinite(self.angular_velocity) and self.angular_velocity >= 0):
            raise ConfigError(
                f"must be finite and >= 0, got {self.angular_velocity!r}", "angular_velocity"
            )
        if (self.orientation is Orientation.STATIC) != (self.angular_velocity == 0):
            raise ConfigError(
                "orientation must be 'static' exactly when the angular velocity is zero",
                "orientation",
            )

    @classmethod
    def from_signed(cls, omega: float) -> "SpinConfig":
        """Positive values spin CCW, negative values CW, zero is static."""
        if omega > 0:
            return cls(omega, Orientation.CCW)
        if omega < 0:
            return cls(-omega, Orientation.CW)
        return cls()

    @property
    def signed(self) -> float:
        if self.orientation is Orientation.CW:
            return -self.angular_velocity
        return self.angular_velocity


@dataclass(frozen=True)
class LinkConfig:
    """Fiber between the resonators: power transmission and propagation phase."""

    transmission: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.transmission <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.transmission!r}", "transmission")
        if not math.isfinite(self.phase):
            raise ConfigError("must be finite", "phase")

    @classmethod
    def from_fiber(cls, length, refractive_index, wavelength, transmission=1.0):
        return cls(transmission, 2 * math.pi * refractive_index * length / wavelength)


@dataclass(frozen=True)
class DriveConfig:
    """Single-tone drive.

    ``detuning`` is the bare cavity-drive detuning omega_c - omega_d shared by
    both resonators.  ``phase`` is the global drive phase; no observable
    depends on it.
    """

    direction: Direction
    power: float
    detuning: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if not (math.isfinite(self.power) and self.power >= 0):
            raise ConfigError(f"must be finite and >= 0, got {self.power!r}", "power")
        if not math.isfinite(self.detuning):
            raise ConfigError("must be finite", "detuning")


@dataclass(frozen=True)
class Environment:
    temperature: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise ConfigError(f"must be finite and >= 0, got {self.temperature!r}", "temperature")


@dataclass(frozen=True)
class Scenario:
    """One complete experiment configuration.

    With ``radiation_pressure_shift`` set, the steady-state solver iterates the
    mean-field mechanical displacement shift of each cavity detuning to self
    consistency instead of neglecting it.

    By default each cavity's external port sees its own independent vacuum
    noise (diagonal diffusion matrix).  ``correlated_fiber_noise`` instead
    feeds the second cavity with the vacuum noise reflected off the first one
    through the fiber, which keeps the linearized state within the
    uncertainty bound.
    """

    left: ResonatorParams
    right: ResonatorParams
    drive: DriveConfig
    spin_left: SpinConfig = field(default_factory=SpinConfig)
    spin_right: SpinConfig = field(default_factory=SpinConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    env: Environment = field(default_factory=Environment)
    radiation_pressure_shift: bool = False
    correlated_fiber_noise: bool = False

    def resonator(self, side: str) -> ResonatorParams:
        return self.left if side == "l" else self.right

    def spin(self, side: str) -> SpinConfig:
        return self.spin_left if side == "l" else self.spin_right

    @property
    def drive_frequency(self) -> float:
        # the shared detuning is referenced to the left resonance
        return self.left.omega_c - self.drive.detuning

    def with_direction(self, direction) -> "Scenario":
        return replace(self, drive=replace(self.drive, direction=Direction(direction)))

    def mirrored(self) -> "Scenario":
        """Swap the physical roles of the two resonators (and their spins)."""
        return replace(
            self,
            left=self.right,
            right=self.left,
            spin_left=self.spin_right,
            spin_right=self.spin_left,
        )


def _positive(value, name):
    if value is None or not (math.isfinite(value) and value > 0):
        raise ConfigError(f"must be finite and > 0, got {value!r}", name)


def sagnac_shift(res: ResonatorParams, spin: SpinConfig, direction) -> float:
    """Signed rotation-induced shift of the driven optical mode (rad/s).

    Positive for a CCW-spinning resonator probed from the left (or CW from the
    right); the sign flips for the other two combinations.
    """
    if spin.orientation is Orientation.STATIC:
        return 0.0
    direction = Direction(direction)
    same_sense = (spin.orientation is Orientation.CCW) == (direction is Direction.LEFT)
    sign = 1.0 if same_sense else -1.0
    n = res.refractive_index
    dispersion = 1.0 - 1.0 / n**2 - (res.wavelength / n) * res.dn_dlambda
    return sign * spin.angular_velocity * (n * res.radius * res.omega_c / C_LIGHT) * dispersion


def single_photon_coupling(res: ResonatorParams) -> float:
    """g0 = (omega_c / R) * sqrt(hbar / (m omega_m))."""
    return (res.omega_c / res.radius) * math.sqrt(HBAR / (res.mass * res.omega_m))


def drive_amplitude(drive: DriveConfig, omega_c: float) -> float:
    """Real, nonnegative drive amplitude sqrt(P / (hbar omega_d)) in 1/sqrt(s)."""
    omega_d = omega_c - drive.detuning
    if omega_d <= 0:
        raise ConfigError(f"drive frequency must be positive, got {omega_d!r}", "detuning")
    return math.sqrt(drive.power / (HBAR * omega_d))


def thermal_occupancy(omega_m: float, temperature: float) -> float:
    """Bose-Einstein occupancy of a mode at ``omega_m`` in a bath at ``temperature``."""
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega_m / (K_B * temperature))


def effective_detunings(sc: Scenario, mechanical_shift=(0.0, 0.0)) -> tuple[float, float]:
    """Effective detunings (left, right) seen by the driven optical modes.

    ``mechanical_shift`` holds the optional radiation-pressure corrections
    g0_j (beta_j* + beta_j), subtracted from the bare detuning.
    """
    direction = sc.drive.direction
    shift_l = sagnac_shift(sc.left, sc.spin_left, direction)
    shift_r = sagnac_shift(sc.right, sc.spin_right, direction)
    return (
        sc.drive.detuning - mechanical_shift[0] + shift_l,
        sc.drive.detuning - mechanical_shift[1] + shift_r,
    )
