"""
Frozen parameter sets for the figure reproductions.

Spin rates written as "MHz" are angular velocities in units of 1e6 rad/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from types import MappingProxyType

from .model import (
    Direction,
    DriveConfig,
    Environment,
    LinkConfig,
    ResonatorParams,
    Scenario,
    SpinConfig,
)
from .scenario import Axis

TWO_PI = 2 * math.pi
MHZ_RAD = 1e6

OMEGA_M = TWO_PI * 88.54e6

LEFT_RESONATOR = ResonatorParams(
    refractive_index=1.48,
    radius=36e-6,
    mass=15e-12,
    wavelength=780e-9,
    kappa_0=TWO_PI * 15e6,
    kappa_ex=TWO_PI * 27e6,
    omega_m=OMEGA_M,
    gamma_m=TWO_PI * 2.2e3,
)
RIGHT_RESONATOR = replace(LEFT_RESONATOR, kappa_ex=TWO_PI * 30e6)


def baseline_scenario(delta_over_wml: float = 1.0, direction=Direction.LEFT,
                      spin_l: float = 0.0, spin_r: float = 0.0, chi: float = 1.0) -> Scenario:
    """Cascade with the reference parameters (kappa_ex = 27 / 30 MHz x 2 pi)."""
    return Scenario(
        left=LEFT_RESONATOR,
        right=RIGHT_RESONATOR.with_mechanical_frequency(chi * OMEGA_M),
        drive=DriveConfig(Direction(direction), 20e-3, delta_over_wml * OMEGA_M),
        spin_left=SpinConfig.from_signed(spin_l),
        spin_right=SpinConfig.from_signed(spin_r),
        link=LinkConfig(1.0, 0.0),
        env=Environment(0.1),
    )


def identical_scenario(delta_over_wml: float = 1.0, direction=Direction.LEFT,
                       spin_l: float = 0.0, spin_r: float = 0.0) -> Scenario:
    """Mirror-symmetric cascade: the right resonator is a copy of the left one."""
    sc = baseline_scenario(delta_over_wml, direction, spin_l, spin_r)
    return replace(sc, right=LEFT_RESONATOR)


@dataclass(frozen=True)
class FigurePreset:
    """A named, immutable figure configuration.

    ``kind`` is ``"curves"`` (E_N vs detuning for both directions, one block
    per ``chi`` value), ``"revival_map"`` or ``"wigner"``.
    """

    name: str
    kind: str
    scenario: Scenario
    description: str
    chis: tuple[float, ...] = (1.0,)
    axes: tuple[Axis, ...] = ()

    def derive(self, **overrides) -> "FigurePreset":
        """Copy with overrides; the result is renamed so it cannot pass for the preset."""
        return replace(self, name=f"{self.name}-custom", **overrides)


def _detuning_axis(n=401):
    return (Axis.linspace("delta_over_wml", 0.4, 1.4, n),)


def _build():
    p = {}
    p["fig1b"] = FigurePreset(
        "fig1b", "curves", baseline_scenario(), "static resonators, chi = 1",
        axes=_detuning_axis())
    p["fig1c"] = FigurePreset(
        "fig1c", "curves", baseline_scenario(spin_l=0.6 * MHZ_RAD),
        "left resonator spinning CCW at 0.6e6 rad/s, chi = 1", axes=_detuning_axis())
    p["fig1d"] = FigurePreset(
        "fig1d", "curves", baseline_scenario(spin_l=0.6 * MHZ_RAD, spin_r=0.6 * MHZ_RAD),
        "both resonators spinning CCW at 0.6e6 rad/s, chi = 1", axes=_detuning_axis())
    p["fig2a"] = FigurePreset(
        "fig2a", "curves", baseline_scenario(), "static, frequency mismatch",
        chis=(1.0, 0.97, 0.95), axes=_detuning_axis())
    p["fig2b"] = FigurePreset(
        "fig2b", "curves", baseline_scenario(spin_l=0.8 * MHZ_RAD, spin_r=0.8 * MHZ_RAD),
        "both spinning CCW at 0.8e6 rad/s, frequency mismatch",
        chis=(1.0, 0.97, 0.95), axes=_detuning_axis())
    p["fig2cd"] = FigurePreset(
        "fig2cd", "curves", baseline_scenario(spin_l=0.8 * MHZ_RAD),
        "left spinning CCW at 0.8e6 rad/s, frequency mismatch",
        chis=(0.97, 0.95), axes=_detuning_axis())
    p["fig2e"] = FigurePreset(
        "fig2e", "revival_map", baseline_scenario(1.0, Direction.RIGHT),
        "revival vs (chi, spin_l), right input, delta/omega_m = 1",
        axes=(Axis.linspace("chi", 0.9, 1.0, 101),
              Axis.linspace("spin_l", 0.0, 1.0 * MHZ_RAD, 101)))
    # mechanical frequency ratio chi = 0.97 (not a fiber transmission)
    p["fig2f"] = FigurePreset(
        "fig2f", "revival_map", baseline_scenario(0.68, Direction.LEFT, chi=0.97),
        "revival vs (spin_l, spin_r), left input, chi = 0.97, delta/omega_m = 0.68",
        axes=(Axis.linspace("spin_l", 0.0, 1.0 * MHZ_RAD, 101),
              Axis.linspace("spin_r", 0.0, 1.0 * MHZ_RAD, 101)))
    p["fig3"] = FigurePreset(
        "fig3", "wigner", baseline_scenario(0.68, Direction.LEFT, spin_l=0.8 * MHZ_RAD, chi=0.95),
        "mechanical Wigner projections, chi = 0.95, delta/omega_m = 0.68")
    return MappingProxyType(p)


FIGURES = _build()
