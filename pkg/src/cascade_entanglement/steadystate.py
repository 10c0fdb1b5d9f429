"""
Classical mean-field steady state of the unidirectional cascade.

The drive enters the first resonator in cascade order; the field leaving it
travels through the fiber (transmission eta, phase phi) and drives the second.
For a left input the order is (l, r), for a right input (r, l).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import NumericalError
from .model import (
    Direction,
    Scenario,
    drive_amplitude,
    effective_detunings,
    single_photon_coupling,
)

__all__ = [
    "SteadyState",
    "cascade_order",
    "solve_steady_state",
    "linearized_couplings",
    "integrate_mean_values",
]


def cascade_order(direction) -> tuple[str, str]:
    """Physical labels of the (first, second) resonators for a drive direction."""
    return ("l", "r") if Direction(direction) is Direction.LEFT else ("r", "l")


@dataclass(frozen=True)
class SteadyState:
    alpha_first: complex
    alpha_second: complex
    beta_first: complex
    beta_second: complex
    order: tuple[str, str]
    # effective detunings actually used, by physical label
    detuning_l: float
    detuning_r: float
    iterations: int = 0

    def alpha(self, side: str) -> complex:
        return self.alpha_first if side == self.order[0] else self.alpha_second

    def beta(self, side: str) -> complex:
        return self.beta_first if side == self.order[0] else self.beta_second

    def detuning(self, side: str) -> float:
        return self.detuning_l if side == "l" else self.detuning_r

    @property
    def N_first(self) -> float:
        return abs(self.alpha_first) ** 2

    @property
    def N_second(self) -> float:
        return abs(self.alpha_second) ** 2

    @property
    def N_l(self) -> float:
        return abs(self.alpha("l")) ** 2

    @property
    def N_r(self) -> float:
        return abs(self.alpha("r")) ** 2


def _cavity_amplitudes(sc: Scenario, eps: complex, det_l: float, det_r: float):
    first, second = cascade_order(sc.drive.direction)
    res_f, res_s = sc.resonator(first), sc.resonator(second)
    det = {"l": det_l, "r": det_r}
    alpha_f = math.sqrt(res_f.kappa_ex) * eps / (1j * det[first] + res_f.total_decay / 2)
    out_f = eps - math.sqrt(res_f.kappa_ex) * alpha_f
    alpha_s = (
        math.sqrt(sc.link.transmission * res_s.kappa_ex)
        * cmath.exp(1j * sc.link.phase)
        * out_f
        / (1j * det[second] + res_s.total_decay / 2)
    )
    return alpha_f, alpha_s


def _mechanical_amplitude(res, alpha) -> complex:
    g0 = single_photon_coupling(res)
    return 1j * g0 * abs(alpha) ** 2 / (1j * res.omega_m + res.gamma_m / 2)


def solve_steady_state(sc: Scenario, *, max_iter: int = 200) -> SteadyState:
    """Closed-form steady-state amplitudes of both cavities and both mechanics.

    When ``sc.radiation_pressure_shift`` is set, the detunings are corrected by
    the static mechanical displacement and the solution is iterated until the
    detunings change by less than 1e-9 of the left mechanical frequency.
    """
    first, second = cascade_order(sc.drive.direction)
    eps = drive_amplitude(sc.drive, sc.left.omega_c) * cmath.exp(1j * sc.drive.phase)

    shift = (0.0, 0.0)
    det_l, det_r = effective_detunings(sc, shift)
    alpha_f, alpha_s = _cavity_amplitudes(sc, eps, det_l, det_r)
    iterations = 0
    if sc.radiation_pressure_shift:
        tol = 1e-9 * sc.left.omega_m
        for iterations in range(1, max_iter + 1):
            alpha = {first: alpha_f, second: alpha_s}
            shift = tuple(
                2
                * single_photon_coupling(sc.resonator(s))
                * _mechanical_amplitude(sc.resonator(s), alpha[s]).real
                for s in ("l", "r")
            )
            new_l, new_r = effective_detunings(sc, shift)
            converged = max(abs(new_l - det_l), abs(new_r - det_r)) < tol
            det_l, det_r = new_l, new_r
            alpha_f, alpha_s = _cavity_amplitudes(sc, eps, det_l, det_r)
            if converged:
                break
        else:
            raise NumericalError(
                f"radiation-pressure detuning iteration did not converge in {max_iter} steps"
            )

    return SteadyState(
        alpha_first=alpha_f,
        alpha_second=alpha_s,
        beta_first=_mechanical_amplitude(sc.resonator(first), alpha_f),
        beta_second=_mechanical_amplitude(sc.resonator(second), alpha_s),
        order=(first, second),
        detuning_l=det_l,
        detuning_r=det_r,
        iterations=iterations,
    )


def linearized_couplings(sc: Scenario, ss: SteadyState) -> dict[str, tuple[float, float]]:
    """Linearized optomechanical couplings ``{side: (Lambda_re, Lambda_im)}``.

    Lambda_re = 2 g0 Re(alpha), Lambda_im = 2 g0 Im(alpha).
    """
    out = {}
    for side in ("l", "r"):
        g0 = single_photon_coupling(sc.resonator(side))
        alpha = ss.alpha(side)
        out[side] = (2 * g0 * alpha.real, 2 * g0 * alpha.imag)
    return out


def integrate_mean_values(sc: Scenario, t_final: float, y0=None, **solver_kwargs):
    """Integrate the mean-field equations in time (verification aid).

    State vector is ``[alpha_first, alpha_second, beta_first, beta_second]``
    (complex).  Detunings are taken from ``effective_detunings`` and held fixed.
    Returns the ``scipy.integrate.solve_ivp`` result with complex ``y``.
    """
    first, second = cascade_order(sc.drive.direction)
    res_f, res_s = sc.resonator(first), sc.resonator(second)
    det_l, det_r = effective_detunings(sc)
    det = {"l": det_l, "r": det_r}
    eps = drive_amplitude(sc.drive, sc.left.omega_c) * cmath.exp(1j * sc.drive.phase)
    cascade = math.sqrt(sc.link.transmission * res_s.kappa_ex) * cmath.exp(1j * sc.link.phase)
    g_f, g_s = single_photon_coupling(res_f), single_photon_coupling(res_s)

    def rhs(t, y):
        a_f, a_s, b_f, b_s = y
        return np.array([
            -(1j * det[first] + res_f.total_decay / 2) * a_f + math.sqrt(res_f.kappa_ex) * eps,
            -(1j * det[second] + res_s.total_decay / 2) * a_s
            + cascade * (eps - math.sqrt(res_f.kappa_ex) * a_f),
            -(1j * res_f.omega_m + res_f.gamma_m / 2) * b_f + 1j * g_f * abs(a_f) ** 2,
            -(1j * res_s.omega_m + res_s.gamma_m / 2) * b_s + 1j * g_s * abs(a_s) ** 2,
        ])

    if y0 is None:
        y0 = np.zeros(4, dtype=complex)
    solver_kwargs.setdefault("method", "DOP853")
    solver_kwargs.setdefault("rtol", 1e-10)
    solver_kwargs.setdefault("atol", 1e-6)
    return solve_ivp(rhs, (0.0, t_final), np.asarray(y0, dtype=complex), **solver_kwargs)
