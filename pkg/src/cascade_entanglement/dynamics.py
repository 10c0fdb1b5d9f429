"""
Linearized quadrature dynamics du/dt = A u + v.

The quadrature vector is always ordered by physical label,

    u = (X_l, Y_l, X_r, Y_r, q_l, p_l, q_r, p_r),

independent of the drive direction; only the position of the one-way fiber
coupling block depends on which resonator is driven first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .model import Scenario, thermal_occupancy
from .steadystate import SteadyState, cascade_order, linearized_couplings, solve_steady_state

QUADRATURES = ("X_l", "Y_l", "X_r", "Y_r", "q_l", "p_l", "q_r", "p_r")
OPTICAL = {"l": 0, "r": 2}
MECHANICAL = {"l": 4, "r": 6}

__all__ = [
    "QUADRATURES",
    "LinearSystem",
    "drift_matrix",
    "diffusion_matrix",
    "stability",
    "linear_system",
]


@dataclass(frozen=True)
class LinearSystem:
    drift: np.ndarray
    diffusion: np.ndarray
    margin: float

    @property
    def is_stable(self) -> bool:
        return self.margin < 0

    def labeled_rows(self, which: str = "drift"):
        """Yield ``(label, row)`` pairs of the drift or diffusion matrix."""
        mat = self.drift if which == "drift" else self.diffusion
        for label, row in zip(QUADRATURES, mat):
            yield label, row


def drift_matrix(sc: Scenario, ss: SteadyState) -> np.ndarray:
    A = np.zeros((8, 8))
    couplings = linearized_couplings(sc, ss)
    for side in ("l", "r"):
        res = sc.resonator(side)
        o, m = OPTICAL[side], MECHANICAL[side]
        det = ss.detuning(side)
        lam_re, lam_im = couplings[side]

        A[o, o] = A[o + 1, o + 1] = -res.total_decay / 2
        A[o, o + 1] = det
        A[o + 1, o] = -det
        A[o, m] = -lam_im
        A[o + 1, m] = lam_re

        A[m, m] = A[m + 1, m + 1] = -res.gamma_m / 2
        A[m, m + 1] = res.omega_m
        A[m + 1, m] = -res.omega_m
        A[m + 1, o] = lam_re
        A[m + 1, o + 1] = lam_im

    first, second = cascade_order(sc.drive.direction)
    rate = math.sqrt(
        sc.link.transmission * sc.resonator(first).kappa_ex * sc.resonator(second).kappa_ex
    )
    jc, js = rate * math.cos(sc.link.phase), rate * math.sin(sc.link.phase)
    s, f = OPTICAL[second], OPTICAL[first]
    A[s:s + 2, f:f + 2] = [[-jc, js], [-js, -jc]]
    return A


def diffusion_matrix(sc: Scenario) -> np.ndarray:
    """Diffusion matrix: vacuum optical baths, thermal mechanical baths.

    Diagonal unless ``sc.correlated_fiber_noise`` is set, in which case the
    optical block coupling the two cavities carries the shared fiber noise
    sqrt(eta kex_1 kex_2)/2 * R(phi).
    """
    diag = []
    for side in ("l", "r"):
        gamma = sc.resonator(side).total_decay
        diag += [gamma, gamma]
    for side in ("l", "r"):
        res = sc.resonator(side)
        nbar = thermal_occupancy(res.omega_m, sc.env.temperature)
        diag += [res.gamma_m * (2 * nbar + 1)] * 2
    D = 0.5 * np.diag(diag)
    if sc.correlated_fiber_noise:
        first, second = cascade_order(sc.drive.direction)
        c = 0.5 * math.sqrt(
            sc.link.transmission * sc.resonator(first).kappa_ex * sc.resonator(second).kappa_ex
        )
        cos, sin = math.cos(sc.link.phase), math.sin(sc.link.phase)
        block = c * np.array([[cos, -sin], [sin, cos]])
        s, f = OPTICAL[second], OPTICAL[first]
        D[s:s + 2, f:f + 2] = block
        D[f:f + 2, s:s + 2] = block.T
    return D


def stability(A) -> tuple[bool, float]:
    """Stability verdict and margin max Re(eig(A)) (rad/s)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    try:
        eig = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise NumericalError("eigenvalue computation returned non-finite values")
    margin = float(eig.real.max())
    return margin < 0, margin


def linear_system(sc: Scenario, ss: SteadyState | None = None) -> LinearSystem:
    if ss is None:
        ss = solve_steady_state(sc)
    A = drift_matrix(sc, ss)
    _, margin = stability(A)
    return LinearSystem(A, diffusion_matrix(sc), margin)
