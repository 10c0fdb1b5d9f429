"""
Gaussian-state tools: steady-state covariance from the Lyapunov equation,
two-mode entanglement (logarithmic negativity), physicality checks and Wigner
function projections.

Convention: quadratures X = (a + a^dag)/sqrt(2), so the vacuum covariance is
I/2 and the uncertainty bound on every symplectic eigenvalue is 1/2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import QUADRATURES, stability
from .exceptions import NonPhysicalStateError, NumericalError, UnstableDynamicsError

MODES = ("a_l", "a_r", "b_l", "b_r")
PHYSICAL_TOL = 1e-9
RESIDUAL_TOL = 1e-10

__all__ = [
    "MODES",
    "CovarianceMatrix",
    "EntanglementResult",
    "Ellipse",
    "WignerProjection",
    "IllConditionedWarning",
    "solve_lyapunov",
    "lyapunov_residual",
    "reduce_cm",
    "symplectic_eigenvalues",
    "symplectic_min_eigenvalue",
    "log_negativity",
    "physicality_check",
    "wigner_density",
    "wigner_projection",
    "two_mode_squeezed_cm",
]


class IllConditionedWarning(RuntimeWarning):
    """Drift matrix is stable but barely so; the covariance may be inaccurate."""


@dataclass(frozen=True)
class CovarianceMatrix:
    matrix: np.ndarray
    labels: tuple[str, ...]
    residual: float = 0.0
    notes: tuple[str, ...] = ()

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class EntanglementResult:
    nu_minus: float
    log_negativity: float
    bipartition: tuple[str, str] = ("b_l", "b_r")


@dataclass(frozen=True)
class Ellipse:
    """Centered ellipse given by its semi-axes and the major-axis angle (rad)."""

    semi_major: float
    semi_minor: float
    angle: float

    def boundary(self, n=361) -> np.ndarray:
        t = np.linspace(0, 2 * np.pi, n)
        c, s = math.cos(self.angle), math.sin(self.angle)
        rot = np.array([[c, -s], [s, c]])
        return (rot @ np.vstack([self.semi_major * np.cos(t), self.semi_minor * np.sin(t)])).T


@dataclass(frozen=True)
class WignerProjection:
    pair: tuple[int, int]
    marginal: np.ndarray
    x: np.ndarray
    y: np.ndarray
    density: np.ndarray  # indexed [iy, ix]
    contour: Ellipse
    vacuum_radius: float = 1.0
    labels: tuple[str, str] = field(default=("", ""))


def lyapunov_residual(A, V, D) -> float:
    """Max-norm residual of A V + V A^T + D."""
    A, V, D = (np.asarray(m, dtype=float) for m in (A, V, D))
    return float(np.abs(A @ V + V @ A.T + D).max())


def _kron_solve(A, D):
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(A, eye) + np.kron(eye, A)
    rhs = -D.reshape(-1)
    vec = np.linalg.solve(K, rhs)
    # one step of iterative refinement; cheap at n = 8
    vec += np.linalg.solve(K, rhs - K @ vec)
    return vec.reshape(n, n)


def solve_lyapunov(A, D, method: str = "kron", labels=QUADRATURES) -> CovarianceMatrix:
    """Solve A V + V A^T = -D for the steady-state covariance V.

    ``method="kron"`` solves the vectorized n^2 x n^2 system directly;
    ``method="schur"`` uses scipy's Bartels-Stewart solver.  Unstable A is
    rejected; a residual above 1e-10 * max|D| raises ``NumericalError``.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    if A.shape != D.shape or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: A {A.shape}, D {D.shape}")
    stable, margin = stability(A)
    if not stable:
        raise UnstableDynamicsError(margin)

    notes = []
    scale = np.abs(A).max()
    if margin > -1e-6 * scale:
        msg = f"ill-conditioned: stability margin {margin:.3e} vs |A|max {scale:.3e}"
        notes.append(msg)
        warnings.warn(msg, IllConditionedWarning, stacklevel=2)

    try:
        if method == "kron":
            V = _kron_solve(A, D)
        elif method == "schur":
            V = scipy.linalg.solve_continuous_lyapunov(A, -D)
        else:
            raise ValueError(f"unknown method {method!r}")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Lyapunov solve failed: {exc}") from exc
    V = 0.5 * (V + V.T)

    residual = lyapunov_residual(A, V, D)
    bound = RESIDUAL_TOL * max(np.abs(D).max(), np.finfo(float).tiny)
    if not residual < bound:
        raise NumericalError(f"Lyapunov residual {residual:.3e} exceeds {bound:.3e}")
    return CovarianceMatrix(V, tuple(labels), residual, tuple(notes))


def _mode_index(mode) -> int:
    if isinstance(mode, str):
        try:
            return MODES.index(mode)
        except ValueError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None
    if not 0 <= int(mode) < len(MODES) or int(mode) != mode:
        raise ValueError(f"mode index must be an integer in 0..{len(MODES) - 1}, got {mode!r}")
    return int(mode)


def reduce_cm(V, modes=("b_l", "b_r")) -> CovarianceMatrix:
    """Two-mode covariance matrix of the selected modes (in the given order).

    Modes are indices into ``MODES`` = (a_l, a_r, b_l, b_r) or their names;
    the default mechanical pair corresponds to rows (q_l, p_l, q_r, p_r).
    """
    V = np.asarray(V, dtype=float)
    if V.shape != (8, 8):
        raise ValueError(f"expected an 8x8 covariance matrix, got {V.shape}")
    i, j = (_mode_index(m) for m in modes)
    if i == j:
        raise ValueError("the two modes must differ")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    labels = tuple(QUADRATURES[k] for k in idx)
    return CovarianceMatrix(V[np.ix_(idx, idx)].copy(), labels)


def _symplectic_form(n_modes):
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _hermitian_symplectic_spectrum(V):
    """Symplectic eigenvalues via the Hermitian matrix i L^T Omega L (V = L L^T).

    Well conditioned even for degenerate spectra; returns None when V is not
    positive definite.
    """
    try:
        L = np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        return None
    n = V.shape[0]
    eig = np.linalg.eigvalsh(1j * (L.T @ _symplectic_form(n // 2) @ L))
    return np.sort(eig[n // 2:])


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic eigenvalues of V in ascending order (one per mode)."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    if n % 2 or V.shape != (n, n):
        raise ValueError(f"expected an even square matrix, got {V.shape}")
    nu = _hermitian_symplectic_spectrum(0.5 * (V + V.T))
    if nu is not None:
        return nu
    eig = np.abs(np.linalg.eigvals(1j * _symplectic_form(n // 2) @ V))
    return np.sort(eig)[::2]


def physicality_check(V) -> bool:
    """True when every symplectic eigenvalue of V is at least 1/2 (to 1e-9)."""
    V = np.asarray(V, dtype=float)
    if not np.allclose(V, V.T, rtol=1e-12, atol=1e-12 * np.abs(V).max()):
        return False
    nu = _hermitian_symplectic_spectrum(V)
    # a physical covariance is positive definite
    return nu is not None and bool(nu.min() >= 0.5 - PHYSICAL_TOL)


def symplectic_min_eigenvalue(V4, strict: bool = True) -> float:
    """Smallest symplectic eigenvalue of the partial transpose of a 4x4 CM.

    nu^2 = (S - sqrt(S^2 - 4 det V4)) / 2 with S = det A + det B - 2 det C.
    For positive-definite input the same number is obtained from a Hermitian
    eigenproblem, which keeps full precision when the two symplectic
    eigenvalues nearly coincide (the square root of the discriminant loses
    half the digits there).  Indefinite input falls back to the closed form.

    A non-physical V4 raises ``NonPhysicalStateError`` unless ``strict`` is
    False, in which case the value is computed anyway.
    """
    V4 = np.asarray(V4, dtype=float)
    if V4.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got {V4.shape}")
    if strict:
        nu = symplectic_eigenvalues(V4).min()
        if nu < 0.5 - PHYSICAL_TOL:
            raise NonPhysicalStateError(f"symplectic eigenvalue {nu!r} below 1/2")

    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    spectrum = _hermitian_symplectic_spectrum(flip @ (0.5 * (V4 + V4.T)) @ flip)
    if spectrum is not None:
        return float(spectrum[0])

    det_a = np.linalg.det(V4[:2, :2])
    det_b = np.linalg.det(V4[2:, 2:])
    det_c = np.linalg.det(V4[:2, 2:])
    det_v = np.linalg.det(V4)
    sigma = det_a + det_b - 2 * det_c
    disc = sigma**2 - 4 * det_v
    if disc < 0:
        if disc < -1e-12 * max(1.0, sigma**2):
            raise NumericalError(f"negative discriminant {disc!r} in symplectic spectrum")
        disc = 0.0
    return math.sqrt(max(sigma - math.sqrt(disc), 0.0) / 2)


def log_negativity(V4, bipartition=("b_l", "b_r"), strict: bool = True) -> EntanglementResult:
    nu = symplectic_min_eigenvalue(V4, strict)
    en = max(0.0, -math.log(2 * nu)) if nu > 0 else math.inf
    return EntanglementResult(nu, en, tuple(bipartition))


def two_mode_squeezed_cm(r: float) -> np.ndarray:
    """Covariance matrix of a two-mode squeezed vacuum with squeezing r."""
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    V = np.zeros((4, 4))
    V[:2, :2] = V[2:, 2:] = c * np.eye(2)
    V[:2, 2:] = V[2:, :2] = s * np.diag([1.0, -1.0])
    return V


def _gaussian_parts(V):
    V = np.asarray(V, dtype=float)
    det = np.linalg.det(V)
    if not det > 1e-300:
        raise ValueError(f"covariance matrix is singular (det = {det!r})")
    return V, det, np.linalg.inv(V)


def wigner_density(V, psi, normalized: bool = True):
    """Gaussian Wigner function of a zero-mean state at phase-space point(s) ``psi``.

    ``psi`` has shape ``(..., d)``.  With ``normalized=False`` the prefactor
    is 1/(pi^(d/2) sqrt(det V)), i.e. the normalized density times 2^(d/2).
    """
    V, det, inv = _gaussian_parts(V)
    psi = np.asarray(psi, dtype=float)
    d = V.shape[0]
    quad = np.einsum("...i,ij,...j->...", psi, inv, psi)
    base = (2 * np.pi) ** (d / 2) if normalized else np.pi ** (d / 2)
    return np.exp(-0.5 * quad) / (base * math.sqrt(det))


def _ellipse(V2) -> Ellipse:
    # boundary psi^T V2^-1 psi = 2: the 1/e drop of the peak
    evals, evecs = np.linalg.eigh(V2)
    major = evecs[:, 1]
    angle = math.atan2(major[1], major[0]) % math.pi
    return Ellipse(math.sqrt(2 * evals[1]), math.sqrt(2 * evals[0]), angle)


def wigner_projection(V4, pair, n_points: int = 201, extent: float | None = None,
                      labels=None) -> WignerProjection:
    """Marginal Wigner function on the quadrature plane ``pair`` = (i, j).

    Indices are 0-based into V4.  The grid spans +-``extent`` on both axes
    (default: four standard deviations of the wider marginal).
    """
    V4 = np.asarray(V4, dtype=float)
    i, j = pair
    dim = V4.shape[0]
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise ValueError(f"invalid quadrature pair {pair!r} for a {dim}x{dim} matrix")
    V2 = V4[np.ix_([i, j], [i, j])].copy()
    _gaussian_parts(V2)
    if extent is None:
        extent = 4 * math.sqrt(max(V2[0, 0], V2[1, 1]))
    x = np.linspace(-extent, extent, n_points)
    y = np.linspace(-extent, extent, n_points)
    grid = np.stack(np.meshgrid(x, y, indexing="xy"), axis=-1)
    density = wigner_density(V2, grid)
    if labels is None:
        labels = (str(i), str(j))
    return WignerProjection((i, j), V2, x, y, density, _ellipse(V2), 1.0, tuple(labels))
