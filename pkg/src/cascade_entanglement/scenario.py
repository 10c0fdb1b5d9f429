"""
End-to-end evaluation of scenarios: steady state -> linear dynamics ->
covariance -> mechanical entanglement, plus parameter sweeps, direction
comparisons and the revival coefficient.
"""
from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import diffusion_matrix, drift_matrix, stability
from .gaussian import (
    IllConditionedWarning,
    log_negativity,
    physicality_check,
    reduce_cm,
    solve_lyapunov,
)
from .model import Direction, Scenario, SpinConfig
from .steadystate import solve_steady_state

__all__ = [
    "ScenarioResult",
    "DirectionalPair",
    "Axis",
    "SweepTable",
    "RevivalResult",
    "AXIS_PATHS",
    "apply_axis",
    "run_scenario",
    "directional_pair",
    "sweep",
    "matched_static_baseline",
    "revival_coefficient",
    "revival_map",
    "DEFAULT_DETUNING_AXIS",
]

# Minimum baseline entanglement for a revival ratio to be defined.
BASELINE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScenarioResult:
    """Outcome of one pipeline run.

    For unstable scenarios ``nu_minus``, ``log_negativity`` and ``covariance``
    are ``None``; nothing is reported as a silent zero.  ``physical`` tells
    whether the full covariance satisfies the uncertainty bound; E_N is
    reported either way.
    """

    scenario: Scenario
    N_l: float
    N_r: float
    stable: bool
    margin: float
    nu_minus: float | None = None
    log_negativity: float | None = None
    physical: bool | None = None
    residual: float | None = None
    covariance: np.ndarray | None = None
    notes: tuple[str, ...] = ()

    @property
    def EN(self) -> float | None:
        return self.log_negativity


def run_scenario(sc: Scenario, keep_covariance: bool = False) -> ScenarioResult:
    ss = solve_steady_state(sc)
    A = drift_matrix(sc, ss)
    stable, margin = stability(A)
    if not stable:
        return ScenarioResult(sc, ss.N_l, ss.N_r, False, margin)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        cm = solve_lyapunov(A, diffusion_matrix(sc))
    ent = log_negativity(reduce_cm(cm.matrix, ("b_l", "b_r")).matrix, strict=False)
    return ScenarioResult(
        sc,
        ss.N_l,
        ss.N_r,
        True,
        margin,
        nu_minus=ent.nu_minus,
        log_negativity=ent.log_negativity,
        physical=physicality_check(cm.matrix),
        residual=cm.residual / np.abs(diffusion_matrix(sc)).max(),
        covariance=cm.matrix if keep_covariance else None,
        notes=cm.notes,
    )


@dataclass(frozen=True)
class DirectionalPair:
    left: ScenarioResult
    right: ScenarioResult

    @property
    def delta(self) -> float:
        """E_N(left) - E_N(right); NaN if either direction is unstable."""
        if self.left.log_negativity is None or self.right.log_negativity is None:
            return math.nan
        return self.left.log_negativity - self.right.log_negativity


def directional_pair(sc: Scenario, keep_covariance: bool = False) -> DirectionalPair:
    return DirectionalPair(
        run_scenario(sc.with_direction(Direction.LEFT), keep_covariance),
        run_scenario(sc.with_direction(Direction.RIGHT), keep_covariance),
    )


def _set_detuning(sc, value):
    return replace(sc, drive=replace(sc.drive, detuning=value))


def _set_chi(sc, value):
    return replace(sc, right=sc.right.with_mechanical_frequency(value * sc.left.omega_m))


AXIS_PATHS = {
    "delta_over_wml": lambda sc, v: _set_detuning(sc, v * sc.left.omega_m),
    "detuning": _set_detuning,
    "spin_l": lambda sc, v: replace(sc, spin_left=SpinConfig.from_signed(v)),
    "spin_r": lambda sc, v: replace(sc, spin_right=SpinConfig.from_signed(v)),
    "chi": _set_chi,
    "phase": lambda sc, v: replace(sc, link=replace(sc.link, phase=v)),
    "transmission": lambda sc, v: replace(sc, link=replace(sc.link, transmission=v)),
    "power": lambda sc, v: replace(sc, drive=replace(sc.drive, power=v)),
    "temperature": lambda sc, v: replace(sc, env=replace(sc.env, temperature=v)),
}

AXIS_UNITS = {
    "delta_over_wml": "1",
    "detuning": "rad/s",
    "spin_l": "rad/s",
    "spin_r": "rad/s",
    "chi": "1",
    "phase": "rad",
    "transmission": "1",
    "power": "W",
    "temperature": "K",
}


def apply_axis(sc: Scenario, path: str, value: float) -> Scenario:
    """Return ``sc`` with the field named by ``path`` set to ``value``.

    ``spin_l``/``spin_r`` take signed angular velocities (positive = CCW);
    ``chi`` sets the right mechanical frequency to chi times the left one,
    holding mass and damping fixed.
    """
    try:
        setter = AXIS_PATHS[path]
    except KeyError:
        raise KeyError(f"unknown sweep parameter {path!r}; expected one of {sorted(AXIS_PATHS)}") from None
    return setter(sc, float(value))


@dataclass(frozen=True)
class Axis:
    path: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.path not in AXIS_PATHS:
            raise KeyError(f"unknown sweep parameter {self.path!r}; expected one of {sorted(AXIS_PATHS)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError(f"axis {self.path!r} has no values")

    @classmethod
    def linspace(cls, path, start, stop, num):
        return cls(path, tuple(np.linspace(start, stop, int(num))))

    @property
    def unit(self) -> str:
        return AXIS_UNITS[self.path]

    def __len__(self):
        return len(self.values)


RESULT_COLUMNS = ("N_l", "N_r", "stable", "margin", "nu_minus", "EN", "physical", "residual")


@dataclass
class SweepTable:
    """Columnar sweep output; rows in C order (first axis varies slowest)."""

    axes: tuple[Axis, ...]
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def grid(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name]).reshape(self.shape)

    def column_names(self) -> list[str]:
        return list(self.columns)


def _evaluate(sc: Scenario):
    r = run_scenario(sc)
    if not r.stable:
        return (r.N_l, r.N_r, False, r.margin, math.nan, math.nan, False, math.nan)
    return (r.N_l, r.N_r, True, r.margin, r.nu_minus, r.log_negativity, r.physical, r.residual)


def _grid_scenarios(sc, axes):
    for point in itertools.product(*(a.values for a in axes)):
        out = sc
        for axis, value in zip(axes, point):
            out = apply_axis(out, axis.path, value)
        yield point, out


def sweep(sc: Scenario, axes, workers: int = 1) -> SweepTable:
    """Evaluate ``run_scenario`` on the Cartesian grid spanned by ``axes``.

    Unstable points are kept: ``stable`` is False and ``nu_minus``/``EN`` are NaN.
    With ``workers > 1`` points are evaluated in a process pool; the output
    order (and every value) is identical to the serial result.
    """
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ValueError(f"expected 1 or 2 axes, got {len(axes)}")
    points, scenarios = zip(*_grid_scenarios(sc, axes))
    if workers > 1 and len(scenarios) > 1:
        chunk = max(1, len(scenarios) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate, scenarios, chunksize=chunk))
    else:
        rows = [_evaluate(s) for s in scenarios]

    columns = {}
    pts = np.array(points, dtype=float)
    for k, axis in enumerate(axes):
        columns[axis.path] = pts[:, k]
    data = list(zip(*rows))
    for name, values in zip(RESULT_COLUMNS, data):
        dtype = bool if name in ("stable", "physical") else float
        columns[name] = np.array(values, dtype=dtype)
    return SweepTable(axes, columns)


DEFAULT_DETUNING_AXIS = Axis.linspace("delta_over_wml", 0.4, 1.4, 401)


def matched_static_baseline(sc: Scenario) -> Scenario:
    """Same scenario with both resonators static and chi = 1."""
    return replace(
        _set_chi(sc, 1.0),
        spin_left=SpinConfig(),
        spin_right=SpinConfig(),
    )


@dataclass(frozen=True)
class RevivalResult:
    numerator: float
    denominator: float
    ratio: float
    numerator_at: float
    denominator_at: float


def _peak(table: SweepTable):
    en = np.where(table.columns["stable"], table.columns["EN"], -np.inf)
    k = int(np.argmax(en))
    path = table.axes[0].path
    return float(en[k]), float(table.columns[path][k])


def revival_coefficient(mismatched: Scenario, baseline: Scenario | None = None,
                        axis: Axis = DEFAULT_DETUNING_AXIS, workers: int = 1) -> RevivalResult:
    """Peak E_N of ``mismatched`` over ``axis`` divided by the baseline peak.

    The baseline defaults to ``matched_static_baseline(mismatched)`` with the
    same drive direction.
    """
    if baseline is None:
        baseline = matched_static_baseline(mismatched)
    num, num_at = _peak(sweep(mismatched, [axis], workers))
    den, den_at = _peak(sweep(baseline, [axis], workers))
    if not den > BASELINE_FLOOR:
        raise ValueError(f"baseline peak entanglement {den!r} is not above {BASELINE_FLOOR}")
    return RevivalResult(num, den, num / den, num_at, den_at)


def revival_map(sc: Scenario, axes, baseline: Scenario | None = None,
                baseline_axis: Axis = DEFAULT_DETUNING_AXIS, workers: int = 1) -> SweepTable:
    """Sweep ``sc`` over ``axes`` and add revival columns.

    ``revival`` divides each point's E_N by the baseline peak (over
    ``baseline_axis``) for the same drive direction, ``revival_opposite`` by
    the baseline peak for the opposite direction.  Baseline peaks are stored
    in the ``baseline_peak`` / ``baseline_peak_opposite`` columns.
    """
    if baseline is None:
        baseline = matched_static_baseline(sc)
    table = sweep(sc, axes, workers)
    direction = sc.drive.direction
    peaks = {}
    for key, d in (("same", direction), ("opposite", direction.opposite)):
        peaks[key], _ = _peak(sweep(baseline.with_direction(d), [baseline_axis], workers))
        if not peaks[key] > BASELINE_FLOOR:
            raise ValueError(f"baseline peak entanglement {peaks[key]!r} is not above {BASELINE_FLOOR}")
    en = table.columns["EN"]
    n = len(en)
    table.columns["revival"] = en / peaks["same"]
    table.columns["revival_opposite"] = en / peaks["opposite"]
    table.columns["baseline_peak"] = np.full(n, peaks["same"])
    table.columns["baseline_peak_opposite"] = np.full(n, peaks["opposite"])
    return table
