import math
from dataclasses import replace

import numpy as np
import pytest

from cascade_entanglement.gaussian import reduce_cm
from cascade_entanglement.model import LinkConfig, sagnac_shift, thermal_occupancy
from cascade_entanglement.presets import OMEGA_M, baseline_scenario, identical_scenario
from cascade_entanglement.scenario import (
    RESULT_COLUMNS,
    Axis,
    apply_axis,
    directional_pair,
    matched_static_baseline,
    revival_coefficient,
    revival_map,
    run_scenario,
    sweep,
)

SHORT_AXIS = Axis.linspace("delta_over_wml", 0.5, 1.3, 41)


def _dark(sc):
    return replace(sc, drive=replace(sc.drive, power=0.0))


def test_zero_power_mechanics_are_thermal_and_unentangled():
    r = run_scenario(_dark(baseline_scenario()), keep_covariance=True)
    nbar = thermal_occupancy(OMEGA_M, 0.1)
    np.testing.assert_allclose(r.covariance[4:, 4:], (nbar + 0.5) * np.eye(4), rtol=1e-10, atol=1e-12)
    assert np.all(r.covariance[:4, 4:] == 0)
    assert r.EN == 0.0


def test_zero_power_correlated_noise_gives_vacuum_thermal_product():
    sc = replace(_dark(baseline_scenario()), correlated_fiber_noise=True)
    r = run_scenario(sc, keep_covariance=True)
    nbar = thermal_occupancy(OMEGA_M, 0.1)
    expected = np.diag([0.5] * 4 + [nbar + 0.5] * 4)
    np.testing.assert_allclose(r.covariance, expected, rtol=1e-10, atol=1e-12)
    assert r.EN == 0.0 and r.physical


def test_zero_power_independent_noise_is_not_vacuum():
    # characterization: with independent port noise the downstream cavity
    # receives the upstream vacuum on top of its own, even with no light
    r = run_scenario(_dark(baseline_scenario()), keep_covariance=True)
    assert r.covariance[2, 2] > 0.9 and r.covariance[0, 2] < -0.3
    assert r.physical is False


def test_static_identical_entangles_only_near_resonance():
    assert run_scenario(identical_scenario(1.0)).EN > 0
    assert run_scenario(identical_scenario(0.5)).EN == 0.0


def test_unstable_result_has_no_entanglement():
    r = run_scenario(baseline_scenario(-1.0))
    assert not r.stable and r.margin > 0
    assert r.EN is None and r.nu_minus is None and r.covariance is None and r.physical is None


def test_result_fields_and_residual():
    r = run_scenario(baseline_scenario(), keep_covariance=True)
    assert r.stable and r.residual < 1e-10
    assert r.EN == pytest.approx(max(0.0, -math.log(2 * r.nu_minus)), abs=0)
    assert r.covariance.shape == (8, 8)
    assert run_scenario(baseline_scenario()).covariance is None


def test_independent_noise_model_violates_uncertainty_bound():
    # characterization of the independent-port noise model: the stable
    # baseline covariance is not a physical quantum state
    r = run_scenario(baseline_scenario(), keep_covariance=True)
    assert r.physical is False
    fixed = run_scenario(replace(baseline_scenario(), correlated_fiber_noise=True))
    assert fixed.physical is True


def test_directional_pair_examples():
    static = directional_pair(identical_scenario(1.0))
    assert abs(static.delta) < 1e-3 * static.left.EN
    spun = directional_pair(baseline_scenario(0.74, spin_l=0.6e6))
    assert spun.left.EN > 0 and spun.right.EN == 0.0
    assert spun.delta == spun.left.EN
    opposite = identical_scenario(1.0, spin_l=0.6e6, spin_r=-0.6e6)
    left = sweep(opposite, [SHORT_AXIS]).columns["EN"]
    right = sweep(opposite.with_direction("right"), [SHORT_AXIS]).columns["EN"]
    assert left.max() > 0
    assert np.abs(left - right).max() < 1e-3 * left.max()


def test_directional_pair_delta_nan_when_unstable():
    pair = directional_pair(baseline_scenario(-1.0))
    assert math.isnan(pair.delta)


def test_single_point_sweep_equals_run_scenario():
    sc = baseline_scenario(spin_l=0.3e6)
    table = sweep(sc, [Axis("delta_over_wml", (0.9,))])
    r = run_scenario(apply_axis(sc, "delta_over_wml", 0.9))
    assert table.n_rows == 1
    assert table.columns["EN"][0] == r.EN and table.columns["N_l"][0] == r.N_l
    assert table.columns["nu_minus"][0] == r.nu_minus


def test_sweep_cells_equal_point_runs_and_are_deterministic():
    sc = baseline_scenario(chi=0.97)
    axes = [Axis.linspace("spin_l", 0, 0.8e6, 3), Axis.linspace("delta_over_wml", 0.6, 1.2, 4)]
    a = sweep(sc, axes)
    b = sweep(sc, axes)
    assert a.shape == (3, 4) and a.n_rows == 12
    for name in a.columns:
        np.testing.assert_array_equal(a.columns[name], b.columns[name])
    k = 0
    for s in axes[0].values:
        for d in axes[1].values:
            r = run_scenario(apply_axis(apply_axis(sc, "spin_l", s), "delta_over_wml", d))
            assert a.columns["EN"][k] == r.EN
            assert a.columns["margin"][k] == r.margin
            k += 1
    assert a.grid("EN").shape == (3, 4)
    assert a.column_names() == ["spin_l", "delta_over_wml", *RESULT_COLUMNS]


def test_parallel_sweep_is_identical_to_serial():
    sc = baseline_scenario(spin_l=0.6e6)
    axes = [Axis.linspace("delta_over_wml", -0.5, 1.4, 24)]
    serial = sweep(sc, axes)
    parallel = sweep(sc, axes, workers=2)
    for name in serial.columns:
        np.testing.assert_array_equal(serial.columns[name], parallel.columns[name])


def test_unstable_rows_are_flagged_not_zeroed():
    table = sweep(baseline_scenario(), [Axis("delta_over_wml", (-1.0, 1.0))])
    stable = table.columns["stable"]
    assert list(stable) == [False, True]
    assert math.isnan(table.columns["EN"][0]) and math.isnan(table.columns["nu_minus"][0])
    # no row reports E_N without the stable flag
    assert np.all(np.isnan(table.columns["EN"][~stable]))
    assert np.all(np.isfinite(table.columns["EN"][stable]))


def test_axis_paths():
    sc = baseline_scenario()
    assert apply_axis(sc, "chi", 0.95).right.omega_m == pytest.approx(0.95 * OMEGA_M)
    assert apply_axis(sc, "chi", 0.95).right.mass == sc.right.mass
    assert apply_axis(sc, "spin_r", -2.0).spin_right.orientation.value == "CW"
    assert apply_axis(sc, "phase", 0.3).link.phase == 0.3
    assert apply_axis(sc, "transmission", 0.3).link.transmission == 0.3
    assert apply_axis(sc, "power", 1e-3).drive.power == 1e-3
    assert apply_axis(sc, "temperature", 1.0).env.temperature == 1.0
    assert apply_axis(sc, "detuning", 5.0).drive.detuning == 5.0
    with pytest.raises(KeyError):
        apply_axis(sc, "mass", 1.0)
    with pytest.raises(KeyError):
        Axis("bogus", (1.0,))
    with pytest.raises(ValueError):
        Axis("chi", ())
    with pytest.raises(ValueError):
        sweep(sc, [])
    assert Axis("chi", (1.0,)).unit == "1"


def test_fizeau_shift_equivalence_without_link():
    # with the fiber cut the first resonator only sees the shifted detuning
    spin = 0.6e6
    sc = replace(baseline_scenario(0.8, spin_l=spin), link=LinkConfig(0.0, 0.0))
    shift = sagnac_shift(sc.left, sc.spin_left, "left")
    static = replace(baseline_scenario(0.8), link=LinkConfig(0.0, 0.0))
    static = replace(static, drive=replace(static.drive, detuning=sc.drive.detuning + shift))
    a = run_scenario(sc, keep_covariance=True)
    b = run_scenario(static, keep_covariance=True)
    # the drive amplitude depends on omega_d, which moves by shift/omega_c ~ 6e-8
    assert a.N_l == pytest.approx(b.N_l, rel=1e-6)
    va = reduce_cm(a.covariance, ("a_l", "b_l")).matrix
    vb = reduce_cm(b.covariance, ("a_l", "b_l")).matrix
    np.testing.assert_allclose(va, vb, rtol=1e-6, atol=1e-9)
    assert a.EN == b.EN == 0.0


def test_revival_of_baseline_is_one():
    sc = baseline_scenario()
    res = revival_coefficient(sc, sc, axis=SHORT_AXIS)
    assert res.ratio == 1.0 and res.numerator == res.denominator


def test_revival_default_baseline_is_static_matched():
    sc = baseline_scenario(spin_l=0.8e6, chi=0.95)
    base = matched_static_baseline(sc)
    assert base.spin_left.angular_velocity == 0 and base.right.omega_m == sc.left.omega_m
    a = revival_coefficient(sc, axis=SHORT_AXIS)
    b = revival_coefficient(sc, base, axis=SHORT_AXIS)
    assert a == b and 0 < a.ratio < 1


def test_revival_rejects_dead_baseline():
    sc = baseline_scenario()
    dead = replace(sc, drive=replace(sc.drive, power=0.0))
    with pytest.raises(ValueError):
        revival_coefficient(sc, dead, axis=SHORT_AXIS)


def test_revival_map_columns():
    sc = baseline_scenario(1.0, "right")
    table = revival_map(sc, [Axis("chi", (0.95, 1.0)), Axis("spin_l", (0.0, 0.5e6))],
                        baseline_axis=SHORT_AXIS)
    for name in ("revival", "revival_opposite", "baseline_peak", "baseline_peak_opposite"):
        assert len(table.columns[name]) == 4
    peak = table.columns["baseline_peak"][0]
    np.testing.assert_array_equal(table.columns["revival"], table.columns["EN"] / peak)
    same = revival_coefficient(sc, matched_static_baseline(sc), axis=SHORT_AXIS)
    assert peak == same.denominator
