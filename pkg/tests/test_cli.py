import copy
import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from cascade_entanglement.cli import csv_text, fmt, main, write_outputs
from cascade_entanglement.config import emit_config, parse_config
from cascade_entanglement.exceptions import ConfigError
from cascade_entanglement.presets import baseline_scenario

SCENARIO = {
    "refractive_index": 1.48,
    "radius": {"value": 36, "unit": "um"},
    "mass": {"value": 15, "unit": "ng"},
    "wavelength": {"value": 780, "unit": "nm"},
    "kappa_0": {"value": 15, "unit": "MHz"},
    "kappa_ex_l": {"value": 27, "unit": "MHz"},
    "kappa_ex_r": {"value": 30, "unit": "MHz"},
    "omega_m": {"value": 88.54, "unit": "MHz"},
    "gamma_m": {"value": 2.2, "unit": "kHz"},
    "spin_l": {"value": 0, "unit": "rad/s"},
    "spin_r": {"value": 0, "unit": "rad/s"},
    "direction": "left",
    "power": {"value": 20, "unit": "mW"},
    "delta_over_wml": 1.0,
}


def _config(command="point", **scenario):
    sc = copy.deepcopy(SCENARIO)
    sc.update(scenario)
    return {"command": command, "scenario": sc}


def _text(data):
    return json.dumps(data)


def _write(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


# --- parsing ---------------------------------------------------------------

def test_minimal_config_reproduces_preset():
    got = parse_config(_text(_config())).scenario
    ref = baseline_scenario()
    # 27 * (2 pi 1e6) and 2 pi * 27e6 may differ in the last bit
    for side in ("left", "right"):
        a, b = vars(getattr(got, side)), vars(getattr(ref, side))
        assert a == pytest.approx(b, rel=1e-15)
    assert got.drive.power == ref.drive.power and got.drive.direction == ref.drive.direction
    assert got.drive.detuning == pytest.approx(ref.drive.detuning, rel=1e-15)
    assert got.spin_left == ref.spin_left and got.link == ref.link and got.env == ref.env


def test_mhz_is_converted_to_angular_frequency():
    cfg = parse_config(_text(_config()))
    assert cfg.scenario.left.kappa_ex == pytest.approx(2 * math.pi * 27e6, rel=1e-15)
    assert cfg.scenario.right.kappa_ex == pytest.approx(2 * math.pi * 30e6, rel=1e-15)


def test_mhz_rad_unit_is_one_million_rad_per_s():
    cfg = parse_config(_text(_config(spin_l={"value": 0.6, "unit": "MHz_rad", "orientation": "CCW"})))
    assert cfg.scenario.spin_left.angular_velocity == 0.6e6
    assert cfg.scenario.spin_left.orientation.value == "CCW"


def test_defaults_applied_only_when_absent():
    sc = parse_config(_text(_config())).scenario
    assert sc.link.phase == 0.0 and sc.link.transmission == 1.0
    assert sc.left.dn_dlambda == 0.0 and sc.env.temperature == pytest.approx(0.1)
    sc = parse_config(_text(_config(phase=0.3, transmission=0.5))).scenario
    assert sc.link.phase == 0.3 and sc.link.transmission == 0.5


@pytest.mark.parametrize("override, path", [
    ({"transmission": 1.2}, "transmission"),
    ({"kappa_0": 15}, "kappa_0"),
    ({"kappa_0": {"value": 15}}, "kappa_0"),
    ({"gamma_m": {"value": 2.2, "unit": "ng"}}, "gamma_m"),
    ({"bogus": 1}, "scenario"),
    ({"direction": "up"}, "direction"),
    ({"mass": {"value": -1, "unit": "ng"}}, "mass"),
])
def test_invalid_fields_are_named(override, path):
    with pytest.raises(ConfigError) as err:
        parse_config(_text(_config(**override)))
    assert path in str(err.value)


def test_missing_required_field_is_named():
    data = _config()
    del data["scenario"]["power"]
    with pytest.raises(ConfigError, match="power"):
        parse_config(_text(data))
    data = _config()
    del data["scenario"]["spin_l"]
    with pytest.raises(ConfigError, match="spin_l"):
        parse_config(_text(data))


def test_unknown_top_level_key_rejected():
    data = _config()
    data["extra"] = 1
    with pytest.raises(ConfigError):
        parse_config(_text(data))


def test_round_trip_is_identity():
    data = _config("sweep", spin_l={"value": 0.6, "unit": "MHz_rad", "orientation": "CW"},
                   chi=0.97, phase=0.4, transmission=0.8)
    data["axes"] = [{"path": "delta_over_wml", "start": 0.4, "stop": 1.4, "num": 11},
                    {"path": "spin_r", "values": [0, 1, 2], "unit": "MHz_rad"}]
    first = parse_config(_text(data))
    second = parse_config(emit_config(first))
    assert second == first
    assert emit_config(second) == emit_config(first)


def test_overrides_apply_before_validation():
    cfg = parse_config(_text(_config()), overrides=["scenario.delta_over_wml=0.7",
                                                    "scenario.direction=right"])
    assert cfg.scenario.drive.direction.value == "right"
    assert cfg.scenario.drive.detuning == pytest.approx(0.7 * cfg.scenario.left.omega_m)


# --- emission --------------------------------------------------------------

def test_numbers_round_trip_exactly():
    for v in (0.1, 1 / 3, 2 * math.pi * 27e6, 5e-324, -1.7976931348623157e308):
        assert float(fmt(v)) == v
    assert fmt(np.float64(0.1)) == "0.1"
    assert fmt(True) == "true" and fmt(np.int64(3)) == "3" and fmt(float("nan")) == "nan"


def test_csv_uses_lf_and_header():
    text = csv_text({"a": [1.0, 2.5], "b": [True, False]})
    assert text == "a,b\n1.0,true\n2.5,false\n"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_outputs(tmp_path, {"x.csv": "a\n", "y.json": "{}\n"})
    assert sorted(p.name for p in tmp_path.iterdir()) == ["x.csv", "y.json"]


# --- command line ----------------------------------------------------------

def test_point_success_and_matrix_dump(tmp_path):
    code = main(["point", "--config", str(_write(tmp_path, _config())), "--out", str(tmp_path),
                 "--dump-matrices"])
    assert code == 0
    body = json.loads((tmp_path / "point.json").read_text())
    assert body["tool"] == "cascade-entanglement" and "version" in body
    assert body["result"]["status"] == "stable" and body["result"]["EN"] > 0
    rows = _read_csv(tmp_path / "drift.csv")
    assert rows[0] == ["row", "X_l", "Y_l", "X_r", "Y_r", "q_l", "p_l", "q_r", "p_r"]
    assert len(rows) == 9
    for name in ("diffusion.csv", "covariance.csv"):
        assert (tmp_path / name).exists()


def test_point_unstable_exit_and_record(tmp_path):
    code = main(["point", "--config", str(_write(tmp_path, _config(delta_over_wml=-1.0))),
                 "--out", str(tmp_path)])
    assert code == 3
    record = json.loads((tmp_path / "point.json").read_text())["result"]
    assert record["status"] == "unstable" and record["margin"] > 0
    assert "EN" not in record


def test_config_error_exit(tmp_path):
    assert main(["point", "--config", str(_write(tmp_path, _config(transmission=1.2))),
                 "--out", str(tmp_path)]) == 2
    assert main(["point", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["figure", "nope", "--out", str(tmp_path)]) == 2
    assert list(tmp_path.glob("*.csv")) == []


def test_numerical_failure_exit(tmp_path, monkeypatch):
    from cascade_entanglement import cli
    from cascade_entanglement.exceptions import NumericalError

    def boom(*a, **k):
        raise NumericalError("forced")

    monkeypatch.setattr(cli, "run_scenario", boom)
    assert main(["point", "--config", str(_write(tmp_path, _config())), "--out", str(tmp_path)]) == 4
    assert not (tmp_path / "point.json").exists()


def test_set_override_on_command_line(tmp_path):
    path = _write(tmp_path, _config())
    assert main(["point", "--config", str(path), "--out", str(tmp_path),
                 "--set", "scenario.delta_over_wml=-1.0"]) == 3


def test_sweep_outputs_golden_header(tmp_path):
    data = _config("sweep")
    data["axes"] = [{"path": "delta_over_wml", "start": 0.9, "stop": 1.1, "num": 3}]
    assert main(["sweep", "--config", str(_write(tmp_path, data)), "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "sweep.csv")
    assert rows[0] == ["delta_over_wml", "N_l", "N_r", "stable", "margin", "nu_minus", "EN",
                       "physical", "residual"]
    assert len(rows) == 4
    meta = json.loads((tmp_path / "sweep.meta.json").read_text())
    assert meta["columns"] == rows[0]
    assert b"\r" not in (tmp_path / "sweep.csv").read_bytes()


def test_figure_fig1b_header_and_range(tmp_path):
    assert main(["figure", "fig1b", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "fig1b.csv")
    assert rows[0] == ["delta_over_wml", "EN_left", "EN_right"]
    x = [float(r[0]) for r in rows[1:]]
    assert x[0] == 0.4 and x[-1] == 1.4 and len(x) == 401
    en = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert 0.9 < x[int(np.argmax(en[:, 0]))] < 1.1
    meta = json.loads((tmp_path / "fig1b.meta.json").read_text())
    assert meta["config"]["figure"] == "fig1b"


def test_figure_fig2a_has_chi_column(tmp_path):
    assert main(["figure", "fig2a", "--points", "5", "--out", str(tmp_path)]) == 0
    # overriding the resolution renames the preset
    assert not (tmp_path / "fig2a.csv").exists()
    rows = _read_csv(tmp_path / "fig2a-custom.csv")
    assert rows[0] == ["chi", "delta_over_wml", "EN_left", "EN_right"]
    assert len(rows) == 1 + 3 * 5


def test_figure_fig3_files(tmp_path):
    data = {"command": "figure", "options": {"n_points": 11}}
    assert main(["figure", "fig3", "--config", str(_write(tmp_path, data)), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig3.json").read_text())
    assert set(summary["directions"]) == {"left", "right"}
    assert np.asarray(summary["directions"]["left"]["reduced_cm"]).shape == (4, 4)
    grids = sorted(p.name for p in tmp_path.glob("fig3_*.csv"))
    assert len(grids) == 6 and "fig3_q_l_q_r.csv" in grids
    rows = _read_csv(tmp_path / "fig3_q_l_q_r.csv")
    assert rows[0] == ["x", "y", "W_left", "W_right", "W_vacuum"]
    assert len(rows) == 1 + 11 * 11
    side = json.loads((tmp_path / "fig3_q_l_q_r.ellipse.json").read_text())
    assert set(side["ellipses"]) == {"left", "right"}
    assert {"semi_major", "semi_minor", "angle"} <= set(side["ellipses"]["left"])


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["figure", "fig1c", "--points", "7", "--out", str(out)]) == 0
    for name in ("fig1c-custom.csv", "fig1c-custom.meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_module_entry_point_exists():
    assert Path(__file__).parents[1].joinpath("src", "cascade_entanglement", "__main__.py").exists()
