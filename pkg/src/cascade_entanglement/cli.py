"""
Command-line front end.

    cascade-entanglement point   --config run.json --out results/
    cascade-entanglement sweep   --config sweep.json --threads 4
    cascade-entanglement figure  fig1b --out results/

Exit codes: 0 success, 2 configuration error, 3 unstable dynamics,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    COMMANDS,
    RunConfig,
    apply_override,
    config_to_dict,
    parse_config_dict,
    scenario_to_dict,
)
from .dynamics import QUADRATURES, diffusion_matrix, drift_matrix, stability
from .exceptions import (
    ConfigError,
    NonPhysicalStateError,
    NumericalError,
    UnstableDynamicsError,
)
from .gaussian import log_negativity, reduce_cm, solve_lyapunov, wigner_projection
from .model import Direction
from .presets import FIGURES, FigurePreset
from .scenario import (
    DEFAULT_DETUNING_AXIS,
    Axis,
    apply_axis,
    directional_pair,
    matched_static_baseline,
    revival_coefficient,
    revival_map,
    run_scenario,
    sweep,
)
from .steadystate import solve_steady_state

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_NUMERICAL = 0, 2, 3, 4
MECHANICAL_LABELS = ("q_l", "p_l", "q_r", "p_r")
WIGNER_PAIRS = tuple(itertools.combinations(range(4), 2))


def fmt(value) -> str:
    """Locale-independent shortest round-trip text for a number."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def csv_text(columns: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in zip(*columns.values()):
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_outputs(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write all files atomically: temp files first, then rename each into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
            staged.append((tmp, out_dir / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for tmp, final in staged:
            os.replace(tmp, final)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
    return [final for _, final in staged]


def provenance(cfg_dict: dict, columns=None, **extra) -> dict:
    out = {"tool": "cascade-entanglement", "version": __version__, "config": cfg_dict}
    if columns is not None:
        out["columns"] = list(columns)
    out.update(extra)
    return out


def _result_record(r) -> dict:
    rec = {
        "status": "stable" if r.stable else "unstable",
        "direction": r.scenario.drive.direction.value,
        "N_l": r.N_l,
        "N_r": r.N_r,
        "margin": r.margin,
    }
    if r.stable:
        rec.update(nu_minus=r.nu_minus, EN=r.log_negativity, physical=r.physical,
                   residual=r.residual)
    return rec


def _matrix_csv(mat) -> str:
    cols = {"row": list(QUADRATURES)}
    for j, label in enumerate(QUADRATURES):
        cols[label] = list(np.asarray(mat)[:, j])
    return csv_text(cols)


def cmd_point(cfg: RunConfig, args) -> tuple[int, dict]:
    sc = cfg.scenario
    r = run_scenario(sc, keep_covariance=True)
    files = {"point.json": json_text({**provenance(config_to_dict(cfg)), "result": _result_record(r)})}
    if args.dump_matrices:
        ss = solve_steady_state(sc)
        files["drift.csv"] = _matrix_csv(drift_matrix(sc, ss))
        files["diffusion.csv"] = _matrix_csv(diffusion_matrix(sc))
        if r.covariance is not None:
            files["covariance.csv"] = _matrix_csv(r.covariance)
    return (EXIT_OK if r.stable else EXIT_UNSTABLE), files


def cmd_pair(cfg: RunConfig, args) -> tuple[int, dict]:
    pair = directional_pair(cfg.scenario)
    body = {
        **provenance(config_to_dict(cfg)),
        "left": _result_record(pair.left),
        "right": _result_record(pair.right),
        "delta_EN": pair.delta,
    }
    status = EXIT_OK if pair.left.stable and pair.right.stable else EXIT_UNSTABLE
    return status, {"pair.json": json_text(body)}


def _table_files(name, table_columns, cfg_dict, **extra):
    return {
        f"{name}.csv": csv_text(table_columns),
        f"{name}.meta.json": json_text(provenance(cfg_dict, table_columns, **extra)),
    }


def cmd_sweep(cfg: RunConfig, args) -> tuple[int, dict]:
    table = sweep(cfg.scenario, cfg.axes, args.threads)
    return EXIT_OK, _table_files("sweep", table.columns, config_to_dict(cfg))


def cmd_revival(cfg: RunConfig, args) -> tuple[int, dict]:
    baseline_axis = cfg.option("baseline_axis", DEFAULT_DETUNING_AXIS)
    if len(cfg.axes) == 1:
        same = revival_coefficient(cfg.scenario, axis=cfg.axes[0], workers=args.threads)
        sc_opp = cfg.scenario.with_direction(cfg.scenario.drive.direction.opposite)
        opposite = revival_coefficient(cfg.scenario, matched_static_baseline(sc_opp),
                                       axis=cfg.axes[0], workers=args.threads)
        body = {**provenance(config_to_dict(cfg)),
                "same_direction": vars(same), "opposite_direction": vars(opposite)}
        return EXIT_OK, {"revival.json": json_text(body)}
    table = revival_map(cfg.scenario, cfg.axes, baseline_axis=baseline_axis, workers=args.threads)
    return EXIT_OK, _table_files("revival", table.columns, config_to_dict(cfg))


def _wigner_files(name, sc, cfg_dict, n_points) -> dict:
    """Reduced mechanical CMs for both directions plus the six projection grids."""
    states = {}
    for d in (Direction.LEFT, Direction.RIGHT):
        s = sc.with_direction(d)
        A = drift_matrix(s, solve_steady_state(s))
        stable, margin = stability(A)
        if not stable:
            raise UnstableDynamicsError(margin)
        V = solve_lyapunov(A, diffusion_matrix(s)).matrix
        states[d.value] = reduce_cm(V, ("b_l", "b_r")).matrix

    summary = {**provenance(cfg_dict), "labels": list(MECHANICAL_LABELS), "directions": {}}
    for d, V4 in states.items():
        ent = log_negativity(V4, strict=False)
        summary["directions"][d] = {"reduced_cm": V4, "nu_minus": ent.nu_minus,
                                    "EN": ent.log_negativity}
    files = {f"{name}.json": json_text(summary)}

    for i, j in WIGNER_PAIRS:
        extent = 4 * math.sqrt(max(max(V4[i, i], V4[j, j]) for V4 in states.values()))
        proj = {d: wigner_projection(V4, (i, j), n_points, extent) for d, V4 in states.items()}
        vac = wigner_projection(0.5 * np.eye(4), (i, j), n_points, extent)
        xx, yy = np.meshgrid(proj["left"].x, proj["left"].y, indexing="xy")
        cols = {"x": xx.ravel(), "y": yy.ravel(),
                "W_left": proj["left"].density.ravel(),
                "W_right": proj["right"].density.ravel(),
                "W_vacuum": vac.density.ravel()}
        stem = f"{name}_{MECHANICAL_LABELS[i]}_{MECHANICAL_LABELS[j]}"
        files[f"{stem}.csv"] = csv_text(cols)
        sidecar = {
            "pair": [MECHANICAL_LABELS[i], MECHANICAL_LABELS[j]],
            "contour": "psi^T V2^-1 psi = 2 (1/e of the peak)",
            "vacuum_radius": 1.0,
            "ellipses": {d: {"marginal_cm": p.marginal, **vars(p.contour)} for d, p in proj.items()},
        }
        files[f"{stem}.ellipse.json"] = json_text(sidecar)
    return files


def cmd_wigner(cfg: RunConfig, args) -> tuple[int, dict]:
    n = cfg.option("n_points", 201)
    return EXIT_OK, _wigner_files("wigner", cfg.scenario, config_to_dict(cfg), n)


def _preset_with_points(preset: FigurePreset, points):
    if not points:
        return preset
    axes = tuple(Axis.linspace(a.path, a.values[0], a.values[-1], points) for a in preset.axes)
    return preset.derive(axes=axes)


def run_figure(preset: FigurePreset, threads=1, n_points=201) -> dict:
    cfg_dict = {"command": "figure", "figure": preset.name,
                "description": preset.description,
                "scenario": scenario_to_dict(preset.scenario),
                "chis": list(preset.chis),
                "axes": [{"path": a.path, "values": list(a.values)} for a in preset.axes]}
    name = preset.name
    if preset.kind == "curves":
        cols = {}
        if len(preset.chis) > 1:
            cols["chi"] = []
        cols.update(delta_over_wml=[], EN_left=[], EN_right=[])
        for chi in preset.chis:
            sc = apply_axis(preset.scenario, "chi", chi)
            per_dir = {d: sweep(sc.with_direction(d), preset.axes, threads) for d in Direction}
            x = per_dir[Direction.LEFT].columns["delta_over_wml"]
            if "chi" in cols:
                cols["chi"] += [chi] * len(x)
            cols["delta_over_wml"] += list(x)
            cols["EN_left"] += list(per_dir[Direction.LEFT].columns["EN"])
            cols["EN_right"] += list(per_dir[Direction.RIGHT].columns["EN"])
        return _table_files(name, cols, cfg_dict)
    if preset.kind == "revival_map":
        table = revival_map(preset.scenario, preset.axes, workers=threads)
        keep = [a.path for a in preset.axes] + ["EN", "stable", "revival", "revival_opposite"]
        return _table_files(name, {k: table.columns[k] for k in keep}, cfg_dict,
                            baseline_peak=float(table.columns["baseline_peak"][0]),
                            baseline_peak_opposite=float(table.columns["baseline_peak_opposite"][0]))
    if preset.kind == "wigner":
        return _wigner_files(name, preset.scenario, cfg_dict, n_points)
    raise ValueError(f"unknown preset kind {preset.kind!r}")


def cmd_figure(cfg: RunConfig, args) -> tuple[int, dict]:
    preset = _preset_with_points(FIGURES[cfg.figure], cfg.option("points"))
    return EXIT_OK, run_figure(preset, args.threads, cfg.option("n_points", 201))


HANDLERS = {
    "point": cmd_point,
    "pair": cmd_pair,
    "sweep": cmd_sweep,
    "revival": cmd_revival,
    "wigner": cmd_wigner,
    "figure": cmd_figure,
}


def run(cfg: RunConfig, args) -> int:
    """Dispatch ``cfg`` and write its outputs; returns the exit status."""
    out_dir = Path(args.out or cfg.output_dir or ".")
    try:
        status, files = HANDLERS[cfg.command](cfg, args)
    except UnstableDynamicsError as exc:
        log.error("%s", exc)
        record = {**provenance(config_to_dict(cfg)), "status": "unstable", "margin": exc.margin}
        write_outputs(out_dir, {f"{cfg.command}.unstable.json": json_text(record)})
        return EXIT_UNSTABLE
    except (NumericalError, NonPhysicalStateError, np.linalg.LinAlgError, ValueError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    for path in write_outputs(out_dir, files):
        log.info("wrote %s", path)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-entanglement",
        description="Steady-state mechanical entanglement in cascaded spinning optomechanical resonators.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("name", nargs="?", help="figure preset name (for 'figure')")
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, help="output directory (default: config output.dir or .)")
    parser.add_argument("--figure", help="figure preset name")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (dotted path)")
    parser.add_argument("--points", type=int, help="override sweep resolution of figure presets")
    parser.add_argument("--dump-matrices", action="store_true",
                        help="also write the drift, diffusion and covariance matrices (point)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args) -> RunConfig:
    figure = args.figure or args.name
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", str(args.config)) from None
        data = json.loads(text) if text.strip() else {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object", "$")
    else:
        data = {}
    data.setdefault("command", args.command)
    if data["command"] != args.command:
        raise ConfigError(f"config says {data['command']!r} but command line says {args.command!r}",
                          "command")
    if figure is not None:
        data["figure"] = figure
    if args.points is not None:
        data.setdefault("options", {})["points"] = args.points
    for item in args.overrides:
        apply_override(data, item)
    return parse_config_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        log.error("--threads must be >= 1")
        return EXIT_CONFIG
    try:
        cfg = load_config(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    return run(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
