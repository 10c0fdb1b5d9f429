"""
Run-configuration parsing and canonical emission.

A config is a JSON object::

    {
      "command": "sweep",
      "scenario": {
        "refractive_index": 1.48,
        "radius": {"value": 36, "unit": "um"},
        "mass": {"value": 15, "unit": "ng"},
        "wavelength": {"value": 780, "unit": "nm"},
        "kappa_0": {"value": 15, "unit": "MHz"},
        "kappa_ex_l": {"value": 27, "unit": "MHz"},
        "kappa_ex_r": {"value": 30, "unit": "MHz"},
        "omega_m": {"value": 88.54, "unit": "MHz"},
        "gamma_m": {"value": 2.2, "unit": "kHz"},
        "spin_l": {"value": 0.6, "unit": "MHz_rad", "orientation": "CCW"},
        "spin_r": {"value": 0, "unit": "rad/s"},
        "direction": "left",
        "power": {"value": 20, "unit": "mW"},
        "delta_over_wml": 1.0
      },
      "axes": [{"path": "delta_over_wml", "start": 0.4, "stop": 1.4, "num": 401}]
    }

Resonator fields apply to both resonators unless given with an ``_l`` /
``_r`` suffix.  Frequencies and rates must carry a unit: ``Hz``, ``kHz``,
``MHz``, ``GHz`` (ordinary frequency, multiplied by 2 pi), ``rad/s`` or
``MHz_rad`` (1e6 rad/s).  Other quantities accept either a bare SI number or a
``{"value", "unit"}`` object.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .exceptions import ConfigError
from .model import (
    Direction,
    DriveConfig,
    Environment,
    LinkConfig,
    Orientation,
    ResonatorParams,
    Scenario,
    SpinConfig,
)
from .scenario import AXIS_PATHS, Axis

TWO_PI = 2 * math.pi

FREQUENCY_UNITS = {
    "rad/s": 1.0,
    "MHz_rad": 1e6,
    "Hz": TWO_PI,
    "kHz": TWO_PI * 1e3,
    "MHz": TWO_PI * 1e6,
    "GHz": TWO_PI * 1e9,
}
UNITS = {
    "frequency": FREQUENCY_UNITS,
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6, "ug": 1e-9, "ng": 1e-12, "pg": 1e-15},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "inverse_length": {"1/m": 1.0, "1/um": 1e6, "1/nm": 1e9},
    "dimensionless": {"1": 1.0},
}
SI_UNIT = {
    "frequency": "rad/s",
    "length": "m",
    "mass": "kg",
    "power": "W",
    "temperature": "K",
    "angle": "rad",
    "inverse_length": "1/m",
    "dimensionless": "1",
}

# per-resonator fields -> quantity kind
RESONATOR_FIELDS = {
    "refractive_index": "dimensionless",
    "radius": "length",
    "mass": "mass",
    "wavelength": "length",
    "omega_c": "frequency",
    "kappa_0": "frequency",
    "kappa_ex": "frequency",
    "omega_m": "frequency",
    "gamma_m": "frequency",
    "dn_dlambda": "inverse_length",
}
OPTIONAL_RESONATOR_FIELDS = {"wavelength", "omega_c", "dn_dlambda"}

SCENARIO_FIELDS = {
    "spin_l": "frequency",
    "spin_r": "frequency",
    "direction": None,
    "power": "power",
    "detuning": "frequency",
    "delta_over_wml": "dimensionless",
    "drive_phase": "angle",
    "transmission": "dimensionless",
    "phase": "angle",
    "fiber_length": "length",
    "fiber_index": "dimensionless",
    "temperature": "temperature",
    "chi": "dimensionless",
    "radiation_pressure_shift": None,
    "correlated_fiber_noise": None,
}
AXIS_KIND = {
    "delta_over_wml": "dimensionless",
    "detuning": "frequency",
    "spin_l": "frequency",
    "spin_r": "frequency",
    "chi": "dimensionless",
    "phase": "angle",
    "transmission": "dimensionless",
    "power": "power",
    "temperature": "temperature",
}
COMMANDS = ("point", "pair", "sweep", "revival", "wigner", "figure")
TOP_LEVEL = {"command", "scenario", "axes", "figure", "options", "output"}
OPTION_KEYS = {"n_points", "baseline_axis", "points"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: Scenario | None = None
    axes: tuple[Axis, ...] = ()
    figure: str | None = None
    options: tuple[tuple[str, object], ...] = ()
    output_dir: str | None = None

    def option(self, key, default=None):
        return dict(self.options).get(key, default)


def _quantity(raw, kind, path, require_unit=None):
    """Convert ``raw`` (bare number or value/unit object) to SI."""
    if require_unit is None:
        require_unit = kind == "frequency"
    extra = {}
    if isinstance(raw, dict):
        unknown = set(raw) - {"value", "unit", "orientation"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", path)
        if "value" not in raw:
            raise ConfigError("missing 'value'", path)
        if "unit" not in raw:
            raise ConfigError("missing 'unit'", path)
        value, unit = raw["value"], raw["unit"]
        table = UNITS[kind]
        if unit not in table:
            raise ConfigError(f"unit {unit!r} not valid here; expected one of {sorted(table)}", path)
        factor = table[unit]
        extra = {k: raw[k] for k in raw if k == "orientation"}
    else:
        if require_unit:
            raise ConfigError(
                f"a unit is required, e.g. {{\"value\": ..., \"unit\": \"rad/s\"}}; got {raw!r}", path)
        value, factor = raw, 1.0
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    value = float(value) * factor
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    return (value, extra) if extra else value


def _resonator(block, side, prefix):
    kwargs = {}
    for name, kind in RESONATOR_FIELDS.items():
        key = f"{name}_{side}" if f"{name}_{side}" in block else name
        if key not in block:
            if name in OPTIONAL_RESONATOR_FIELDS:
                continue
            raise ConfigError("missing required field", f"{prefix}.{name}_{side}")
        kwargs[name] = _quantity(block[key], kind, f"{prefix}.{key}")
    if "wavelength" not in kwargs and "omega_c" not in kwargs:
        raise ConfigError("one of wavelength or omega_c is required", f"{prefix}.wavelength")
    try:
        return ResonatorParams(**kwargs)
    except ConfigError as exc:
        raise ConfigError(exc.message, f"{prefix}.{exc.path}_{side}") from None


def _spin(block, key, prefix):
    if key not in block:
        raise ConfigError("missing required field", f"{prefix}.{key}")
    parsed = _quantity(block[key], "frequency", f"{prefix}.{key}")
    if isinstance(parsed, tuple):
        value, extra = parsed
        try:
            orientation = Orientation(extra["orientation"])
        except ValueError:
            raise ConfigError(f"invalid orientation {extra['orientation']!r}", f"{prefix}.{key}") from None
        if value < 0:
            raise ConfigError("use a nonnegative value with an explicit orientation", f"{prefix}.{key}")
        if value == 0:
            orientation = Orientation.STATIC
        try:
            return SpinConfig(value, orientation)
        except ConfigError as exc:
            raise ConfigError(exc.message, f"{prefix}.{key}") from None
    return SpinConfig.from_signed(parsed)


def parse_scenario(block, prefix="scenario") -> Scenario:
    if not isinstance(block, dict):
        raise ConfigError("expected an object", prefix)
    allowed = set(SCENARIO_FIELDS)
    for name in RESONATOR_FIELDS:
        allowed |= {name, f"{name}_l", f"{name}_r"}
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", prefix)

    left = _resonator(block, "l", prefix)
    right = _resonator(block, "r", prefix)
    if "chi" in block:
        if "omega_m_r" in block:
            raise ConfigError("give either chi or omega_m_r, not both", f"{prefix}.chi")
        chi = _quantity(block["chi"], "dimensionless", f"{prefix}.chi")
        if not chi > 0:
            raise ConfigError(f"must be > 0, got {chi!r}", f"{prefix}.chi")
        right = right.with_mechanical_frequency(chi * left.omega_m)

    direction = block.get("direction")
    try:
        direction = Direction(direction)
    except ValueError:
        raise ConfigError(f"expected 'left' or 'right', got {direction!r}", f"{prefix}.direction") from None
    if "power" not in block:
        raise ConfigError("missing required field", f"{prefix}.power")
    power = _quantity(block["power"], "power", f"{prefix}.power")
    if ("detuning" in block) == ("delta_over_wml" in block):
        raise ConfigError("give exactly one of detuning or delta_over_wml", f"{prefix}.detuning")
    if "detuning" in block:
        detuning = _quantity(block["detuning"], "frequency", f"{prefix}.detuning")
    else:
        detuning = _quantity(block["delta_over_wml"], "dimensionless", f"{prefix}.delta_over_wml") * left.omega_m
    drive_phase = _quantity(block.get("drive_phase", 0.0), "angle", f"{prefix}.drive_phase")

    transmission = _quantity(block.get("transmission", 1.0), "dimensionless", f"{prefix}.transmission")
    if "fiber_length" in block:
        if "phase" in block:
            raise ConfigError("give either phase or fiber_length, not both", f"{prefix}.phase")
        length = _quantity(block["fiber_length"], "length", f"{prefix}.fiber_length")
        index = _quantity(block.get("fiber_index", left.refractive_index), "dimensionless",
                          f"{prefix}.fiber_index")
        phase = 2 * math.pi * index * length / left.wavelength
    else:
        phase = _quantity(block.get("phase", 0.0), "angle", f"{prefix}.phase")
    temperature = _quantity(block.get("temperature", {"value": 100, "unit": "mK"}),
                            "temperature", f"{prefix}.temperature")
    flags = {}
    for key in ("radiation_pressure_shift", "correlated_fiber_noise"):
        flags[key] = block.get(key, False)
        if not isinstance(flags[key], bool):
            raise ConfigError(f"expected true/false, got {flags[key]!r}", f"{prefix}.{key}")

    try:
        return Scenario(
            left=left,
            right=right,
            drive=DriveConfig(direction, power, detuning, drive_phase),
            spin_left=_spin(block, "spin_l", prefix),
            spin_right=_spin(block, "spin_r", prefix),
            link=LinkConfig(transmission, phase),
            env=Environment(temperature),
            **flags,
        )
    except ConfigError as exc:
        raise ConfigError(exc.message, f"{prefix}.{exc.path}" if exc.path else prefix) from None


def parse_axis(raw, path) -> Axis:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    unknown = set(raw) - {"path", "start", "stop", "num", "values", "unit"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    name = raw.get("path")
    if name not in AXIS_PATHS:
        raise ConfigError(f"unknown sweep parameter {name!r}; expected one of {sorted(AXIS_PATHS)}",
                          f"{path}.path")
    kind = AXIS_KIND[name]
    unit = raw.get("unit")
    if unit is None:
        if kind == "frequency":
            raise ConfigError("a unit is required for this axis", f"{path}.unit")
        factor = 1.0
    else:
        if unit not in UNITS[kind]:
            raise ConfigError(f"unit {unit!r} not valid here; expected one of {sorted(UNITS[kind])}",
                              f"{path}.unit")
        factor = UNITS[kind][unit]
    if "values" in raw:
        if any(k in raw for k in ("start", "stop", "num")):
            raise ConfigError("give either values or start/stop/num", path)
        values = raw["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("expected a nonempty list", f"{path}.values")
        nums = [_quantity(v, "dimensionless", f"{path}.values[{i}]") * factor
                for i, v in enumerate(values)]
        return Axis(name, tuple(nums))
    for k in ("start", "stop", "num"):
        if k not in raw:
            raise ConfigError("missing required field", f"{path}.{k}")
    num = raw["num"]
    if isinstance(num, bool) or not isinstance(num, int) or num < 1:
        raise ConfigError(f"expected a positive integer, got {num!r}", f"{path}.num")
    start = _quantity(raw["start"], "dimensionless", f"{path}.start") * factor
    stop = _quantity(raw["stop"], "dimensionless", f"{path}.stop") * factor
    return Axis.linspace(name, start, stop, num)


def parse_config_dict(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", "$")
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "$")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"expected one of {COMMANDS}, got {command!r}", "command")

    figure = data.get("figure")
    scenario = None
    if command == "figure":
        from .presets import FIGURES

        if figure not in FIGURES:
            raise ConfigError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}", "figure")
        if "scenario" in data:
            raise ConfigError("figure presets are frozen; use a non-figure command instead", "scenario")
    else:
        if "scenario" not in data:
            raise ConfigError("missing required field", "scenario")
        scenario = parse_scenario(data["scenario"])

    raw_axes = data.get("axes", [])
    if not isinstance(raw_axes, list):
        raise ConfigError("expected a list", "axes")
    axes = tuple(parse_axis(a, f"axes[{i}]") for i, a in enumerate(raw_axes))
    if command == "sweep" and not 1 <= len(axes) <= 2:
        raise ConfigError("sweep needs one or two axes", "axes")
    if command == "revival" and not 1 <= len(axes) <= 2:
        raise ConfigError("revival needs one (peak ratio) or two (map) axes", "axes")

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("expected an object", "options")
    unknown = set(options) - OPTION_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "options")
    opts = []
    for key in sorted(options):
        value = options[key]
        if key == "baseline_axis":
            value = parse_axis(value, "options.baseline_axis")
        elif isinstance(value, bool) or not isinstance(value, int) or value < 2:
            raise ConfigError(f"expected an integer >= 2, got {value!r}", f"options.{key}")
        opts.append((key, value))

    output = data.get("output", {})
    if not isinstance(output, dict) or set(output) - {"dir"}:
        raise ConfigError("expected an object with optional key 'dir'", "output")
    return RunConfig(command, scenario, axes, figure, tuple(opts), output.get("dir"))


def parse_config(text: str, overrides=()) -> RunConfig:
    """Parse and validate config text.

    ``overrides`` are ``"dotted.key=value"`` strings applied to the raw JSON
    before validation; values are decoded as JSON when possible.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "$") from None
    for item in overrides:
        apply_override(data, item)
    return parse_config_dict(data)


def apply_override(data: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError(f"override must look like key=value, got {item!r}", "--set")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into non-object at {part!r}", f"--set {key}")
    node[parts[-1]] = value


def _q(value, unit):
    return {"value": value, "unit": unit}


def scenario_to_dict(sc: Scenario) -> dict:
    """Canonical, fully explicit SI form of a scenario (parses back identically)."""
    out = {}
    for side, res in (("l", sc.left), ("r", sc.right)):
        out[f"refractive_index_{side}"] = res.refractive_index
        out[f"radius_{side}"] = _q(res.radius, "m")
        out[f"mass_{side}"] = _q(res.mass, "kg")
        out[f"wavelength_{side}"] = _q(res.wavelength, "m")
        out[f"kappa_0_{side}"] = _q(res.kappa_0, "rad/s")
        out[f"kappa_ex_{side}"] = _q(res.kappa_ex, "rad/s")
        out[f"omega_m_{side}"] = _q(res.omega_m, "rad/s")
        out[f"gamma_m_{side}"] = _q(res.gamma_m, "rad/s")
        out[f"dn_dlambda_{side}"] = _q(res.dn_dlambda, "1/m")
    for key, spin in (("spin_l", sc.spin_left), ("spin_r", sc.spin_right)):
        out[key] = {"value": spin.angular_velocity, "unit": "rad/s",
                    "orientation": spin.orientation.value}
    out["direction"] = sc.drive.direction.value
    out["power"] = _q(sc.drive.power, "W")
    out["detuning"] = _q(sc.drive.detuning, "rad/s")
    out["drive_phase"] = _q(sc.drive.phase, "rad")
    out["transmission"] = sc.link.transmission
    out["phase"] = _q(sc.link.phase, "rad")
    out["temperature"] = _q(sc.env.temperature, "K")
    out["radiation_pressure_shift"] = sc.radiation_pressure_shift
    out["correlated_fiber_noise"] = sc.correlated_fiber_noise
    return out


def axis_to_dict(axis: Axis) -> dict:
    return {"path": axis.path, "values": list(axis.values), "unit": SI_UNIT[AXIS_KIND[axis.path]]}


def config_to_dict(cfg: RunConfig) -> dict:
    out = {"command": cfg.command}
    if cfg.figure is not None:
        out["figure"] = cfg.figure
    if cfg.scenario is not None:
        out["scenario"] = scenario_to_dict(cfg.scenario)
    if cfg.axes:
        out["axes"] = [axis_to_dict(a) for a in cfg.axes]
    if cfg.options:
        out["options"] = {k: axis_to_dict(v) if isinstance(v, Axis) else v for k, v in cfg.options}
    if cfg.output_dir is not None:
        out["output"] = {"dir": cfg.output_dir}
    return out


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, ensure_ascii=False) + "\n"
