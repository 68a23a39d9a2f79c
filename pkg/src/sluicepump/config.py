"""Sweep configuration files.

Keys carry their unit as a suffix (``f_MHz``, ``r_kohm``, ``c_e_fF``) and are
converted to SI exactly once, here.  Files are TOML; an emitted JSON run
manifest is accepted as well and reproduces the run it describes.

Layout::

    name = "demo"
    [device]         # defaults shared by all series
    [environment]    # optional [environment.engineered] sub-table
    [integrator]
    [[series]]       # label, axis, grid (or grid_<unit> / range table), variant,
                     # optional device / environment / integrator overrides
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


UNITS = {
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "resistance": {"ohm": 1.0, "kohm": 1e3, "Mohm": 1e6},
    "capacitance": {"F": 1.0, "pF": 1e-12, "fF": 1e-15, "aF": 1e-18},
    "current": {"A": 1.0, "uA": 1e-6, "nA": 1e-9, "pA": 1e-12},
    "angle": {"rad": 1.0, "pi": math.pi, "deg": math.pi / 180.0},
}

# canonical key -> dimension (None: dimensionless, no suffix)
DEVICE_KEYS = {
    "ec": "temperature",
    "jl_max_over_ec": None,
    "jl_min_over_max": None,
    "jr_max_over_ec": None,
    "jr_min_over_max": None,
    "dng_max": None,
    "dng_min": None,
    "phi": "angle",
    "g": None,
    "f": "frequency",
}
ENV_KEYS = {"r": "resistance", "temp": "temperature", "t0": "temperature"}
ENGINEERED_KEYS = {
    "m": None,
    "c_e": "capacitance",
    "c_s": "capacitance",
    "r_s": "resistance",
    "i_c": "current",
    "flux": None,
}
INTEGRATOR_KEYS = {
    "rel_tol": float,
    "abs_tol": float,
    "max_step": float,
    "n_cycles_max": int,
    "min_cycles": int,
    "stationarity_tol": float,
    "n_grid": int,
    "pos_tol": float,
}

AXES = {
    "phase_phi": ("device", "phi"),
    "coupling_g": ("device", "g"),
    "frequency_f": ("device", "f"),
    "flux": ("engineered", "flux"),
    "temperature": ("environment", "temp"),
}
AXIS_DIMENSION = {"phase_phi": "angle", "coupling_g": None, "frequency_f": "frequency", "flux": None, "temperature": "temperature"}


def convert_section(raw: dict, schema: dict, where: str) -> dict:
    """Map unit-suffixed keys of one table onto canonical SI keys."""
    out = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            continue
        canon, factor = _resolve(key, schema, where)
        if canon in out:
            raise ConfigError(f"{where}: '{canon}' given more than once")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
        out[canon] = float(value) * factor
    return out


def _resolve(key: str, schema: dict, where: str):
    if key in schema:
        if schema[key] is not None and schema[key] != "angle":
            raise ConfigError(f"{where}.{key}: missing unit suffix ({', '.join(UNITS[schema[key]])})")
        return key, 1.0
    base, _, unit = key.rpartition("_")
    if base in schema and schema[base] is not None and unit in UNITS[schema[base]]:
        return base, UNITS[schema[base]][unit]
    raise ConfigError(f"{where}: unknown key '{key}'")


def _grid(series: dict, axis: str, where: str) -> list[float]:
    dim = AXIS_DIMENSION[axis]
    found = [k for k in series if k == "grid" or k.startswith("grid_")]
    if len(found) != 1:
        raise ConfigError(f"{where}: exactly one grid entry required (grid or grid_<unit>)")
    key = found[0]
    factor = 1.0
    if key != "grid":
        unit = key[len("grid_"):]
        if dim is None or unit not in UNITS[dim]:
            raise ConfigError(f"{where}.{key}: unit '{unit}' does not fit axis {axis}")
        factor = UNITS[dim][unit]
    val = series[key]
    if isinstance(val, dict):
        try:
            pts = np.linspace(val["start"], val["stop"], int(val["num"]), endpoint=bool(val.get("endpoint", True)))
        except KeyError as exc:
            raise ConfigError(f"{where}.{key}: range needs start, stop, num") from exc
        vals = [float(v) * factor for v in pts]
    elif isinstance(val, list):
        vals = [float(v) * factor for v in val]
    else:
        raise ConfigError(f"{where}.{key}: expected a list or a range table")
    return vals


def load_config(path) -> dict:
    """Read TOML (or a JSON manifest) into the raw nested dictionary."""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
            return data.get("config", data)
        return tomllib.loads(text.decode())
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(data: dict):
    """Raw dictionary -> list of SweepSpec (one per series)."""
    from .sweep import SweepSpec

    if "series" not in data or not data["series"]:
        raise ConfigError("config needs at least one [[series]] table")
    base_dev = convert_section(data.get("device", {}), DEVICE_KEYS, "device")
    env_raw = data.get("environment", {})
    base_env = convert_section(env_raw, ENV_KEYS, "environment")
    base_eng = convert_section(env_raw["engineered"], ENGINEERED_KEYS, "environment.engineered") if "engineered" in env_raw else None
    base_int = _integrator(data.get("integrator", {}), "integrator")

    specs = []
    for i, s in enumerate(data["series"]):
        where = f"series[{i}]"
        axis = s.get("axis")
        if axis not in AXES:
            raise ConfigError(f"{where}: axis must be one of {sorted(AXES)}")
        dev = dict(base_dev, **convert_section(s.get("device", {}), DEVICE_KEYS, f"{where}.device"))
        env_over = s.get("environment", {})
        env = dict(base_env, **convert_section(env_over, ENV_KEYS, f"{where}.environment"))
        eng = base_eng
        if "engineered" in env_over:
            eng = dict(base_eng or {}, **convert_section(env_over["engineered"], ENGINEERED_KEYS, f"{where}.environment.engineered"))
        integ = dict(base_int, **_integrator(s.get("integrator", {}), f"{where}.integrator"))
        spec = SweepSpec(
            label=str(s.get("label", f"series{i}")),
            axis=axis,
            grid=_grid(s, axis, where),
            device=dev,
            environment=env,
            engineered=eng,
            integrator=integ,
            variant=str(s.get("variant", "full")),
            reverse=bool(s.get("reverse", False)),
            outputs=tuple(s.get("outputs", ())),
            traces=bool(s.get("traces", False)),
        )
        spec.validate()
        specs.append(spec)
    return str(data.get("name", "sweep")), specs


def _integrator(raw: dict, where: str) -> dict:
    out = {}
    for k, v in raw.items():
        if k not in INTEGRATOR_KEYS:
            raise ConfigError(f"{where}: unknown key '{k}'")
        out[k] = INTEGRATOR_KEYS[k](v)
    return out
