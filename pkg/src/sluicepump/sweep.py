"""Parameter sweeps, figure presets and table output."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import AXES, AXIS_DIMENSION, ConfigError, DEVICE_KEYS, ENGINEERED_KEYS, ENV_KEYS
from .environment import EngineeredEnvironment, OhmicSpectrum
from .integrator import IntegratorConfig, integrate_cycles
from .master_equations import RhsVariant
from .observables import superadiabatic_population
from .sluice import SluiceParams, adiabaticity

logger = logging.getLogger(__name__)

WORKERS_ENV = "SLUICEPUMP_WORKERS"

COLUMNS = (
    "series",
    "axis",
    "value",
    "variant",
    "status",
    "converged",
    "n_cycles",
    "q_left",
    "q_right",
    "q_avg",
    "delta_q",
    "min_pg",
    "max_violation",
    "alpha_bar",
    "message",
)
OBSERVABLES = ("converged", "n_cycles", "q_left", "q_right", "q_avg", "delta_q", "min_pg", "max_violation", "alpha_bar")

_CANON_UNIT = {"frequency": "Hz", "temperature": "K", "resistance": "ohm", "capacitance": "F", "current": "A", "angle": "rad"}

DEFAULT_DEVICE = {
    "ec": 1.0,
    "jl_max_over_ec": 0.1,
    "jl_min_over_max": 0.03,
    "dng_max": 0.3,
    "dng_min": -0.3,
    "phi": math.pi / 2,
    "g": 0.01,
    "f": 10e6,
}
DEFAULT_ENVIRONMENT = {"r": 300e3, "temp": 0.0, "t0": 0.1}


@dataclass
class SweepSpec:
    """One series: a 1-D grid over ``axis`` with everything else fixed.

    ``device``, ``environment`` and ``engineered`` hold canonical SI values
    (see :mod:`sluicepump.config`); missing device/environment keys take the
    reference-device defaults.
    """

    label: str
    axis: str
    grid: list
    device: dict = field(default_factory=dict)
    environment: dict = field(default_factory=dict)
    engineered: dict | None = None
    integrator: dict = field(default_factory=dict)
    variant: str = "full"
    reverse: bool = False
    outputs: tuple = ()
    traces: bool = False

    def validate(self):
        if self.axis not in AXES:
            raise ConfigError(f"{self.label}: unknown axis {self.axis}")
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1:
            raise ConfigError(f"{self.label}: grid must be one-dimensional")
        if len(g) > 1 and not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
            raise ConfigError(f"{self.label}: grid must be strictly monotone")
        if self.axis == "flux" and self.engineered is None:
            raise ConfigError(f"{self.label}: flux axis needs an engineered environment")
        try:
            RhsVariant.parse(self.variant)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{self.label}: unknown variant {self.variant}") from exc
        bad = set(self.outputs) - set(OBSERVABLES)
        if bad:
            raise ConfigError(f"{self.label}: unknown outputs {sorted(bad)}")
        try:
            for v in self.grid[:1] or [None]:
                self.point(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.label}: {exc}") from exc

    def point(self, value):
        """(SluiceParams, spectrum model, IntegratorConfig) at one grid value."""
        dev = dict(DEFAULT_DEVICE, **self.device)
        env = dict(DEFAULT_ENVIRONMENT, **self.environment)
        eng = dict(self.engineered) if self.engineered is not None else None
        if value is not None:
            section, key = AXES[self.axis]
            {"device": dev, "environment": env, "engineered": eng}[section][key] = float(value)
        dev = dict(dev)
        params = SluiceParams.from_ratios(ec_kelvin=dev.pop("ec"), **dev)
        spectrum = OhmicSpectrum(r=env["r"], temp=env["temp"], t0=env["t0"])
        if eng is not None:
            spectrum = EngineeredEnvironment(
                base=spectrum,
                m_squids=int(eng["m"]),
                c_e=eng["c_e"],
                c_s=eng["c_s"],
                r_s=eng["r_s"],
                i_c=eng["i_c"],
                flux=eng.get("flux", 0.0),
            )
        return params, spectrum, IntegratorConfig(**self.integrator)

    def columns(self):
        if not self.outputs:
            return COLUMNS
        keep = set(self.outputs)
        return tuple(c for c in COLUMNS if c not in OBSERVABLES or c in keep)

    def to_config(self) -> dict:
        """Series table with explicit canonical units; parses back to an equal spec."""

        def suffixed(d, schema):
            out = {}
            for k, v in d.items():
                dim = schema[k]
                out[k if dim is None else f"{k}_{_CANON_UNIT[dim]}"] = v
            return out

        dim = AXIS_DIMENSION[self.axis]
        table = {
            "label": self.label,
            "axis": self.axis,
            ("grid" if dim is None else f"grid_{_CANON_UNIT[dim]}"): list(map(float, self.grid)),
            "variant": self.variant,
            "reverse": self.reverse,
            "traces": self.traces,
            "device": suffixed(self.device, DEVICE_KEYS),
            "environment": suffixed(self.environment, ENV_KEYS),
            "integrator": dict(self.integrator),
        }
        if self.outputs:
            table["outputs"] = list(self.outputs)
        if self.engineered is not None:
            table["environment"]["engineered"] = suffixed(self.engineered, ENGINEERED_KEYS)
        return table


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    traces: list  # per row: None or dict of arrays

    @property
    def n_failed(self) -> int:
        return sum(r["status"] != "ok" for r in self.rows)


def _run_point(args):
    spec, value = args
    row = {c: None for c in COLUMNS}
    row.update(series=spec.label, axis=spec.axis, value=float(value), variant=spec.variant)
    trace = None
    try:
        params, spectrum, cfg = spec.point(value)
        rec = integrate_cycles(spec.variant, params, spectrum, cfg, reverse=spec.reverse)
        q_l, q_r = (float(x) for x in rec.cycle_charges[-1])
        pg = superadiabatic_population(rec.frames, rec.rho())
        row.update(
            status="ok",
            converged=rec.converged,
            n_cycles=rec.n_cycles,
            q_left=q_l,
            q_right=q_r,
            q_avg=0.5 * (q_l + q_r),
            delta_q=q_l - q_r,
            min_pg=float(np.min(pg)),
            max_violation=rec.max_violation,
            alpha_bar=float(adiabaticity(params).alpha_bar),
            message="" if rec.converged else f"not periodic after {rec.n_cycles} cycles",
        )
        if spec.traces:
            rho = rec.rho()
            trace = {
                "t": rec.grid_phase,
                "rho_gg": np.asarray(rho.rho_gg),
                "rho_ge_re": np.asarray(rho.rho_ge_re),
                "rho_ge_im": np.asarray(rho.rho_ge_im),
                "p_g_super": np.asarray(pg),
            }
    except Exception as exc:  # a failed point must not stop the sweep
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
    return row, trace


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order."""
    spec.validate()
    workers = workers or default_workers()
    jobs = [(spec, v) for v in spec.grid]
    if workers == 1 or len(jobs) <= 1:
        out = [_run_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            out = list(pool.map(_run_point, jobs))
    for row, _ in out:
        if row["status"] != "ok":
            logger.warning("%s at %s=%g failed: %s", spec.label, spec.axis, row["value"], row["message"])
    return SweepResult(spec, [r for r, _ in out], [t for _, t in out])


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip form, 17 significant digits at most
    return str(v)


def table_text(result: SweepResult, fmt: str = "csv") -> str:
    cols = result.spec.columns()
    if fmt == "json":
        rows = [{c: r[c] for c in cols} for r in result.rows]
        return json.dumps({"columns": list(cols), "rows": rows}, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in result.rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def _slug(label: str) -> str:
    keep = [ch if ch.isalnum() or ch in "-." else "_" for ch in label]
    return "".join(keep).strip("_") or "series"


def manifest(name: str, specs, workers: int | None = None) -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "name": name,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "tolerances": [asdict(s.point(s.grid[0] if s.grid else None)[2]) for s in specs],
        "config": {"name": name, "series": [s.to_config() for s in specs]},
    }


def emit(name: str, results, out_dir, fmt: str = "csv") -> list[Path]:
    """Write one table per series plus ``<name>_manifest.json``; returns the paths."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt}")
    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        used = set()
        for res in results:
            stem = f"{name}_{_slug(res.spec.label)}"
            while stem in used:
                stem += "_"
            used.add(stem)
            p = out_dir / f"{stem}.{fmt}"
            p.write_text(table_text(res, fmt))
            paths.append(p)
            for i, tr in enumerate(res.traces):
                if tr is None:
                    continue
                tp = out_dir / f"{stem}_trace{i:03d}.csv"
                with tp.open("w", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    keys = list(tr)
                    w.writerow(keys)
                    for vals in zip(*(tr[k] for k in keys)):
                        w.writerow([_fmt(float(v)) for v in vals])
                paths.append(tp)
        mp = out_dir / f"{name}_manifest.json"
        mp.write_text(json.dumps(manifest(name, [r.spec for r in results]), indent=1) + "\n")
        paths.append(mp)
    except OSError as exc:
        raise OSError(f"writing results to {out_dir}: {exc}") from exc
    return paths


# ---------------------------------------------------------------------------
# presets

_FIG5_DEVICE = {
    "jl_max_over_ec": 0.1,
    "jl_min_over_max": 0.006,
    "jr_max_over_ec": 0.2,
    "jr_min_over_max": 0.04,
    "dng_max": 0.4,
    "dng_min": -0.03,
}


def _phi_grid(n=24):
    return list(np.linspace(0.0, 2.0 * np.pi, n, endpoint=False))


def _g_grid():
    return [0.005, 0.01, 0.0125, 0.015, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]


def preset(name: str) -> list[SweepSpec]:
    """Series of a named figure preset."""
    name = name.lower()
    if name == "fig2a":
        return [
            SweepSpec(f"g={g}", "phase_phi", _phi_grid(), device={"g": g, "f": 75e6})
            for g in (0.01, 0.0125, 0.015, 0.1)
        ]
    if name == "fig2b":
        return [
            SweepSpec(f"f={f / 1e6:g}MHz", "coupling_g", _g_grid(), device={"f": f})
            for f in (10e6, 25e6, 50e6, 65e6, 75e6)
        ]
    if name == "fig3":
        a = [
            SweepSpec("a_g=0.01", "frequency_f", [10e6, 75e6, 100e6], device={"g": 0.01}, traces=True)
        ]
        b = [
            SweepSpec("b_f=75MHz", "coupling_g", [0.01, 0.0125, 0.015], device={"f": 75e6}, traces=True)
        ]
        return a + b
    if name == "fig4":
        out = []
        for temp in (0.0, 0.03):
            out += [
                SweepSpec(f"a_T={temp}K_g={g}", "phase_phi", _phi_grid(), device={"g": g, "f": 75e6}, environment={"temp": temp})
                for g in (0.01, 0.0125, 0.015, 0.1)
            ]
            out += [
                SweepSpec(f"b_T={temp}K_f={f / 1e6:g}MHz", "coupling_g", _g_grid(), device={"f": f}, environment={"temp": temp})
                for f in (10e6, 50e6, 75e6)
            ]
        return out
    if name == "fig5":
        grid = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]
        return [
            SweepSpec(f"{v}", "coupling_g", grid, device=dict(_FIG5_DEVICE), variant=v)
            for v in ("full", "secular")
        ]
    if name == "fig6":
        out = []
        for r_s, c_s in ((500.0, 0.3e-15), (1e3, 0.1e-15)):
            eng = {"m": 100.0, "c_e": 1e-15, "c_s": c_s, "r_s": r_s, "i_c": 4e-9, "flux": 0.0}
            out.append(
                SweepSpec(
                    f"Rs={r_s:g}ohm_Cs={c_s * 1e15:g}fF",
                    "flux",
                    list(np.linspace(0.0, 1.0, 26)),  # step 0.04 steps over the divergence at 1/2
                    device={"g": 0.025, "f": 10e6},
                    environment={"r": 1.5e3},
                    engineered=eng,
                    # weak damping at R = 1.5 kOhm: the periodic regime takes ~100 cycles
                    integrator={"n_cycles_max": 200},
                )
            )
        return out
    raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})")


PRESETS = ("fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6")
