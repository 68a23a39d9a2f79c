"""Command line entry point: sweeps, figure presets, oracles and self-checks.

Exit status: 0 on success, 1 on configuration errors, 2 when some sweep rows
(or self-checks) failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from .config import ConfigError, load_config, parse_config
from .sweep import PRESETS, SweepSpec, default_workers, emit, preset, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2

ORACLES = (
    "adiabaticity",
    "ideal-charge",
    "qs-ideal",
    "qs-secular",
    "qs-finite-t",
    "qs-nonadiabatic",
    "delta-q-explicit",
    "delta-q-quasistatic",
    "delta-q-leading",
)


def _run_specs(name, specs, args) -> int:
    workers = args.workers or default_workers()
    results = []
    for spec in specs:
        print(f"[{name}] {spec.label}: {len(spec.grid)} points on {spec.axis}", file=sys.stderr)
        results.append(run_sweep(spec, workers=workers))
    paths = emit(name, results, args.out_dir, args.format)
    for p in paths:
        print(p)
    failed = sum(r.n_failed for r in results)
    if failed:
        print(f"{failed} sweep point(s) failed; see the message column", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_sweep(args) -> int:
    name, specs = parse_config(load_config(args.config))
    return _run_specs(name, specs, args)


def cmd_preset(args) -> int:
    return _run_specs(args.name, preset(args.name), args)


def _oracle_params(args):
    from .sweep import _FIG5_DEVICE

    base = {"fig2": {}, "fig5": dict(_FIG5_DEVICE)}[args.params]
    spec = SweepSpec("oracle", "coupling_g", [args.g], device=dict(base, f=args.f_mhz * 1e6, phi=args.phi_pi * math.pi))
    params, spectrum, _ = spec.point(args.g)
    if args.temp:
        from dataclasses import replace

        spectrum = replace(spectrum, temp=args.temp)
    return params, spectrum


def cmd_oracle(args) -> int:
    from . import oracles
    from .environment import ohmic_triple
    from .sluice import adiabaticity, cycle_waveform, frame_at

    params, spectrum = _oracle_params(args)
    name = args.name
    out = {"oracle": name, "g": params.g, "f_Hz": params.f, "phi_rad": params.phi}
    if name == "adiabaticity":
        rep = adiabaticity(params)
        out.update(alpha_bar=float(rep.alpha_bar), alpha_max=float(rep.alpha_t.max()), delta_min=float(rep.delta_min))
    elif name == "ideal-charge":
        out.update(q_ground=oracles.ideal_pumped_charge(params), q_excited=oracles.ideal_pumped_charge(params, excited=True))
    elif name == "delta-q-explicit":
        terms = oracles.delta_q_explicit(params, spectrum, terms=True)
        out.update(delta_q=terms.total, gamma_term=terms.gamma_term, eta_term=terms.eta_term, eta_only_term=terms.eta_only_term)
    elif name == "delta-q-quasistatic":
        out.update(delta_q=oracles.delta_q_quasistatic(params, spectrum))
    elif name == "delta-q-leading":
        lt = oracles.delta_q_leading_terms(params, spectrum)
        out.update(a1=lt.a1, a2=lt.a2, a4=lt.a4, a5=lt.a5, a5_consistent=lt.a5_consistent, total=lt.total, in_regime=lt.in_regime)
    elif name == "qs-nonadiabatic":
        sol = oracles.qs_nonadiabatic()
        out.update(rho_gg=sol.rho_gg, rho_ge_re=0.0, rho_ge_im=0.0, regime=sol.regime.value)
    else:
        frame = frame_at(params, cycle_waveform(params, args.phase * params.period))
        if name == "qs-ideal":
            sol = oracles.qs_ideal(frame)
        elif name == "qs-secular":
            sol = oracles.qs_secular_zero_T(frame, ohmic_triple(spectrum, frame.omega0))
        else:
            sol = oracles.qs_finite_T(frame, None, spectrum.temp)
        out.update(
            t_over_period=args.phase,
            rho_gg=float(sol.rho_gg),
            rho_ge_re=float(complex(sol.rho_ge).real),
            rho_ge_im=float(complex(sol.rho_ge).imag),
            regime=sol.regime.value,
        )
    print(json.dumps(out, indent=1))
    return EXIT_OK


def cmd_check(args) -> int:
    from .selfcheck import run_checks

    ok = True
    for name, passed, dev in run_checks(n=args.n, seed=args.seed):
        print(f"{'PASS' if passed else 'FAIL'}  {name}  (max rel. dev. {dev:.2e})")
        ok &= passed
    return EXIT_OK if ok else EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sluicepump", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log integrator warnings")
    sub = ap.add_subparsers(dest="command", required=True)

    def out_opts(p):
        p.add_argument("--out-dir", default="results", help="directory for tables and manifest")
        p.add_argument("--workers", type=int, default=None, help="parallel worker processes (default: CPUs)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sweep", help="run a sweep described by a TOML config or JSON manifest")
    p.add_argument("config")
    out_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run a built-in sweep preset")
    p.add_argument("name", choices=PRESETS)
    out_opts(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("oracle", help="evaluate an analytic oracle")
    p.add_argument("name", choices=ORACLES)
    p.add_argument("--params", choices=("fig2", "fig5"), default="fig2")
    p.add_argument("--g", type=float, default=0.01)
    p.add_argument("--f-mhz", type=float, default=10.0)
    p.add_argument("--phi-pi", type=float, default=0.5, help="phase in units of pi")
    p.add_argument("--temp", type=float, default=0.0, help="bath temperature in K")
    p.add_argument("--phase", type=float, default=0.25, help="time within the cycle, as a fraction of T_p")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="reduction-identity self-tests")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
