"""Acceptance criteria, one test each.

Every test appends a single PASS/FAIL line to ``conftest.ACCEPTANCE_LINES``
(echoed in the terminal summary) and then asserts on the same outcome.
"""

import logging
import math
import time

import numpy as np
import pytest

from sluicepump.core import DensityMatrix2, SpectralTriple, local_alpha
from sluicepump.environment import (
    EngineeredEnvironment,
    OhmicSpectrum,
    engineered_spectrum,
    impedance_filter,
    ohmic_spectrum,
)
from sluicepump.integrator import IntegratorConfig, integrate_cycles, integrate_frozen, rk4_cycles
from sluicepump.master_equations import BLOCH, FULL, SECULAR, UNITARY, rates, stationary_state
from sluicepump.observables import period_average, pumped_charge_per_cycle
from sluicepump.oracles import (
    delta_q_explicit,
    delta_q_leading_terms,
    qs_finite_T,
    qs_secular_zero_T,
)
from sluicepump.selfcheck import call, frame_from_batch, random_batch, rel_dev
from sluicepump.sluice import N_SEGMENTS, SluiceParams, adiabaticity, max_gap
from sluicepump.sweep import _FIG5_DEVICE, preset, run_sweep
from sluicepump.units import kelvin_to_rad_s

from .conftest import ACCEPTANCE_LINES

BATH = OhmicSpectrum(300e3, 0.0, 0.1)
FIG5_G = [0.01, 0.02, 0.03, 0.05, 0.07, 0.1]


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


@pytest.fixture(autouse=True)
def _silent():
    logging.getLogger("sluicepump").setLevel(logging.CRITICAL)
    yield


def fig5(g, f=10e6, **over):
    kw = dict(_FIG5_DEVICE, g=g, f=f)
    kw.update(over)
    return SluiceParams.from_ratios(**kw)


@pytest.fixture(scope="module")
def fig5_runs():
    """Converged full and secular records on the asymmetric cycle."""
    out = {}
    for g in FIG5_G:
        for v in ("full", "secular"):
            rec = integrate_cycles(v, fig5(g), BATH)
            out[v, g] = (rec.converged, pumped_charge_per_cycle(rec))
    return out


# ---------------------------------------------------------------------------


def test_criterion_1_reduction_identities():
    t0 = time.perf_counter()
    b = random_batch(np.random.default_rng(2024), 10_000)
    zero_w = {k: 0.0 * b[k] for k in ("w_gg", "w_ee", "w_ge")}
    zero_s = {k: 0.0 * b[k] for k in ("s_plus", "s_minus", "s_zero")}
    bloch, unit = call(BLOCH, b), call(UNITARY, b)
    devs = {
        "full(w=0)=bloch": rel_dev(call(FULL, b, **zero_w), bloch),
        "full(S=0)=unitary": rel_dev(call(FULL, b, **zero_s), unit),
        "secular(w=0)=bloch": rel_dev(call(SECULAR, b, **zero_w), bloch),
        "secular(S=0)=unitary": rel_dev(call(SECULAR, b, **zero_s), unit),
    }
    elapsed = time.perf_counter() - t0
    ok = all(d <= 1e-12 for d in devs.values()) and elapsed < 1.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in devs.items()) + f"; {elapsed:.2f} s"
    line = report(1, ok, detail)
    assert ok, line


def _coherence_constant(g, f):
    """max over the cycle of |period-averaged (rho_ge + w_ge/omega0)| / alpha^2."""
    p = SluiceParams.from_ratios(g=g, f=f)
    rec = integrate_cycles("full", p, BATH, IntegratorConfig(n_cycles_max=60, n_grid=96))
    seg_len = p.period / N_SEGMENTS
    n_grid = N_SEGMENTS * int(math.ceil(32 * max_gap(p) / (2 * math.pi) * seg_len))
    dense = integrate_cycles(
        "full", p, BATH, IntegratorConfig(n_cycles_max=1, n_grid=n_grid), rho0=DensityMatrix2(*rec.final_state)
    )
    t, fr, rho = dense.grid_phase, dense.frames, dense.rho()
    x = rho.rho_ge + fr.w_ge / fr.omega0
    avg = period_average(t, x, fr.omega0)
    # leave out the ringing right after each corner and the window that reaches past the next one
    u = np.mod(t, seg_len)
    keep = (u > 0.1 * seg_len) & (u < seg_len - 2 * np.pi / fr.omega0)
    return rec.converged, float(np.max(np.abs(avg[keep]) / local_alpha(fr)[keep] ** 2))


def test_criterion_2_ground_state_robustness():
    parts, ok = [], True
    for g in (0.01, 0.05, 0.1):
        c1_conv, c1 = _coherence_constant(g, 10e6)
        c2_conv, c2 = _coherence_constant(g, 5e6)
        ratio = c2 / c1
        ok &= c1_conv and c2_conv and abs(ratio - 1) <= 0.2
        parts.append(f"g={g}: C={c1:.3g} -> {c2:.3g} (x{ratio:.2f})")
    line = report(2, ok, "; ".join(parts) + " on halving f")
    assert ok, line


def test_criterion_3_charge_conservation():
    worst, n_conv, n_all = 0.0, 0, 0
    for f in (10e6, 25e6, 50e6, 75e6):
        for g in (0.005, 0.01, 0.02, 0.05, 0.1):
            rec = integrate_cycles("full", SluiceParams.from_ratios(g=g, f=f), BATH)
            n_all += 1
            if not rec.converged:
                continue
            n_conv += 1
            q_l, q_r, _ = pumped_charge_per_cycle(rec)
            worst = max(worst, abs(q_l - q_r))
    ok = worst <= 1e-3 and n_conv > 0
    line = report(3, ok, f"max |Q_L - Q_R| = {worst:.2e} over {n_conv}/{n_all} converged grid points")
    assert ok, line


def test_criterion_4_secular_nonconservation(fig5_runs):
    dq = [abs(fig5_runs["secular", g][1][0] - fig5_runs["secular", g][1][1]) for g in FIG5_G]
    q_sec = [fig5_runs["secular", g][1][2] for g in FIG5_G]
    q_full = [fig5_runs["full", g][1][2] for g in FIG5_G]
    conv = all(fig5_runs[k][0] for k in fig5_runs)
    spread = (max(q_full) - min(q_full)) / abs(np.mean(q_full))
    ok = conv and bool(np.all(np.diff(dq) > 0)) and bool(np.all(np.diff(q_sec) < 0)) and spread < 0.01
    detail = (
        f"secular |dQ| {dq[0]:.3g} -> {dq[-1]:.3g} (increasing: {bool(np.all(np.diff(dq) > 0))}), "
        f"q_avg {q_sec[0]:.3f} -> {q_sec[-1]:.3f}; full q_avg spread {100 * spread:.2f}%"
    )
    line = report(4, ok, detail)
    assert ok, line


def test_criterion_5_delta_q_oracle(fig5_runs):
    parts, ok = [], True
    # factor two on the figure grid
    worst = 1.0
    for g in FIG5_G:
        q_l, q_r, _ = fig5_runs["secular", g][1]
        ratio = (q_l - q_r) / delta_q_explicit(fig5(g), BATH)
        worst = max(worst, ratio, 1 / ratio) if ratio > 0 else math.inf
    ok &= worst <= 2.0
    parts.append(f"asymmetric-cycle grid worst ratio {worst:.2f}")
    # sharpened regime, slower drive
    sharp = dict(jl_max_over_ec=0.05, jl_min_over_max=0.001, jr_max_over_ec=0.03, jr_min_over_max=0.001, dng_max=0.4, dng_min=-0.2)
    rel = []
    for f in (1e6, 0.5e6):
        p = fig5(0.02, f=f, **sharp)
        rec = integrate_cycles("secular", p, BATH)
        q_l, q_r, _ = pumped_charge_per_cycle(rec)
        rel.append(abs((q_l - q_r) / delta_q_explicit(p, BATH) - 1))
    ok &= rel[-1] <= 0.2 and rel[-1] < rel[0]
    parts.append("sharpened g=0.02: " + ", ".join(f"{100 * r:.1f}%" for r in rel) + " at f=1, 0.5 MHz")
    # selection rules
    sym_dng = delta_q_leading_terms(fig5(0.01, dng_max=0.3, dng_min=-0.3), BATH, check_regime=False)
    sym_j = delta_q_leading_terms(fig5(0.01, jr_max_over_ec=0.1, jr_min_over_max=0.006), BATH, check_regime=False)
    rules = sym_dng.a1 == 0 and sym_dng.a2 == 0 and sym_j.a4 == 0 and sym_j.a5 == 0
    ok &= rules
    parts.append(f"selection rules {'hold' if rules else 'violated'}")
    line = report(5, ok, "; ".join(parts))
    assert ok, line


def test_criterion_6_finite_temperature_fixed_point():
    p = SluiceParams.from_ratios(g=0.1, f=10e6)
    from sluicepump.sluice import cycle_waveform, frame_at

    fr = frame_at(p, cycle_waveform(p, 0.3 * p.period))
    temp = fr.omega0 / 3.0 / kelvin_to_rad_s(1.0)
    sp = OhmicSpectrum(300e3, temp, 0.1)
    from sluicepump.environment import ohmic_triple

    tri = ohmic_triple(sp, fr.omega0)
    g_down, g_up, _ = rates(fr, tri)
    target = g_down / (g_down + g_up)
    _, y = integrate_frozen("bloch", fr, tri, DensityMatrix2.ground(), 40.0 / (g_down + g_up), n_samples=2,
                            cfg=IntegratorConfig(rel_tol=1e-11, abs_tol=1e-14))
    dev1 = abs(y[-1, 0] - target)
    dev2 = y[-1, 0] - qs_finite_T(fr, tri, temp).rho_gg
    ok = dev1 <= 1e-8 and dev2 <= 1e-3
    line = report(6, ok, f"|rho_gg - detailed balance| = {dev1:.1e}; rho_gg - (1 - e^-3) = {dev2:.2e} (bound 1e-3)")
    assert ok, line


def test_criterion_7_nonadiabatic_mixing():
    parts, ok = [], True
    for f in (4e9, 5e9, 8e9):
        p = SluiceParams.from_ratios(g=0.01, f=f)
        a_bar = adiabaticity(p).alpha_bar
        rec = integrate_cycles("unitary", p, cfg=IntegratorConfig(n_cycles_max=400, stationarity_tol=0.0, n_grid=64))
        mean = float(rec.states[..., 0].mean())
        ok &= a_bar >= 0.3 and 0.45 <= mean <= 0.55
        parts.append(f"f={f / 1e9:g} GHz (alpha_bar {a_bar:.2f}): <rho_gg> = {mean:.3f}")
    line = report(7, ok, "; ".join(parts) + " over 400 cycles")
    assert ok, line


def test_criterion_8_secular_fixed_point():
    rng = np.random.default_rng(8)
    b = random_batch(rng, 2000)
    devs, alphas = [], []
    for i in range(len(b["omega0"])):
        fr, sp, _ = frame_from_batch(b, i)
        sp = SpectralTriple(sp.s_plus, 0.0, sp.s_zero)  # zero temperature
        root = stationary_state(SECULAR, fr, sp)
        q = qs_secular_zero_T(fr, sp).rho_ge
        devs.append(abs(root.rho_ge - q) / abs(q))
        alphas.append(local_alpha(fr))
    devs, alphas = np.array(devs), np.array(alphas)
    worst = float(devs.max())
    # the residual is first order in alpha (drive x dissipation terms absent from the closed form)
    slope = np.polyfit(np.log(alphas), np.log(devs), 1)[0]
    ok = worst <= 1e-8
    line = report(8, ok, f"max relative deviation {worst:.1e} over 2000 random frames (alpha 1e-6..1e-1); deviation ~ alpha^{slope:.2f}")
    assert ok, line


def test_criterion_9_integrator_order():
    p = SluiceParams.from_ratios(g=0.01, f=75e6)
    period = 2 * math.pi / max_gap(p)
    ends, _ = rk4_cycles("unitary", p, n_cycles=1, step=period / 1024)
    hs = period / np.array([16.0, 22.6, 32.0, 45.3, 64.0])
    errs = []
    for h in hs:
        rec = integrate_cycles("unitary", p, cfg=IntegratorConfig(n_cycles_max=1, fixed_step=float(h)))
        errs.append(np.max(np.abs(rec.final_state - ends[-1, :3])))
    order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    ok = order >= 4.0 - 0.3
    line = report(9, ok, f"global error exponent {order:.2f} (errors {errs[0]:.1e} .. {errs[-1]:.1e})")
    assert ok, line


def test_criterion_10_engineered_spectrum():
    parts, ok = [], True
    base = OhmicSpectrum(1.5e3, 0.0, 0.1)
    w = np.logspace(8, 12, 41)
    env0 = EngineeredEnvironment(base, 0, 1e-15, 0.3e-15, 500.0, 4e-9, 0.3)
    closed = ohmic_spectrum(base, w) / (1 + (base.r * 1e-15 * w) ** 2)
    d_m0 = float(np.max(np.abs(engineered_spectrum(env0, w) / closed - 1)))
    env = EngineeredEnvironment(base, 100, 1e-15, 0.3e-15, 500.0, 4e-9, 0.3)
    d_w0 = abs(engineered_spectrum(env, 0.0) / ohmic_spectrum(base, 0.0) - 1)
    periodic = all(
        impedance_filter(env.with_flux(x + k), 3e10) == impedance_filter(env.with_flux(x), 3e10)
        for x in (0.0, 0.125, 0.25, 0.375, 0.875)
        for k in (-2, 1, 3)
    )
    ok &= d_m0 <= 1e-12 and d_w0 <= 1e-12 and periodic
    parts.append(f"m=0 {d_m0:.1e}, w->0 {d_w0:.1e}, flux period exact: {periodic}")
    for spec in preset("fig6"):
        spec.grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        res = run_sweep(spec, workers=1)
        q = np.array([r["q_avg"] for r in res.rows], dtype=float)
        good = res.n_failed == 0 and all(r["converged"] for r in res.rows)
        p2p = float(np.ptp(q))
        ok &= good and q[0] == q[-1] and p2p > 0
        parts.append(f"{spec.label}: p2p {p2p:.2e}, q(0)==q(1): {q[0] == q[-1]}")
    line = report(10, ok, "; ".join(parts))
    assert ok, line
