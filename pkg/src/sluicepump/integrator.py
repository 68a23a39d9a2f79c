"""Adaptive integration of the master equations over repeated pumping cycles.

The state vector is (rho_gg, Re rho_ge, Im rho_ge, Q_L, Q_R); the two charge
quadratures are integrated alongside the density matrix so they share its
error control.  Steps are Dormand-Prince 5(4) with local error control and
never straddle a waveform corner: each of the six segments is integrated
separately, with the segment's own slopes used up to and including its end
point.  A fixed-step classical RK4 integrator is kept as an independent
reference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .core import AdiabaticFrame, DensityMatrix2, POS_TOL, SluiceError, SpectralTriple
from .environment import OhmicSpectrum, triple_kernel
from .master_equations import RhsVariant, rhs_kernel
from .observables import charge_kernel
from .sluice import SluiceParams, frame_kernel, frames_along, max_gap, segment_control

logger = logging.getLogger(__name__)

MODE_SLUICE = 0
MODE_FROZEN = 1

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_STEP_CAP = 3


class StiffnessError(SluiceError, RuntimeError):
    """Step size underflow or a non-finite state."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits for :func:`integrate_cycles`.

    ``max_step`` None means min(T_p/6, 2 pi / (20 max omega0)).
    ``fixed_step`` switches off adaptivity (steps of at most that size).
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float | None = None
    n_cycles_max: int = 60
    min_cycles: int = 2
    stationarity_tol: float = 1e-7
    n_grid: int = 256
    pos_tol: float = POS_TOL
    record_steps: bool = False
    step_cap: int = 200_000
    fixed_step: float | None = None
    log_cap: int = 1000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.n_cycles_max < 1 or self.n_grid < 1:
            raise ValueError("n_cycles_max and n_grid must be >= 1")

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# compiled core


@njit(cache=True)
def _rhs5(mode, seg, u, y, pv, wv, sv, fz, variant, out):
    # pv = (e_c, phi, g, seg_len, direction)
    if mode == MODE_SLUICE:
        jl, jr, d, djl, djr, dd = segment_control(seg, u, pv[3], wv, pv[4])
        e12, gamma, eta, omega0, m1, m2r, m2i, wgg, wee, wr, wi = frame_kernel(
            pv[0], pv[1], pv[2], jl, jr, d, djl, djr, dd
        )
        sp, sm, s0 = triple_kernel(omega0, sv)
    else:
        omega0, m1, m2r, m2i, wgg, wee, wr, wi = fz[0], fz[1], fz[2], fz[3], fz[4], fz[5], fz[6], fz[7]
        sp, sm, s0 = fz[8], fz[9], fz[10]
    dgg, dge = rhs_kernel(
        variant, omega0, m1, complex(m2r, m2i), wgg, wee, complex(wr, wi), sp, sm, s0, y[0], complex(y[1], y[2])
    )
    out[0] = dgg
    out[1] = dge.real
    out[2] = dge.imag
    if mode == MODE_SLUICE:
        ql, qr = charge_kernel(jl, jr, eta, gamma, pv[1], y[1], y[2])
        out[3] = ql
        out[4] = qr
    else:
        out[3] = 0.0
        out[4] = 0.0


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b - b_hat
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


@njit(cache=True)
def _run(
    mode,
    pv,
    wv,
    sv,
    fz,
    variant,
    period,
    y0,
    n_cycles_max,
    min_cycles,
    rtol,
    atol,
    max_step,
    h_fixed,
    stat_tol,
    n_grid,
    pos_tol,
    log_cap,
    rec_steps,
    step_cap,
):
    seg_len = period / 6.0
    grid = np.zeros((n_cycles_max, n_grid, 5))
    qcyc = np.zeros((n_cycles_max, 2))
    dist = np.full(n_cycles_max, np.nan)
    cyc_viol = np.zeros(n_cycles_max)
    vlog = np.zeros((log_cap, 2))
    n_log = 0
    n_viol = 0
    steps = np.zeros((step_cap if rec_steps else 1, 7))
    n_rec = 0
    stats = np.zeros(3, dtype=np.int64)  # accepted, rejected, rhs evaluations
    status = STATUS_OK
    fail_t = 0.0
    fail_h = 0.0

    y = y0.copy()
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    k5 = np.empty(5)
    k6 = np.empty(5)
    k7 = np.empty(5)
    yt = np.empty(5)
    ynew = np.empty(5)
    h = min(max_step, 1e-3 * seg_len)
    if h_fixed > 0.0:
        n_sub = math.ceil(seg_len / h_fixed - 1e-9)
        h = seg_len / n_sub
    n_done = 0
    converged = False

    for c in range(n_cycles_max):
        y[3] = 0.0
        y[4] = 0.0
        gi = 0
        cvmax = 0.0
        for seg in range(6):
            u = 0.0
            _rhs5(mode, seg, u, y, pv, wv, sv, fz, variant, k1)
            stats[2] += 1
            while True:
                # record grid samples reached
                while gi < n_grid and (gi * period / n_grid - seg * seg_len) <= u + 1e-12 * seg_len:
                    for q in range(5):
                        grid[c, gi, q] = y[q]
                    gi += 1
                if u >= seg_len:
                    break
                target = seg_len
                if gi < n_grid:
                    tg = gi * period / n_grid - seg * seg_len
                    if tg < target and seg_len - tg > 1e-12 * seg_len:
                        target = tg
                if h_fixed > 0.0:
                    h_try = min(h, target - u)
                    if target - u - h_try < 1e-9 * h:
                        h_try = target - u
                else:
                    h_try = min(h, max_step)
                    if h_try >= target - u:
                        h_try = target - u
                    elif target - u - h_try < 0.1 * h_try:
                        # avoid a sliver step before the stop
                        h_try = 0.5 * (target - u)
                if h_try <= 16.0 * 2.2e-16 * seg_len:
                    status = STATUS_UNDERFLOW
                    fail_t = c * period + seg * seg_len + u
                    fail_h = h_try
                    break

                for q in range(5):
                    yt[q] = y[q] + h_try * _A21 * k1[q]
                _rhs5(mode, seg, u + _C2 * h_try, yt, pv, wv, sv, fz, variant, k2)
                for q in range(5):
                    yt[q] = y[q] + h_try * (_A31 * k1[q] + _A32 * k2[q])
                _rhs5(mode, seg, u + _C3 * h_try, yt, pv, wv, sv, fz, variant, k3)
                for q in range(5):
                    yt[q] = y[q] + h_try * (_A41 * k1[q] + _A42 * k2[q] + _A43 * k3[q])
                _rhs5(mode, seg, u + _C4 * h_try, yt, pv, wv, sv, fz, variant, k4)
                for q in range(5):
                    yt[q] = y[q] + h_try * (_A51 * k1[q] + _A52 * k2[q] + _A53 * k3[q] + _A54 * k4[q])
                _rhs5(mode, seg, u + _C5 * h_try, yt, pv, wv, sv, fz, variant, k5)
                for q in range(5):
                    yt[q] = y[q] + h_try * (
                        _A61 * k1[q] + _A62 * k2[q] + _A63 * k3[q] + _A64 * k4[q] + _A65 * k5[q]
                    )
                u_end = u + h_try
                if target - u_end < 1e-12 * seg_len:
                    u_end = target
                _rhs5(mode, seg, u_end, yt, pv, wv, sv, fz, variant, k6)
                for q in range(5):
                    ynew[q] = y[q] + h_try * (
                        _B1 * k1[q] + _B3 * k3[q] + _B4 * k4[q] + _B5 * k5[q] + _B6 * k6[q]
                    )
                _rhs5(mode, seg, u_end, ynew, pv, wv, sv, fz, variant, k7)
                stats[2] += 6

                if h_fixed > 0.0:
                    err = 0.0
                else:
                    acc = 0.0
                    for q in range(5):
                        e = h_try * (
                            _E1 * k1[q] + _E3 * k3[q] + _E4 * k4[q] + _E5 * k5[q] + _E6 * k6[q] + _E7 * k7[q]
                        )
                        sc = atol + rtol * max(abs(y[q]), abs(ynew[q]))
                        acc += (e / sc) ** 2
                    err = math.sqrt(acc / 5.0)

                finite = True
                for q in range(5):
                    if not np.isfinite(ynew[q]):
                        finite = False
                if not finite:
                    if h_fixed > 0.0:
                        status = STATUS_NONFINITE
                        fail_t = c * period + seg * seg_len + u
                        fail_h = h_try
                        break
                    h = 0.25 * h_try
                    stats[1] += 1
                    continue

                if err <= 1.0:
                    t0 = c * period + seg * seg_len + u
                    u = u_end
                    for q in range(5):
                        y[q] = ynew[q]
                        k1[q] = k7[q]
                    stats[0] += 1
                    if rec_steps:
                        if n_rec < step_cap:
                            steps[n_rec, 0] = t0
                            steps[n_rec, 1] = c * period + seg * seg_len + u
                            for q in range(5):
                                steps[n_rec, 2 + q] = y[q]
                            n_rec += 1
                        else:
                            status = STATUS_STEP_CAP
                    viol = math.sqrt((y[0] - 0.5) ** 2 + y[1] ** 2 + y[2] ** 2) - 0.5
                    if viol > cvmax:
                        cvmax = viol
                    if viol > pos_tol:
                        n_viol += 1
                        if n_log < log_cap:
                            vlog[n_log, 0] = c * period + seg * seg_len + u
                            vlog[n_log, 1] = viol
                            n_log += 1
                    if h_fixed <= 0.0:
                        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
                        h_new = h_try * fac
                        if h_try < h:
                            # a step shortened to hit a stop does not shrink the step size
                            h_new = max(h_new, h)
                        h = h_new
                else:
                    stats[1] += 1
                    h = h_try * max(0.2, 0.9 * err ** (-0.2))
            if status != STATUS_OK and status != STATUS_STEP_CAP:
                break
        if status != STATUS_OK and status != STATUS_STEP_CAP:
            break
        qcyc[c, 0] = y[3]
        qcyc[c, 1] = y[4]
        cyc_viol[c] = cvmax
        n_done = c + 1
        if c >= 1:
            dmax = 0.0
            for j in range(n_grid):
                for q in range(3):
                    dd = abs(grid[c, j, q] - grid[c - 1, j, q])
                    if dd > dmax:
                        dmax = dd
            dist[c] = dmax
            if dmax < stat_tol and n_done >= min_cycles:
                converged = True
                break

    return (
        grid,
        qcyc,
        dist,
        cyc_viol,
        vlog[:n_log],
        n_viol,
        steps[:n_rec],
        stats,
        status,
        fail_t,
        fail_h,
        n_done,
        converged,
        y,
    )


@njit(cache=True)
def _rk4_run(mode, pv, wv, sv, fz, variant, period, y0, n_cycles, h_target):
    """Fixed-step classical RK4; each segment is cut into equal steps <= h_target."""
    seg_len = period / 6.0
    n_sub = math.ceil(seg_len / h_target - 1e-9)
    h = seg_len / n_sub
    y = y0.copy()
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    yt = np.empty(5)
    qcyc = np.zeros((n_cycles, 2))
    ends = np.zeros((n_cycles, 5))
    for c in range(n_cycles):
        y[3] = 0.0
        y[4] = 0.0
        for seg in range(6):
            for i in range(n_sub):
                u = i * h
                _rhs5(mode, seg, u, y, pv, wv, sv, fz, variant, k1)
                for q in range(5):
                    yt[q] = y[q] + 0.5 * h * k1[q]
                _rhs5(mode, seg, u + 0.5 * h, yt, pv, wv, sv, fz, variant, k2)
                for q in range(5):
                    yt[q] = y[q] + 0.5 * h * k2[q]
                _rhs5(mode, seg, u + 0.5 * h, yt, pv, wv, sv, fz, variant, k3)
                for q in range(5):
                    yt[q] = y[q] + h * k3[q]
                _rhs5(mode, seg, (i + 1) * h, yt, pv, wv, sv, fz, variant, k4)
                for q in range(5):
                    y[q] = y[q] + h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        qcyc[c, 0] = y[3]
        qcyc[c, 1] = y[4]
        for q in range(5):
            ends[c, q] = y[q]
    return ends, qcyc


# ---------------------------------------------------------------------------
# Python API


@dataclass
class TrajectoryRecord:
    """Sampled trajectory over complete cycles.

    ``times``/``states`` hold the uniform per-cycle output grid; ``charges``
    the running (per-cycle reset) charge quadratures on the same grid.
    """

    variant: RhsVariant
    params: SluiceParams | None
    spectra: object
    config: IntegratorConfig
    period: float
    times: np.ndarray  # (n_cycles, n_grid)
    states: np.ndarray  # (n_cycles, n_grid, 3)
    charges: np.ndarray  # (n_cycles, n_grid, 2)
    cycle_charges: np.ndarray  # (n_cycles, 2)
    cycle_distance: np.ndarray  # (n_cycles,), nan for cycle 0
    cycle_max_violation: np.ndarray
    positivity_log: np.ndarray  # (n, 2): time, violation
    n_violations: int
    final_state: np.ndarray
    converged: bool
    n_accepted: int
    n_rejected: int
    n_rhs: int
    steps: np.ndarray | None = None  # (n, 7): t_start, t_end, state after step
    reverse: bool = False
    _frames: AdiabaticFrame | None = field(default=None, repr=False)

    @property
    def n_cycles(self) -> int:
        return self.states.shape[0]

    @property
    def grid_phase(self) -> np.ndarray:
        """Sample times within a cycle."""
        return self.times[0] - self.times[0, 0]

    @property
    def max_violation(self) -> float:
        return float(np.max(self.cycle_max_violation, initial=0.0))

    @property
    def frames(self) -> AdiabaticFrame:
        """Adiabatic frames at the grid phases (identical in every cycle)."""
        if self._frames is None:
            if self.params is None:
                raise ValueError("frozen-frame record carries no sluice frames")
            self._frames = frames_along(self.params, self.grid_phase, reverse=self.reverse)
        return self._frames

    def rho(self, k: int = -1) -> DensityMatrix2:
        """States of cycle ``k`` as one DensityMatrix2 of arrays."""
        s = self.states[k]
        return DensityMatrix2(s[:, 0], s[:, 1], s[:, 2])


def default_max_step(params: SluiceParams) -> float:
    return min(params.period / 6.0, 2.0 * math.pi / (20.0 * max_gap(params)))


def _sluice_vectors(params: SluiceParams, reverse: bool):
    pv = np.array([params.e_c, params.phi, params.g, params.period / 6.0, -1.0 if reverse else 1.0])
    return pv, params.waveform_vector()


def _state5(rho0: DensityMatrix2) -> np.ndarray:
    return np.array([rho0.rho_gg, rho0.rho_ge_re, rho0.rho_ge_im, 0.0, 0.0], dtype=float)


def _finish(out, variant, params, spectra, cfg, period, reverse) -> TrajectoryRecord:
    (grid, qcyc, dist, cviol, vlog, n_viol, steps, stats, status, fail_t, fail_h, n_done, converged, y) = out
    if status in (STATUS_UNDERFLOW, STATUS_NONFINITE):
        what = "step size underflow" if status == STATUS_UNDERFLOW else "non-finite state"
        raise StiffnessError(
            f"{what} at t={fail_t:.6e} s (h={fail_h:.3e} s, variant={RhsVariant(variant).name}, "
            f"period={period:.3e} s)"
        )
    if status == STATUS_STEP_CAP:
        logger.warning("step record capped at %d entries", cfg.step_cap)
    if n_viol:
        logger.warning(
            "positivity violated beyond %.1e on %d accepted steps (max %.3e, first at t=%.4e s)",
            cfg.pos_tol,
            n_viol,
            float(np.max(cviol[:n_done])),
            vlog[0, 0] if len(vlog) else float("nan"),
        )
    n_grid = grid.shape[1]
    phase = np.arange(n_grid) * period / n_grid
    times = np.arange(n_done)[:, None] * period + phase[None, :]
    return TrajectoryRecord(
        variant=RhsVariant(variant),
        params=params,
        spectra=spectra,
        config=cfg,
        period=period,
        times=times,
        states=grid[:n_done, :, :3].copy(),
        charges=grid[:n_done, :, 3:].copy(),
        cycle_charges=qcyc[:n_done].copy(),
        cycle_distance=dist[:n_done].copy(),
        cycle_max_violation=cviol[:n_done].copy(),
        positivity_log=vlog.copy(),
        n_violations=int(n_viol),
        final_state=y[:3].copy(),
        converged=bool(converged),
        n_accepted=int(stats[0]),
        n_rejected=int(stats[1]),
        n_rhs=int(stats[2]),
        steps=steps.copy() if cfg.record_steps else None,
        reverse=reverse,
    )


def integrate_cycles(
    variant,
    params: SluiceParams,
    spectra=None,
    cfg: IntegratorConfig | None = None,
    rho0: DensityMatrix2 | None = None,
    reverse: bool = False,
) -> TrajectoryRecord:
    """Evolve rho through successive pumping cycles until periodic or ``n_cycles_max``.

    ``spectra`` is an OhmicSpectrum or EngineeredEnvironment (default: the
    zero-temperature 300 kOhm bath); it is ignored by the unitary variant.
    """
    variant = RhsVariant.parse(variant)
    cfg = cfg or IntegratorConfig()
    rho0 = rho0 or DensityMatrix2.ground()
    if spectra is None:
        spectra = OhmicSpectrum(r=300e3, temp=0.0, t0=0.1)
    pv, wv = _sluice_vectors(params, reverse)
    max_step = cfg.max_step if cfg.max_step is not None else default_max_step(params)
    out = _run(
        MODE_SLUICE,
        pv,
        wv,
        spectra.kernel_vector(),
        np.zeros(11),
        int(variant),
        params.period,
        _state5(rho0),
        cfg.n_cycles_max,
        cfg.min_cycles,
        cfg.rel_tol,
        cfg.abs_tol,
        max_step,
        cfg.fixed_step or 0.0,
        cfg.stationarity_tol,
        cfg.n_grid,
        cfg.pos_tol,
        cfg.log_cap,
        cfg.record_steps,
        cfg.step_cap,
    )
    return _finish(out, variant, params, spectra, cfg, params.period, reverse)


def _frozen_vector(frame: AdiabaticFrame, sp: SpectralTriple | None) -> np.ndarray:
    sp = sp or SpectralTriple.zero()
    return np.array(
        [
            frame.omega0,
            frame.m1,
            frame.m2_re,
            frame.m2_im,
            frame.w_gg,
            frame.w_ee,
            frame.w_ge_re,
            frame.w_ge_im,
            sp.s_plus,
            sp.s_minus,
            sp.s_zero,
        ],
        dtype=float,
    )


def integrate_frozen(
    variant,
    frame: AdiabaticFrame,
    sp: SpectralTriple | None,
    rho0: DensityMatrix2,
    t_end: float,
    n_samples: int = 64,
    cfg: IntegratorConfig | None = None,
):
    """Integrate with a time-independent frame and spectra.

    Returns (times, states) with ``n_samples`` uniform samples on [0, t_end]
    (end point included).
    """
    variant = RhsVariant.parse(variant)
    cfg = cfg or IntegratorConfig()
    max_step = cfg.max_step if cfg.max_step is not None else 2.0 * math.pi / (20.0 * frame.omega0)
    out = _run(
        MODE_FROZEN,
        np.zeros(5),
        np.zeros(6),
        np.zeros(10),
        _frozen_vector(frame, sp),
        int(variant),
        t_end,
        _state5(rho0),
        1,
        1,
        cfg.rel_tol,
        cfg.abs_tol,
        max_step,
        cfg.fixed_step or 0.0,
        np.inf,
        n_samples - 1,
        cfg.pos_tol,
        cfg.log_cap,
        False,
        1,
    )
    rec = _finish(out, variant, None, sp, cfg, t_end, False)
    times = np.linspace(0.0, t_end, n_samples)
    states = np.vstack([rec.states[0], rec.final_state[None, :]])
    return times, states


def rk4_cycles(
    variant,
    params: SluiceParams,
    spectra=None,
    rho0: DensityMatrix2 | None = None,
    n_cycles: int = 1,
    step: float | None = None,
    steps_per_period: int = 200,
    reverse: bool = False,
):
    """Reference fixed-step RK4 run.

    Default step: ``steps_per_period`` steps per oscillation period at the
    largest gap of the cycle.  Returns (end-of-cycle states (n, 5), cycle charges (n, 2)).
    """
    variant = RhsVariant.parse(variant)
    rho0 = rho0 or DensityMatrix2.ground()
    if spectra is None:
        spectra = OhmicSpectrum(r=300e3, temp=0.0, t0=0.1)
    if step is None:
        step = 2.0 * math.pi / (steps_per_period * max_gap(params))
    pv, wv = _sluice_vectors(params, reverse)
    return _rk4_run(
        MODE_SLUICE,
        pv,
        wv,
        spectra.kernel_vector(),
        np.zeros(11),
        int(variant),
        params.period,
        _state5(rho0),
        n_cycles,
        step,
    )


def rk4_frozen(variant, frame: AdiabaticFrame, sp: SpectralTriple | None, rho0: DensityMatrix2, t_end: float, step: float):
    """Reference RK4 for a frozen frame; returns the state at ``t_end``."""
    variant = RhsVariant.parse(variant)
    ends, _ = _rk4_run(
        MODE_FROZEN,
        np.zeros(5),
        np.zeros(6),
        np.zeros(10),
        _frozen_vector(frame, sp),
        int(variant),
        t_end,
        _state5(rho0),
        1,
        step,
    )
    return ends[0, :3]


def reach_quasi_stationary(record: TrajectoryRecord, tol: float | None = None):
    """(k, converged): first cycle whose grid states match the previous cycle within ``tol``."""
    if record.n_cycles < 2:
        raise ValueError("need at least two cycles")
    tol = record.config.stationarity_tol if tol is None else tol
    d = record.cycle_distance
    hits = np.nonzero(d[1:] < tol)[0]
    if len(hits) == 0:
        return record.n_cycles - 1, False
    return int(hits[0] + 1), True
