"""Cooper pair sluice in the two-charge-state approximation.

Control waveforms, the instantaneous adiabatic frame (gap, mixing angles,
coupling elements and the basis-rotation generator w) and the eigenstates.

All energies are angular frequencies (rad/s).  The pumping cycle is the
six-segment piecewise-linear loop

    1: J_L min->max   2: dng min->max   3: J_L max->min
    4: J_R min->max   5: dng max->min   6: J_R max->min

each lasting T_p/6, with the idle parameters parked at their extremes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .core import AdiabaticFrame, SingularCoordinateError, adiabaticity_report
from .units import kelvin_to_rad_s

N_SEGMENTS = 6


@dataclass(frozen=True)
class SluiceParams:
    """Sluice device and cycle parameters.

    Energies (``e_c`` and the Josephson couplings) are in rad/s, ``phi`` in
    radians, ``f`` in Hz.  ``g = C_E / C_Sigma`` is the environment coupling.
    """

    e_c: float
    j_l_max: float
    j_l_min: float
    j_r_max: float
    j_r_min: float
    dng_max: float
    dng_min: float
    phi: float
    g: float
    f: float

    def __post_init__(self):
        if not (0 < self.j_l_min <= self.j_l_max and 0 < self.j_r_min <= self.j_r_max):
            raise ValueError("need 0 < J_min <= J_max for both junctions")
        if not (-0.5 < self.dng_min < self.dng_max < 0.5):
            raise ValueError("need -1/2 < dng_min < dng_max < 1/2")
        if self.e_c <= 0 or self.f <= 0 or self.g < 0:
            raise ValueError("e_c and f must be positive, g nonnegative")
        if max(self.j_l_max, self.j_r_max) > 0.25 * self.e_c:
            warnings.warn(
                "J_max is not small compared to E_C; the two-state approximation is doubtful",
                stacklevel=3,
            )

    @classmethod
    def from_ratios(
        cls,
        ec_kelvin: float = 1.0,
        jl_max_over_ec: float = 0.1,
        jl_min_over_max: float = 0.03,
        jr_max_over_ec: float | None = None,
        jr_min_over_max: float | None = None,
        dng_max: float = 0.3,
        dng_min: float = -0.3,
        phi: float = math.pi / 2,
        g: float = 0.01,
        f: float = 10e6,
    ) -> "SluiceParams":
        """Build from E_C/k_B in kelvin and the dimensionless ratios used in the figures."""
        if jr_max_over_ec is None:
            jr_max_over_ec = jl_max_over_ec
        if jr_min_over_max is None:
            jr_min_over_max = jl_min_over_max
        e_c = kelvin_to_rad_s(ec_kelvin)
        jl_max = jl_max_over_ec * e_c
        jr_max = jr_max_over_ec * e_c
        return cls(
            e_c=e_c,
            j_l_max=jl_max,
            j_l_min=jl_min_over_max * jl_max,
            j_r_max=jr_max,
            j_r_min=jr_min_over_max * jr_max,
            dng_max=dng_max,
            dng_min=dng_min,
            phi=phi,
            g=g,
            f=f,
        )

    @property
    def period(self) -> float:
        return 1.0 / self.f

    def with_(self, **changes) -> "SluiceParams":
        return replace(self, **changes)

    def waveform_vector(self) -> np.ndarray:
        return np.array(
            [
                self.j_l_min,
                self.j_l_max,
                self.j_r_min,
                self.j_r_max,
                self.dng_min,
                self.dng_max,
            ]
        )


@dataclass(frozen=True)
class ControlPoint:
    """Control values and their exact time derivatives (per second)."""

    j_l: float
    j_r: float
    dng: float
    dj_l: float = 0.0
    dj_r: float = 0.0
    ddng: float = 0.0


# ---------------------------------------------------------------------------
# compiled kernels (scalar)


@njit(cache=True)
def segment_control(seg, u, seg_len, wv, direction):
    """Controls inside segment ``seg`` (0..5) at time ``u`` in [0, seg_len].

    ``wv`` = (jl_min, jl_max, jr_min, jr_max, dng_min, dng_max).
    ``direction`` = -1 traverses the loop backwards (segments are then
    indexed along the reversed path).
    """
    jl_min, jl_max, jr_min, jr_max, d_min, d_max = wv[0], wv[1], wv[2], wv[3], wv[4], wv[5]
    s = u / seg_len
    if direction < 0:
        # reversed loop: segment k of the reversed path is forward segment 5-k run backwards
        seg = 5 - seg
        s = 1.0 - s
    rate = direction / seg_len
    jl = jl_min
    jr = jr_min
    d = d_min
    djl = 0.0
    djr = 0.0
    dd = 0.0
    if seg == 0:
        jl = jl_min + (jl_max - jl_min) * s
        djl = (jl_max - jl_min) * rate
    elif seg == 1:
        jl = jl_max
        d = d_min + (d_max - d_min) * s
        dd = (d_max - d_min) * rate
    elif seg == 2:
        jl = jl_max + (jl_min - jl_max) * s
        djl = (jl_min - jl_max) * rate
        d = d_max
    elif seg == 3:
        jr = jr_min + (jr_max - jr_min) * s
        djr = (jr_max - jr_min) * rate
        d = d_max
    elif seg == 4:
        jr = jr_max
        d = d_max + (d_min - d_max) * s
        dd = (d_min - d_max) * rate
    else:
        jr = jr_max + (jr_min - jr_max) * s
        djr = (jr_min - jr_max) * rate
    return jl, jr, d, djl, djr, dd


@njit(cache=True)
def frame_kernel(e_c, phi, g, jl, jr, d, djl, djr, dd):
    """Adiabatic frame from controls; returns the 11 AdiabaticFrame fields in order."""
    cphi = math.cos(phi)
    e12 = 0.5 * math.sqrt(jl * jl + jr * jr + 2.0 * jl * jr * cphi)
    de12 = (jl * djl + jr * djr + cphi * (djl * jr + jl * djr)) / (4.0 * e12)
    x = (jl + jr) * math.cos(0.5 * phi)
    y = (jr - jl) * math.sin(0.5 * phi)
    gamma = math.atan2(y, x)
    if x < 0.0 and gamma < 0.0:
        gamma += 2.0 * math.pi
    dgamma = math.sin(phi) * (jl * djr - jr * djl) / (4.0 * e12 * e12)
    eps = e12 / e_c
    deps = de12 / e_c
    r = math.sqrt(d * d + eps * eps)
    eta = d / r
    sq = eps / r  # sqrt(1 - eta^2) without cancellation
    deta = (dd * eps * eps - d * eps * deps) / (r * r * r)
    omega0 = 2.0 * e_c * r
    m1 = -g * eta
    m2 = g * sq
    w_gg = -0.5 * (1.0 + eta) * dgamma
    w_ee = -0.5 * (1.0 - eta) * dgamma
    w_ge_re = 0.5 * sq * dgamma
    w_ge_im = -0.5 * deta / sq
    return e12, gamma, eta, omega0, m1, m2, 0.0, w_gg, w_ee, w_ge_re, w_ge_im


@njit(cache=True)
def _frames_along(e_c, phi, g, wv, period, times, direction):
    out = np.empty((times.shape[0], 11))
    seg_len = period / 6.0
    for i in range(times.shape[0]):
        tau = times[i] % period
        seg = int(tau // seg_len)
        if seg > 5:
            seg = 5
        jl, jr, d, djl, djr, dd = segment_control(seg, tau - seg * seg_len, seg_len, wv, direction)
        f = frame_kernel(e_c, phi, g, jl, jr, d, djl, djr, dd)
        for k in range(11):
            out[i, k] = f[k]
    return out


# ---------------------------------------------------------------------------
# public API


def _locate(params: SluiceParams, t: float):
    if t < 0:
        raise ValueError("t must be nonnegative")
    period = params.period
    seg_len = period / N_SEGMENTS
    tau = t % period
    seg = min(int(tau // seg_len), N_SEGMENTS - 1)
    return seg, tau - seg * seg_len, seg_len


def cycle_waveform(params: SluiceParams, t: float, reverse: bool = False) -> ControlPoint:
    """Control point of the periodic loop at time ``t``.

    At a corner the derivative of the segment that starts there is returned.
    ``reverse=True`` runs the same loop in the opposite direction.
    """
    seg, u, seg_len = _locate(params, t)
    vals = segment_control(seg, u, seg_len, params.waveform_vector(), -1 if reverse else 1)
    return ControlPoint(*vals)


def frame_at(params: SluiceParams, cp: ControlPoint) -> AdiabaticFrame:
    """Adiabatic frame for one control point."""
    jl, jr = cp.j_l, cp.j_r
    e12_sq = jl * jl + jr * jr + 2.0 * jl * jr * math.cos(params.phi)
    if e12_sq <= 0.0:
        raise SingularCoordinateError("E12 = 0: eta^2 = 1 and the frame is singular")
    vals = frame_kernel(params.e_c, params.phi, params.g, jl, jr, cp.dng, cp.dj_l, cp.dj_r, cp.ddng)
    if abs(vals[2]) >= 1.0:
        raise SingularCoordinateError("eta^2 = 1: the frame is singular")
    return AdiabaticFrame(*vals)


def frames_along(params: SluiceParams, times, reverse: bool = False) -> AdiabaticFrame:
    """Frames at an array of times, returned as one AdiabaticFrame of arrays."""
    times = np.asarray(times, dtype=float)
    arr = _frames_along(
        params.e_c,
        params.phi,
        params.g,
        params.waveform_vector(),
        params.period,
        np.atleast_1d(times),
        -1 if reverse else 1,
    )
    return AdiabaticFrame(*[arr[:, k].reshape(times.shape) for k in range(11)])


def cycle_times(params: SluiceParams, n_per_segment: int = 64) -> np.ndarray:
    """Segment-midpoint-style sample times, avoiding the corners themselves."""
    seg_len = params.period / N_SEGMENTS
    u = (np.arange(n_per_segment) + 0.5) / n_per_segment * seg_len
    return np.concatenate([k * seg_len + u for k in range(N_SEGMENTS)])


def adiabaticity(params: SluiceParams, n_per_segment: int = 256):
    """Local and global adiabatic parameters along one cycle."""
    t = cycle_times(params, n_per_segment)
    return adiabaticity_report(t, frames_along(params, t), params.period)


def max_gap(params: SluiceParams, n_per_segment: int = 64) -> float:
    """Largest omega0 over the cycle (including the segment end points)."""
    seg_len = params.period / N_SEGMENTS
    u = np.linspace(0.0, seg_len, n_per_segment + 1)[:-1]
    t = np.concatenate([k * seg_len + u for k in range(N_SEGMENTS)])
    return float(np.max(frames_along(params, t).omega0))


def eigenstate_amplitudes(frame: AdiabaticFrame):
    """Instantaneous ground and excited states in the charge basis {|0>, |1>}."""
    eta, gamma = frame.eta, frame.gamma
    ph = np.exp(-1j * gamma)
    a = np.sqrt((1.0 - eta) / 2.0)
    b = np.sqrt((1.0 + eta) / 2.0)
    ground = np.array([a, ph * b], dtype=complex)
    excited = np.array([b, -ph * a], dtype=complex)
    return ground, excited


def two_level_hamiltonian(params: SluiceParams, cp: ControlPoint) -> np.ndarray:
    """Sluice Hamiltonian restricted to {|0>, |1>}, identity part removed (rad/s).

    Charging term E_C (n - n_g)^2 gives +-E_C dng on the diagonal.  The
    Josephson terms enter with the island-phase orientation under which the
    eigenvectors take the form returned by :func:`eigenstate_amplitudes`:
    <0|H|1> = -(J_L e^{-i phi/2} + J_R e^{i phi/2}) / 2.
    """
    h01 = -0.5 * (cp.j_l * np.exp(-0.5j * params.phi) + cp.j_r * np.exp(0.5j * params.phi))
    ed = params.e_c * cp.dng
    return np.array([[ed, h01], [np.conj(h01), -ed]], dtype=complex)
