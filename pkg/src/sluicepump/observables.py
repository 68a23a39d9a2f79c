"""Pumped charge, superadiabatic populations and charge asymmetry.

Charges are in units of 2e (one Cooper pair); currents in 2e per second.
Both junction charges count transfer from the left lead towards the right
lead as positive, so the forward cycle pumps about +1.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import AdiabaticFrame, DensityMatrix2, SluiceError
from .sluice import ControlPoint, SluiceParams, eigenstate_amplitudes


class CycleRangeError(SluiceError, IndexError):
    """Requested cycle is not fully contained in the trajectory."""


@njit(cache=True)
def charge_kernel(jl, jr, eta, gamma, phi, re, im):
    """Geometric current integrands (left, right) for coherence re + i*im."""
    a = gamma + 0.5 * phi
    b = gamma - 0.5 * phi
    dq_l = jl * (math.cos(a) * im - eta * re * math.sin(a))
    dq_r = jr * (eta * re * math.sin(b) - math.cos(b) * im)
    return dq_l, dq_r


def charge_integrands(frame: AdiabaticFrame, cp: ControlPoint, params: SluiceParams, rho: DensityMatrix2):
    """(dQ_L/dt, dQ_R/dt) of the geometric pumped charge, in 2e per second.

    Vectorizes over array-valued frames / states.
    """
    a = frame.gamma + 0.5 * params.phi
    b = frame.gamma - 0.5 * params.phi
    re, im = rho.rho_ge_re, rho.rho_ge_im
    dq_l = cp.j_l * (np.cos(a) * im - frame.eta * re * np.sin(a))
    dq_r = cp.j_r * (frame.eta * re * np.sin(b) - np.cos(b) * im)
    return dq_l, dq_r


def current_operators(params: SluiceParams, cp: ControlPoint):
    """Junction current operators (2e/s) in the charge basis {|0>, |1>}.

    Uses the same island-phase orientation as
    :func:`sluicepump.sluice.two_level_hamiltonian`.
    """
    eph = np.exp(0.5j * params.phi)
    i_l = np.array([[0.0, cp.j_l / (2j * eph)], [-cp.j_l * eph / 2j, 0.0]], dtype=complex)
    i_r = np.array([[0.0, -cp.j_r * eph / 2j], [cp.j_r / (2j * eph), 0.0]], dtype=complex)
    return i_l, i_r


def current_matrix_elements(frame: AdiabaticFrame, params: SluiceParams, cp: ControlPoint):
    """Current operators of both junctions in the adiabatic basis (g, e)."""
    ground, excited = eigenstate_amplitudes(frame)
    basis = np.column_stack([ground, excited])
    return tuple(basis.conj().T @ op @ basis for op in current_operators(params, cp))


def dynamical_current(frame: AdiabaticFrame, params: SluiceParams, cp: ControlPoint, rho: DensityMatrix2):
    """Population-weighted part rho_gg I_gg + rho_ee I_ee for (left, right).

    Diagnostic only; it is excluded from the geometric pumped charge.
    """
    out = []
    for mat in current_matrix_elements(frame, params, cp):
        out.append(float((rho.rho_gg * mat[0, 0] + rho.rho_ee * mat[1, 1]).real))
    return tuple(out)


def pumped_charge_per_cycle(record, k: int = -1):
    """(q_left, q_right, q_avg) accumulated over cycle ``k`` of a trajectory.

    The charge integrands ride inside the ODE state, so these carry the same
    error control as the density matrix.  Negative ``k`` counts from the end.
    """
    n = record.n_cycles
    if not -n <= k < n:
        raise CycleRangeError(f"cycle {k} not in trajectory with {n} complete cycles")
    q_l, q_r = record.cycle_charges[k]
    return float(q_l), float(q_r), 0.5 * float(q_l + q_r)


def charge_asymmetry(record, k: int = -1) -> float:
    """Q_L - Q_R for cycle ``k``."""
    q_l, q_r, _ = pumped_charge_per_cycle(record, k)
    return q_l - q_r


def superadiabatic_population(frame: AdiabaticFrame, rho: DensityMatrix2):
    """Population of the normalized first-order superadiabatic ground state.

    |g'> is proportional to |g> - (w_ge^*/omega0)|e>, so
    P = (rho_gg - 2 Re(w_ge^* rho_ge)/omega0 + |w_ge/omega0|^2 rho_ee) / (1 + |w_ge/omega0|^2).
    """
    c = frame.w_ge / frame.omega0
    num = rho.rho_gg - 2.0 * np.real(np.conj(c) * rho.rho_ge) + np.abs(c) ** 2 * (1.0 - rho.rho_gg)
    return num / (1.0 + np.abs(c) ** 2)


def superadiabatic_ground_state(frame: AdiabaticFrame) -> DensityMatrix2:
    """Pure state |g'><g'| written in the adiabatic basis."""
    c = -np.conj(frame.w_ge) / frame.omega0
    norm = 1.0 + np.abs(c) ** 2
    # rho_ge = <g|g'><g'|e> = conj(c) / norm
    return DensityMatrix2.from_complex(1.0 / norm, np.conj(c) / norm)


def island_charge(frame: AdiabaticFrame, rho: DensityMatrix2):
    """<n>, the mean number of excess Cooper pairs on the island."""
    sq = np.sqrt(1.0 - frame.eta**2)
    return 0.5 + frame.eta * (rho.rho_gg - 0.5) - sq * rho.rho_ge_re


def period_average(times, values, omega0):
    """Moving average of ``values`` over one local oscillation period 2 pi / omega0.

    Removes free precession (ringing at omega0) while keeping the slowly
    varying part.  ``times`` must be increasing and sample each period
    densely; windows are clipped at the ends of the record.
    """
    from scipy.integrate import cumulative_trapezoid

    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    half = np.pi / np.asarray(omega0, dtype=float)
    lo = np.maximum(times - half, times[0])
    hi = np.minimum(times + half, times[-1])

    def _avg(v):
        cum = cumulative_trapezoid(v, times, initial=0.0)
        return (np.interp(hi, times, cum) - np.interp(lo, times, cum)) / (hi - lo)

    if np.iscomplexobj(values):
        return _avg(values.real) + 1j * _avg(values.imag)
    return _avg(values)
