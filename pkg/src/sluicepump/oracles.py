"""Closed-form quasi-stationary states and charge-asymmetry predictions.

Nothing here calls the ODE integrator; these are the independent references
the integrator is checked against.  Charges follow the convention of
:mod:`sluicepump.observables` (units of 2e, transfer from the left lead to
the right lead counted positive).  The asymmetry formulas below were first
written for the opposite orientation, hence the explicit ``_ORIENT`` factor.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import AdiabaticFrame, DensityMatrix2, SpectralTriple
from .environment import OhmicSpectrum
from .master_equations import rates
from .observables import charge_integrands
from .sluice import N_SEGMENTS, SluiceParams, cycle_waveform, frames_along
from .units import kelvin_to_rad_s

_ORIENT = -1.0


class OutOfRegimeWarning(UserWarning):
    """An oracle was evaluated outside its advertised regime of validity."""


class Regime(enum.Enum):
    ADIABATIC_GROUND = "AdiabaticGround"
    NON_ADIABATIC_MIXED = "NonAdiabaticMixed"
    SECULAR_ZERO_T = "SecularZeroT"
    FINITE_T = "FiniteT"


@dataclass(frozen=True)
class QuasiStationarySolution:
    rho_gg: float
    rho_ge: complex
    regime: Regime
    note: str | None = None

    def density_matrix(self) -> DensityMatrix2:
        return DensityMatrix2.from_complex(self.rho_gg, self.rho_ge)


@dataclass(frozen=True)
class SecularCorrection:
    """delta_rho = rho_ge(full) - rho_ge(secular), with the damping rate Gamma."""

    delta_rho: complex
    gamma_rate: float


def qs_ideal(frame: AdiabaticFrame) -> QuasiStationarySolution:
    """Adiabatic ground state dressed to first order: (1, -w_ge/omega0)."""
    return QuasiStationarySolution(1.0, -frame.w_ge / frame.omega0, Regime.ADIABATIC_GROUND)


def qs_finite_T(frame: AdiabaticFrame, spectra: SpectralTriple | None = None, temp: float = 0.0):
    """Thermal quasi-stationary state for exponentially small excitation.

    rho_gg = 1 - exp(-omega0/omega_T), rho_ge = -(w_ge/omega0)(1 - 2 exp(-omega0/omega_T)).
    ``temp`` in kelvin; ``spectra`` is accepted for interface symmetry and unused.
    """
    if temp <= 0:
        sol = qs_ideal(frame)
        return QuasiStationarySolution(sol.rho_gg, sol.rho_ge, Regime.FINITE_T)
    x = frame.omega0 / kelvin_to_rad_s(temp)
    note = None
    if np.any(np.asarray(x) < 2.0):
        note = f"omega0/omega_T = {np.min(x):.3g} < 2: excitation is not exponentially small"
        warnings.warn(note, OutOfRegimeWarning, stacklevel=2)
    b = np.exp(-x)
    return QuasiStationarySolution(1.0 - b, -(frame.w_ge / frame.omega0) * (1.0 - 2.0 * b), Regime.FINITE_T, note)


def bloch_fixed_point(frame: AdiabaticFrame, sp: SpectralTriple) -> float:
    """Detailed-balance population Gamma_down / (Gamma_down + Gamma_up)."""
    g_down, g_up, _ = rates(frame, sp)
    return g_down / (g_down + g_up)


def secular_gamma(frame: AdiabaticFrame, sp: SpectralTriple):
    """Gamma = S(omega0)|m2|^2 + 4 S(0) m1^2."""
    m2_sq = frame.m2_re**2 + frame.m2_im**2
    return sp.s_plus * m2_sq + 4.0 * sp.s_zero * frame.m1**2


def qs_secular_zero_T(frame: AdiabaticFrame, sp: SpectralTriple) -> QuasiStationarySolution:
    """Secular zero-temperature coherence -2i w_ge / (2i omega0 - Gamma)."""
    gam = secular_gamma(frame, sp)
    rho_ge = -2j * frame.w_ge / (2j * frame.omega0 - gam)
    return QuasiStationarySolution(1.0, rho_ge, Regime.SECULAR_ZERO_T)


def secular_expansion(frame: AdiabaticFrame, sp: SpectralTriple):
    """Second-order expansion of the secular coherence in Gamma/omega0."""
    r = secular_gamma(frame, sp) / frame.omega0
    return -(frame.w_ge / frame.omega0) * (1.0 - 0.5j * r - 0.25 * r * r)


def secular_correction(frame: AdiabaticFrame, sp: SpectralTriple) -> SecularCorrection:
    """Exact difference between the ideal and secular quasi-stationary coherences."""
    full = qs_ideal(frame).rho_ge
    sec = qs_secular_zero_T(frame, sp).rho_ge
    return SecularCorrection(full - sec, secular_gamma(frame, sp))


def qs_nonadiabatic() -> QuasiStationarySolution:
    """Fully mixed state reached when the drive outruns the dissipation."""
    return QuasiStationarySolution(0.5, 0.0 + 0.0j, Regime.NON_ADIABATIC_MIXED)


# ---------------------------------------------------------------------------
# cycle quadratures


def _gauss_cycle(params: SluiceParams, n_nodes: int, reverse: bool = False):
    """Gauss-Legendre nodes and weights on each of the six segments."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    seg_len = params.period / N_SEGMENTS
    u = 0.5 * (x + 1.0) * seg_len
    t = np.concatenate([k * seg_len + u for k in range(N_SEGMENTS)])
    wt = np.tile(0.5 * seg_len * w, N_SEGMENTS)
    return t, wt, frames_along(params, t, reverse=reverse)


def _controls(params: SluiceParams, t, reverse=False):
    cps = [cycle_waveform(params, ti, reverse=reverse) for ti in t]
    return (
        np.array([c.j_l for c in cps]),
        np.array([c.j_r for c in cps]),
    )


class _Cp:
    def __init__(self, j_l, j_r):
        self.j_l = j_l
        self.j_r = j_r


def cycle_charges(params: SluiceParams, rho_of_frame, n_nodes: int = 200, reverse: bool = False):
    """(Q_L, Q_R) over one cycle for a state given as a function of the frame."""
    t, wt, fr = _gauss_cycle(params, n_nodes, reverse)
    jl, jr = _controls(params, t, reverse)
    dq_l, dq_r = charge_integrands(fr, _Cp(jl, jr), params, rho_of_frame(fr))
    return float(np.dot(wt, dq_l)), float(np.dot(wt, dq_r))


def ideal_pumped_charge(params: SluiceParams, excited: bool = False, n_nodes: int = 200, reverse: bool = False):
    """Pumped charge per cycle for perfect adiabatic following (ground or excited state)."""
    sign = -1.0 if excited else 1.0

    def state(fr):
        rho_ge = -sign * fr.w_ge / fr.omega0
        return DensityMatrix2(np.full_like(fr.omega0, 1.0 if not excited else 0.0), rho_ge.real, rho_ge.imag)

    q_l, q_r = cycle_charges(params, state, n_nodes, reverse)
    return 0.5 * (q_l + q_r)


def delta_q_quasistatic(params: SluiceParams, spectrum: OhmicSpectrum, n_nodes: int = 200) -> float:
    """Q_L - Q_R with the secular zero-T coherence inserted point by point.

    Same physics as :func:`delta_q_explicit` but with the exact coherence
    instead of its second-order expansion.
    """
    from .environment import ohmic_triple

    def state(fr):
        sol = qs_secular_zero_T(fr, ohmic_triple(spectrum, fr.omega0))
        rho_ge = np.asarray(sol.rho_ge)
        return DensityMatrix2(np.ones_like(fr.omega0), rho_ge.real, rho_ge.imag)

    q_l, q_r = cycle_charges(params, state, n_nodes)
    return q_l - q_r


@dataclass(frozen=True)
class DeltaQTerms:
    """Cycle integrals of the three groups of the explicit asymmetry formula."""

    gamma_term: float
    eta_term: float  # the two eta-dot terms that depend on E12
    eta_only_term: float  # depends on eta alone, integrates to zero on a closed loop

    @property
    def total(self) -> float:
        return self.gamma_term + self.eta_term + self.eta_only_term


def delta_q_explicit_integrand(frame: AdiabaticFrame, g: float, r_eff: float, s0: float):
    """Integrand groups (gamma term, E12-dependent eta terms, eta-only term), 2e per second."""
    eta, e12 = frame.eta, frame.e12
    q = 1.0 - eta**2
    g2 = g * g
    t_gamma = -frame_dgamma(frame) * (0.5 * r_eff * q**2 + q**1.5 * s0 * eta**2 / (2.0 * e12))
    deta = frame_deta(frame)
    t_eta = deta * g2 * (-(eta**2 - 1.0) * s0**2 * eta**4 / (2.0 * e12**2) + r_eff * q**1.5 * s0 * eta**2 / e12)
    t_eta0 = deta * g2 * 0.5 * r_eff**2 * q**2
    return _ORIENT * g2 * t_gamma, _ORIENT * g2 * t_eta, _ORIENT * g2 * t_eta0


def frame_dgamma(frame: AdiabaticFrame):
    """gamma-dot recovered from the frame: Re w_ge = sqrt(1-eta^2) gamma-dot / 2."""
    return 2.0 * frame.w_ge_re / np.sqrt(1.0 - frame.eta**2)


def frame_deta(frame: AdiabaticFrame):
    """eta-dot recovered from the frame: Im w_ge = -eta-dot / (2 sqrt(1-eta^2))."""
    return -2.0 * frame.w_ge_im * np.sqrt(1.0 - frame.eta**2)


def delta_q_explicit(params: SluiceParams, spectrum: OhmicSpectrum, n_nodes: int = 400, terms: bool = False):
    """Secular zero-temperature charge asymmetry per cycle from the explicit formula.

    Quadrature is Gauss-Legendre on each smooth segment.  The resistance and
    the dephasing temperature come from ``spectrum``; its bath temperature
    is ignored (the formula is zero-temperature).
    """
    t, wt, fr = _gauss_cycle(params, n_nodes)
    s0 = 2.0 * spectrum.omega_t0 * spectrum.r_eff
    a, b, c = delta_q_explicit_integrand(fr, params.g, spectrum.r_eff, s0)
    out = DeltaQTerms(float(np.dot(wt, a)), float(np.dot(wt, b)), float(np.dot(wt, c)))
    return out if terms else out.total


@dataclass(frozen=True)
class LeadingTerms:
    a1: float
    a2: float
    a4: float
    a5: float
    a5_consistent: float  # A5 with S0^2 replaced by R*S0, the dimensionless combination
    in_regime: bool

    @property
    def total(self) -> float:
        return self.a1 + self.a2 + self.a4 + self.a5


def delta_q_leading_terms(params: SluiceParams, spectrum: OhmicSpectrum, check_regime: bool = True) -> LeadingTerms:
    """Box-function approximation of the asymmetry: the four non-zero closed-form terms.

    Natural units: energies in rad/s, R as e^2 R / hbar, S0 = 2 omega_T0 R.
    """
    ec = params.e_c
    jlm, jlM = params.j_l_min, params.j_l_max
    jrm, jrM = params.j_r_min, params.j_r_max
    dm, dM = params.dng_min, params.dng_max
    g2 = params.g**2
    r = spectrum.r_eff
    s0 = 2.0 * spectrum.omega_t0 * r
    p = ec * dm * dM
    a1 = (jlm * jrM + jrm * jlM) * (dM**3 - abs(dm) ** 3) * g2 * s0 / (16.0 * p**3)
    a2 = (jrm * jlM**3 + jlm * jrM**3) * (dM**4 - dm**4) * g2 * r / (96.0 * p**4)
    a4 = (jlM**2 - jrM**2) * (dm**4 + dM**4) * g2**2 * s0**2 / (64.0 * p**4)
    a5_front = (jlM**4 - jrM**4) * (dm**5 + abs(dM) ** 5) * g2**2 / (128.0 * p**5)
    a5 = a5_front * s0**2
    a5c = a5_front * r * s0

    in_regime = bool(
        abs(params.phi - math.pi / 2) < 1e-12
        and jlm < 0.1 * jlM
        and jrm < 0.1 * jrM
        and max(jlM, jrM) < 0.1 * ec
        and min(dM, abs(dm)) > 3.0 * max(jlM, jrM) / ec
    )
    if check_regime and not in_regime:
        warnings.warn(
            "leading-term asymmetry evaluated outside phi=pi/2, J_m << J_M << E_C, |dng| >> J_M/E_C",
            OutOfRegimeWarning,
            stacklevel=2,
        )
    return LeadingTerms(
        _ORIENT * a1, _ORIENT * a2, _ORIENT * a4, _ORIENT * a5, _ORIENT * a5c, in_regime
    )
