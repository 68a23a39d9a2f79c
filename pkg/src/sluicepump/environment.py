"""Noise spectra seen by the sluice island.

The gate-voltage spectrum of a resistor is converted to the spectrum of the
coupling operator X = e*dV, so S_X(w) = e^2 S_V(w).  Divided by hbar^2 it is
an angular frequency: S(w) = 2 w (e^2 R / hbar) / (1 - exp(-w / w_T)), with
w_T = k_B T / hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import SluiceError, SpectralTriple
from .units import E_CHARGE, HBAR, kelvin_to_rad_s

OHMIC = 0
ENGINEERED = 1


class DivergingInductanceError(SluiceError, ValueError):
    """SQUID flux too close to half a flux quantum."""


@dataclass(frozen=True)
class OhmicSpectrum:
    """Thermal ohmic bath of resistance ``r`` (ohm) at ``temp`` (K).

    ``t0`` (K) is the effective temperature setting the zero-frequency
    (pure dephasing) value S(0) = 2 k_B T0 R, used even when ``temp`` = 0.
    ``charge_factor`` converts ohm to the dimensionless e^2 R / hbar.
    """

    r: float
    temp: float = 0.0
    t0: float = 0.1
    charge_factor: float = E_CHARGE**2 / HBAR

    def __post_init__(self):
        if self.r <= 0 or self.temp < 0 or self.t0 <= 0:
            raise ValueError("need r > 0, temp >= 0, t0 > 0")

    @property
    def r_eff(self) -> float:
        return self.charge_factor * self.r

    @property
    def omega_t(self) -> float:
        return kelvin_to_rad_s(self.temp)

    @property
    def omega_t0(self) -> float:
        return kelvin_to_rad_s(self.t0)

    def kernel_vector(self) -> np.ndarray:
        return _spec_vector(OHMIC, self.r_eff, self.omega_t, self.omega_t0)


@dataclass(frozen=True)
class EngineeredEnvironment:
    """Resistor coupled to the island through an array of ``m_squids`` SQUIDs.

    Each SQUID is a parallel R_S, L(flux), C_S cell with
    L = L0 / |cos(pi flux)| and L0 = hbar / (2 pi e I_C).  ``flux`` is in
    units of the flux quantum.  SI units throughout (F, ohm, A).
    """

    base: OhmicSpectrum
    m_squids: int
    c_e: float
    c_s: float
    r_s: float
    i_c: float
    flux: float = 0.0
    flux_guard: float = 1e-6

    def __post_init__(self):
        if self.m_squids < 0:
            raise ValueError("m_squids must be >= 0")

    @property
    def l0(self) -> float:
        return HBAR / (2.0 * math.pi * E_CHARGE * self.i_c)

    def with_flux(self, flux: float) -> "EngineeredEnvironment":
        from dataclasses import replace

        return replace(self, flux=flux)

    def _check_flux(self):
        if abs(_cos_flux(self.flux)) <= self.flux_guard:
            raise DivergingInductanceError(
                f"|cos(pi*flux)| <= {self.flux_guard} at flux={self.flux}: L diverges"
            )

    def kernel_vector(self) -> np.ndarray:
        self._check_flux()
        b = self.base
        return _spec_vector(
            ENGINEERED,
            b.r_eff,
            b.omega_t,
            b.omega_t0,
            self.m_squids,
            self.c_e,
            self.c_s,
            self.r_s,
            self.l0 / abs(_cos_flux(self.flux)),
            b.r,
        )


def _spec_vector(kind, r_eff, omega_t, omega_t0, m=0.0, c_e=0.0, c_s=0.0, r_s=0.0, ind=0.0, r=0.0):
    return np.array([kind, r_eff, omega_t, omega_t0, m, c_e, c_s, r_s, ind, r], dtype=float)


def _cos_flux(flux):
    # reduce first so that flux and flux + 1 give bit-identical results
    return np.cos(np.pi * np.mod(flux, 1.0))


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def ohmic_positive(omega, r_eff, omega_t):
    """(S(+w), S(-w)) for w > 0."""
    s_plus = 2.0 * omega * r_eff
    if omega_t <= 0.0:
        return s_plus, 0.0
    x = omega / omega_t
    s_plus = s_plus / (-math.expm1(-x))
    return s_plus, math.exp(-x) * s_plus


@njit(cache=True)
def filter_kernel(omega, m, c_e, c_s, r_s, ind, r):
    """|Z_CE / Z_tot|^2 for the R + C_E + m * (R_S || L || C_S) series circuit."""
    if omega == 0.0:
        return 1.0
    z_ce = 1.0 / (1j * omega * c_e)
    z_rlc = 1j * ind * omega * r_s / (1j * ind * omega + r_s * (1.0 - ind * omega * omega * c_s))
    z_tot = r + z_ce + m * z_rlc
    return abs(z_ce / z_tot) ** 2


@njit(cache=True)
def triple_kernel(omega0, sv):
    """(S(w0), S(-w0), S(0)) from a packed spectrum vector."""
    s_plus, s_minus = ohmic_positive(omega0, sv[1], sv[2])
    s_zero = 2.0 * sv[3] * sv[1]
    if sv[0] == ENGINEERED:
        h = filter_kernel(omega0, sv[4], sv[5], sv[6], sv[7], sv[8], sv[9])
        s_plus *= h
        s_minus *= h
    return s_plus, s_minus, s_zero


# ---------------------------------------------------------------------------
# public API


def ohmic_spectrum(spec: OhmicSpectrum, omega):
    """S(omega) for any real omega (rad/s); S(0) is the dephasing value 2 k_B T0 R."""
    omega = np.asarray(omega, dtype=float)
    r_eff, wt = spec.r_eff, spec.omega_t
    out = np.empty_like(omega)
    pos, neg, zero = omega > 0, omega < 0, omega == 0
    a = np.abs(omega)
    if wt > 0:
        with np.errstate(invalid="ignore", divide="ignore"):
            s_up = 2.0 * a * r_eff / (-np.expm1(-a / wt))
        out[pos] = s_up[pos]
        out[neg] = (np.exp(-a / wt) * s_up)[neg]
    else:
        out[pos] = 2.0 * a[pos] * r_eff
        out[neg] = 0.0
    out[zero] = 2.0 * spec.omega_t0 * r_eff
    return out[()] if out.ndim == 0 else out


def ohmic_triple(spec: OhmicSpectrum, omega0) -> SpectralTriple:
    """Spectral triple of the thermal ohmic bath at gap omega0 > 0."""
    omega0 = np.asarray(omega0, dtype=float)
    if np.any(omega0 <= 0):
        raise ValueError("omega0 must be positive")
    s_plus = 2.0 * omega0 * spec.r_eff
    if spec.omega_t > 0:
        x = omega0 / spec.omega_t
        s_plus = s_plus / (-np.expm1(-x))
        s_minus = np.exp(-x) * s_plus
    else:
        s_minus = np.zeros_like(s_plus)
    s_zero = 2.0 * spec.omega_t0 * spec.r_eff * np.ones_like(s_plus)
    return SpectralTriple(s_plus[()], s_minus[()], s_zero[()])


def impedance_filter(env: EngineeredEnvironment, omega):
    """|Z_CE / Z_tot|^2 at angular frequency ``omega`` (vectorized)."""
    env._check_flux()
    omega = np.asarray(omega, dtype=float)
    ind = env.l0 / np.abs(_cos_flux(env.flux))
    with np.errstate(divide="ignore", invalid="ignore"):
        z_ce = 1.0 / (1j * omega * env.c_e)
        z_rlc = 1j * ind * omega * env.r_s / (
            1j * ind * omega + env.r_s * (1.0 - ind * omega**2 * env.c_s)
        )
        h = np.abs(z_ce / (env.base.r + z_ce + env.m_squids * z_rlc)) ** 2
    return np.where(omega == 0, 1.0, h)[()]


def engineered_spectrum(env: EngineeredEnvironment, omega):
    """Filtered spectrum |Z_CE/Z_tot|^2 S(omega) perceived by the island."""
    return impedance_filter(env, omega) * ohmic_spectrum(env.base, omega)


def engineered_triple(env: EngineeredEnvironment, omega0) -> SpectralTriple:
    """Triple with S(+-omega0) filtered identically (the filter is even in omega)."""
    base = ohmic_triple(env.base, omega0)
    h = impedance_filter(env, omega0)
    return SpectralTriple(h * base.s_plus, h * base.s_minus, base.s_zero)


def spectral_triple(model, omega0) -> SpectralTriple:
    """Dispatch on the spectrum model type."""
    if isinstance(model, EngineeredEnvironment):
        return engineered_triple(model, omega0)
    return ohmic_triple(model, omega0)
