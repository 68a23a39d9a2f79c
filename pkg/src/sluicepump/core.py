"""Domain types shared by every module, plus adiabaticity diagnostics.

The two-level state lives in the instantaneous (adiabatic) eigenbasis
{|g>, |e>}.  Only rho_gg and rho_ge are stored, so trace preservation and
Hermiticity hold by construction.

Frame and state fields may be plain floats or equally shaped numpy arrays;
all helpers below operate elementwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

#: default tolerance band for positivity / population checks
POS_TOL = 1e-6


class SluiceError(Exception):
    """Base class for errors raised by this package."""


class InvalidFrameError(SluiceError, ValueError):
    pass


class DegenerateGapError(SluiceError, ValueError):
    """The instantaneous gap vanished (omega0 <= 0)."""


class SingularCoordinateError(SluiceError, ValueError):
    """eta^2 == 1: the adiabatic coordinates are singular."""


@dataclass(frozen=True)
class DensityMatrix2:
    """Reduced 2x2 density matrix in the adiabatic basis."""

    rho_gg: float
    rho_ge_re: float = 0.0
    rho_ge_im: float = 0.0

    @classmethod
    def ground(cls) -> "DensityMatrix2":
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def from_complex(cls, rho_gg, rho_ge) -> "DensityMatrix2":
        rho_ge = np.asarray(rho_ge, dtype=complex)
        if rho_ge.ndim == 0:
            return cls(float(rho_gg), float(rho_ge.real), float(rho_ge.imag))
        return cls(np.asarray(rho_gg, dtype=float), rho_ge.real, rho_ge.imag)

    @property
    def rho_ee(self):
        return 1.0 - self.rho_gg

    @property
    def rho_ge(self):
        return self.rho_ge_re + 1j * self.rho_ge_im

    @property
    def rho_eg(self):
        return self.rho_ge_re - 1j * self.rho_ge_im

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_gg, self.rho_ge_re, self.rho_ge_im], dtype=float)

    def matrix(self) -> np.ndarray:
        """Full 2x2 matrix, ordered (g, e)."""
        return np.array([[self.rho_gg, self.rho_ge], [self.rho_eg, self.rho_ee]])

    @property
    def purity(self):
        return self.rho_gg**2 + (1.0 - self.rho_gg) ** 2 + 2.0 * np.abs(self.rho_ge) ** 2

    @property
    def min_eigenvalue(self):
        return min_eigenvalue(self.rho_gg, self.rho_ge_re, self.rho_ge_im)


def min_eigenvalue(rho_gg, rho_ge_re, rho_ge_im):
    """Smaller eigenvalue of the Hermitian unit-trace 2x2 matrix."""
    return 0.5 - np.sqrt((rho_gg - 0.5) ** 2 + rho_ge_re**2 + rho_ge_im**2)


def positivity_violation(rho: DensityMatrix2):
    """Amount by which rho fails to be positive semidefinite (0 if it is)."""
    return np.maximum(0.0, -rho.min_eigenvalue)


def check_positivity(rho: DensityMatrix2, pos_tol: float = POS_TOL, t=None) -> float:
    """Log (never clamp) a positivity violation beyond ``pos_tol``.

    Returns the largest violation found.
    """
    viol = float(np.max(positivity_violation(rho)))
    if viol > pos_tol:
        logger.warning("density matrix not positive: min eigenvalue %.3e at t=%s", -viol, t)
    return viol


@dataclass(frozen=True)
class AdiabaticFrame:
    """Instantaneous two-level quantities at one time (or an array of times).

    Energies and rates are angular frequencies in rad/s (hbar = 1); m1 and m2
    are the dimensionless coupling-operator matrix elements.
    """

    e12: float
    gamma: float
    eta: float
    omega0: float
    m1: float
    m2_re: float
    m2_im: float
    w_gg: float
    w_ee: float
    w_ge_re: float
    w_ge_im: float

    @property
    def w_ge(self):
        return self.w_ge_re + 1j * self.w_ge_im

    @property
    def m2(self):
        return self.m2_re + 1j * self.m2_im

    def w_matrix(self) -> np.ndarray:
        return np.array([[self.w_gg, self.w_ge], [np.conj(self.w_ge), self.w_ee]])

    def frozen(self, **changes) -> "AdiabaticFrame":
        """Copy with some fields replaced."""
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class SpectralTriple:
    """Noise spectrum sampled at +omega0, -omega0 and 0, in rad/s.

    Multiplying by |m|^2 gives a rate.
    """

    s_plus: float
    s_minus: float
    s_zero: float

    def __post_init__(self):
        for name in ("s_plus", "s_minus", "s_zero"):
            v = np.asarray(getattr(self, name))
            if np.any(~np.isfinite(v)) or np.any(v < 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    @classmethod
    def zero(cls) -> "SpectralTriple":
        return cls(0.0, 0.0, 0.0)


def _frame_finite(frame: AdiabaticFrame) -> bool:
    vals = (frame.w_gg, frame.w_ee, frame.w_ge_re, frame.w_ge_im, frame.omega0)
    return all(np.all(np.isfinite(v)) for v in vals)


def trace_norm_w(frame: AdiabaticFrame):
    """Trace norm (sum of singular values) of the Hermitian 2x2 w matrix.

    For a 2x2 matrix M, s1 + s2 = sqrt(|M|_F^2 + 2 |det M|).
    """
    if not _frame_finite(frame):
        raise InvalidFrameError("frame contains non-finite entries")
    wge2 = frame.w_ge_re**2 + frame.w_ge_im**2
    fro2 = frame.w_gg**2 + frame.w_ee**2 + 2.0 * wge2
    det = frame.w_gg * frame.w_ee - wge2
    return np.sqrt(fro2 + 2.0 * np.abs(det))


def local_alpha(frame: AdiabaticFrame):
    """Local adiabatic parameter ||w|| / omega0 (gap Delta = hbar*omega0)."""
    if np.any(np.asarray(frame.omega0) <= 0):
        raise DegenerateGapError("omega0 must be positive")
    return trace_norm_w(frame) / frame.omega0


@dataclass(frozen=True)
class AdiabaticityReport:
    times: np.ndarray
    alpha_t: np.ndarray
    alpha_bar: float
    delta_min: float  # minimum gap over the cycle, rad/s
    period: float = field(default=np.nan)

    @property
    def alpha_max(self) -> float:
        return float(np.max(self.alpha_t))


def adiabaticity_report(times, frames: AdiabaticFrame, period: float) -> AdiabaticityReport:
    """Local alpha(t) along sampled frames and the global estimate 1/(Delta_min T_p)."""
    alpha_t = np.asarray(local_alpha(frames), dtype=float)
    delta_min = float(np.min(frames.omega0))
    return AdiabaticityReport(
        times=np.asarray(times, dtype=float),
        alpha_t=alpha_t,
        alpha_bar=1.0 / (delta_min * period),
        delta_min=delta_min,
        period=period,
    )
