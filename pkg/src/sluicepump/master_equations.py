"""Right-hand sides of the two-level master equations in the adiabatic basis.

Four variants share one kernel, assembled from these blocks:

    ========== ====== ===== ======= ===== =============== =====
    variant    drive  prec  Bloch   non-  drive x noise   drive x noise
                            damping sec.  (full form)     (secular form)
    ========== ====== ===== ======= ===== =============== =====
    FULL         x      x      x      x         x
    SECULAR      x      x      x                               x
    BLOCH               x      x
    UNITARY      x      x
    ========== ====== ===== ======= ===== =============== =====

``drive`` is the w-generated basis rotation, ``prec`` the free precession
i*omega0*rho_ge.  Because the blocks are shared, setting w = 0 or S = 0
reproduces the reduced variants bit for bit wherever the algebra says they
coincide.  The Lamb shift is not included.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import AdiabaticFrame, DegenerateGapError, DensityMatrix2, SpectralTriple


class RhsVariant(enum.IntEnum):
    FULL = 0
    SECULAR = 1
    BLOCH = 2
    UNITARY = 3

    @classmethod
    def parse(cls, value) -> "RhsVariant":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls[value.upper()]
        return cls(value)


FULL, SECULAR, BLOCH, UNITARY = 0, 1, 2, 3


def rhs_terms(variant, omega0, m1, m2, w_gg, w_ee, w_ge, s_plus, s_minus, s_zero, rho_gg, rho_ge):
    """(d rho_gg/dt, d rho_ge/dt); works on scalars, numpy arrays and under numba.

    ``m2``, ``w_ge`` and ``rho_ge`` are complex.
    """
    # coherent part
    prec = 1j * omega0 * rho_ge
    if variant == BLOCH:
        d_gg = 0.0 * rho_gg
        d_ge = prec
    else:
        d_gg = -2.0 * (w_ge.conjugate() * rho_ge).imag
        d_ge = (1j * w_ge * (2.0 * rho_gg - 1.0) + 1j * (w_ee - w_gg) * rho_ge) + prec
    if variant == UNITARY:
        return d_gg, d_ge

    m2_sq = m2.real * m2.real + m2.imag * m2.imag
    s_sum = s_minus + s_plus

    # Bloch relaxation and dephasing
    g_down = s_plus * m2_sq
    g_up = s_minus * m2_sq
    g_ge = 0.5 * s_minus * m2_sq + 0.5 * s_plus * m2_sq + 2.0 * s_zero * m1 * m1
    d_gg = d_gg + (g_down * (1.0 - rho_gg) - g_up * rho_gg)
    d_ge = d_ge - g_ge * rho_ge
    if variant == BLOCH:
        return d_gg, d_ge

    k = (2.0 * s_zero - s_minus - s_plus) / omega0
    k0 = (s_zero - s_plus) / omega0
    a = (m2.conjugate() * w_ge).real  # Im m2 Im w + Re m2 Re w

    if variant == SECULAR:
        d_gg = d_gg + (2.0 * k * a * m1 * rho_gg - 2.0 * m1 * k0 * a)
        d_ge = d_ge + k * (2.0 * m2 * w_ge.conjugate() + w_ge * m2.conjugate()) * m1 * rho_ge
        return d_gg, d_ge

    # FULL: non-secular dissipative terms
    b = (m2.conjugate() * rho_ge).real  # Im m2 Im rho + Re m2 Re rho
    d_gg = d_gg + 2.0 * b * s_zero * m1
    d_ge = d_ge + (
        -s_plus * m1 * m2
        + s_sum * m1 * m2 * rho_gg
        - 1j * s_sum * m2 * (m2.real * rho_ge.imag - m2.imag * rho_ge.real)
        + 0.5 * s_sum * m2_sq * rho_ge
    )
    # FULL: combined drive x dissipation terms
    kd = (s_minus - s_plus) / omega0
    d_gg = d_gg + (-2.0 * k * a * b + 2.0 * k * m1 * a * rho_gg - 2.0 * k0 * m1 * a)
    d_ge = d_ge + (
        -2.0 * k * m1 * m1 * w_ge * rho_gg
        + 2.0 * k0 * m1 * m1 * w_ge
        - 1j * m2 * kd * (m2.imag * w_ge.real - m2.real * w_ge.imag)
        - 2.0
        * k
        * m1
        * (1j * m2 * (w_ge.imag * rho_ge.real - w_ge.real * rho_ge.imag) - a * rho_ge)
    )
    return d_gg, d_ge


rhs_kernel = njit(cache=True)(rhs_terms)


@dataclass(frozen=True)
class RhoDot:
    """Time derivative of a DensityMatrix2 (1/s)."""

    d_gg: float
    d_ge_re: float
    d_ge_im: float

    @property
    def d_ge(self):
        return self.d_ge_re + 1j * self.d_ge_im

    def as_array(self) -> np.ndarray:
        return np.array([self.d_gg, self.d_ge_re, self.d_ge_im], dtype=float)


def _evaluate(variant, frame: AdiabaticFrame, sp: SpectralTriple | None, rho: DensityMatrix2) -> RhoDot:
    if np.any(np.asarray(frame.omega0) <= 0):
        raise DegenerateGapError("omega0 must be positive")
    if sp is None:
        sp = SpectralTriple.zero()
    d_gg, d_ge = rhs_terms(
        int(variant),
        np.asarray(frame.omega0, dtype=float),
        np.asarray(frame.m1, dtype=float),
        np.asarray(frame.m2, dtype=complex),
        np.asarray(frame.w_gg, dtype=float),
        np.asarray(frame.w_ee, dtype=float),
        np.asarray(frame.w_ge, dtype=complex),
        np.asarray(sp.s_plus, dtype=float),
        np.asarray(sp.s_minus, dtype=float),
        np.asarray(sp.s_zero, dtype=float),
        np.asarray(rho.rho_gg, dtype=float),
        np.asarray(rho.rho_ge, dtype=complex),
    )
    d_ge = np.asarray(d_ge)
    return RhoDot(np.asarray(d_gg)[()], d_ge.real[()], d_ge.imag[()])


def rhs_full(frame: AdiabaticFrame, sp: SpectralTriple, rho: DensityMatrix2) -> RhoDot:
    """Full non-secular master equation, first order in w and second in the coupling."""
    return _evaluate(RhsVariant.FULL, frame, sp, rho)


def rhs_secular(frame: AdiabaticFrame, sp: SpectralTriple, rho: DensityMatrix2) -> RhoDot:
    """Master equation after the secular approximation."""
    return _evaluate(RhsVariant.SECULAR, frame, sp, rho)


def rhs_bloch(frame: AdiabaticFrame, sp: SpectralTriple, rho: DensityMatrix2) -> RhoDot:
    """Bloch equations in a static basis; the w elements of ``frame`` are ignored."""
    return _evaluate(RhsVariant.BLOCH, frame, sp, rho)


def rhs_unitary(frame: AdiabaticFrame, rho: DensityMatrix2) -> RhoDot:
    """Von Neumann equation in the moving adiabatic basis."""
    return _evaluate(RhsVariant.UNITARY, frame, None, rho)


def rhs(variant, frame: AdiabaticFrame, sp: SpectralTriple | None, rho: DensityMatrix2) -> RhoDot:
    return _evaluate(RhsVariant.parse(variant), frame, sp, rho)


def rates(frame: AdiabaticFrame, sp: SpectralTriple):
    """Bloch rates (relaxation, excitation, coherence decay) in 1/s."""
    m2_sq = frame.m2_re**2 + frame.m2_im**2
    g_down = sp.s_plus * m2_sq
    g_up = sp.s_minus * m2_sq
    g_ge = 0.5 * (g_down + g_up) + 2.0 * sp.s_zero * frame.m1**2
    return g_down, g_up, g_ge


def affine_system(variant, frame: AdiabaticFrame, sp: SpectralTriple | None):
    """Real 3x3 matrix M and offset c with d/dt (rho_gg, Re rho_ge, Im rho_ge) = M x + c.

    Obtained by probing the (affine) right-hand side; frame and spectra are frozen.
    """
    probes = [DensityMatrix2(0.0, 0.0, 0.0)] + [
        DensityMatrix2(*np.eye(3)[k]) for k in range(3)
    ]
    vals = [rhs(variant, frame, sp, p).as_array() for p in probes]
    c = vals[0]
    mat = np.column_stack([v - c for v in vals[1:]])
    return mat, c


def stationary_state(variant, frame: AdiabaticFrame, sp: SpectralTriple | None) -> DensityMatrix2:
    """Fixed point of the frozen-frame equation (root of the affine RHS)."""
    mat, c = affine_system(variant, frame, sp)
    x = np.linalg.solve(mat, -c)
    return DensityMatrix2(*x)
