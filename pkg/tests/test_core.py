import logging

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from sluicepump import units
from sluicepump.core import (
    AdiabaticFrame,
    DegenerateGapError,
    DensityMatrix2,
    InvalidFrameError,
    SpectralTriple,
    check_positivity,
    local_alpha,
    positivity_violation,
    trace_norm_w,
)
from sluicepump.sluice import adiabaticity, frames_along, cycle_times


def make_frame(w_gg=0.0, w_ee=0.0, w_ge=0.0, omega0=1e10, eta=0.0, g=0.01):
    w_ge = complex(w_ge)
    return AdiabaticFrame(
        e12=0.5 * omega0 * np.sqrt(1 - eta**2),
        gamma=0.0,
        eta=eta,
        omega0=omega0,
        m1=-g * eta,
        m2_re=g * np.sqrt(1 - eta**2),
        m2_im=0.0,
        w_gg=w_gg,
        w_ee=w_ee,
        w_ge_re=w_ge.real,
        w_ge_im=w_ge.imag,
    )


finite = st.floats(-1e6, 1e6, allow_nan=False)


class TestUnits:
    def test_charging_energy_scale(self):
        # E_C / k_B = 1 K in rad/s
        assert units.kelvin_to_rad_s(1.0) == pytest.approx(1.309e11, rel=1e-3)

    def test_round_trip(self):
        assert units.rad_s_to_kelvin(units.kelvin_to_rad_s(0.03)) == pytest.approx(0.03, rel=1e-14)

    def test_resistance_in_quantum_units(self):
        assert units.ohm_to_dimensionless(300e3) == pytest.approx(73.0, rel=2e-3)
        assert units.ohm_to_dimensionless(1.5e3) == pytest.approx(0.365, rel=2e-3)


class TestDensityMatrix:
    def test_derived_entries(self):
        rho = DensityMatrix2(0.7, 0.1, -0.2)
        assert rho.rho_ee == pytest.approx(0.3)
        assert rho.rho_eg == np.conj(rho.rho_ge)
        m = rho.matrix()
        assert np.trace(m) == pytest.approx(1.0)
        np.testing.assert_allclose(m, m.conj().T)

    def test_purity_pure_and_mixed(self):
        assert DensityMatrix2.ground().purity == 1.0
        assert DensityMatrix2(0.5).purity == 0.5
        # |+> in the adiabatic basis
        assert DensityMatrix2(0.5, 0.5, 0.0).purity == pytest.approx(1.0)

    @hyp.given(st.floats(-1, 2), finite, finite)
    def test_min_eigenvalue_matches_eigvalsh(self, gg, re, im):
        rho = DensityMatrix2(gg, re * 1e-6, im * 1e-6)
        ref = np.linalg.eigvalsh(rho.matrix())[0]
        assert rho.min_eigenvalue == pytest.approx(ref, abs=1e-12)

    def test_positivity_is_reported_not_clamped(self, caplog):
        rho = DensityMatrix2(1.0, 0.01, 0.0)
        with caplog.at_level(logging.WARNING, logger="sluicepump"):
            viol = check_positivity(rho, pos_tol=1e-6, t=1.5)
        assert viol == pytest.approx(np.hypot(0.5, 0.01) - 0.5)
        assert "not positive" in caplog.text
        assert rho.rho_gg == 1.0  # untouched

    def test_no_violation_inside_ball(self):
        assert positivity_violation(DensityMatrix2(0.9, 0.1, 0.1)) == 0.0


class TestTraceNorm:
    def test_zero(self):
        assert trace_norm_w(make_frame()) == 0.0

    def test_diagonal(self):
        assert trace_norm_w(make_frame(w_gg=1.0, w_ee=-1.0)) == pytest.approx(2.0)

    def test_dense_against_svd(self):
        fr = make_frame(w_gg=0.1, w_ee=-0.1, w_ge=0.3 + 0.4j)
        ref = np.linalg.svd(fr.w_matrix(), compute_uv=False).sum()
        assert trace_norm_w(fr) == pytest.approx(ref, rel=1e-14)

    @hyp.given(finite, finite, finite, finite)
    def test_random_against_svd(self, a, b, c, d):
        fr = make_frame(w_gg=a, w_ee=b, w_ge=complex(c, d))
        ref = np.linalg.svd(fr.w_matrix(), compute_uv=False).sum()
        assert trace_norm_w(fr) == pytest.approx(ref, rel=1e-12, abs=1e-9)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidFrameError):
            trace_norm_w(make_frame(w_gg=np.nan))


class TestLocalAlpha:
    def test_static(self):
        assert local_alpha(make_frame()) == 0.0

    def test_offdiagonal_only(self):
        assert local_alpha(make_frame(w_ge=1e6, omega0=1e9)) == pytest.approx(2e-3, rel=1e-14)

    def test_degenerate_gap(self):
        with pytest.raises(DegenerateGapError):
            local_alpha(make_frame(omega0=0.0))

    def test_slowing_scales_alpha(self, fig2_params):
        # T_p -> c T_p scales alpha(t) by 1/c at the same cycle phase
        fast = fig2_params.with_(f=40e6)
        t = cycle_times(fast, 16)
        a_fast = local_alpha(frames_along(fast, t))
        slow = fast.with_(f=10e6)
        a_slow = local_alpha(frames_along(slow, 4.0 * t))
        np.testing.assert_allclose(a_slow, a_fast / 4.0, rtol=1e-12)

    def test_fast_inset_trace_stays_small(self, fig2_params):
        params = fig2_params.with_(f=75e6)
        rep = adiabaticity(params)
        assert np.all(rep.alpha_t >= 0)
        # peaks where the gate ramps cross degeneracy (quarter and three-quarter cycle)
        assert 0 < rep.alpha_max < 0.5
        phase = rep.times[np.argmax(rep.alpha_t)] / params.period
        assert min(abs(phase - 0.25), abs(phase - 0.75)) < 0.01
        assert np.median(rep.alpha_t) < 0.05

    def test_report_global_estimate(self, fig2_params):
        rep = adiabaticity(fig2_params)
        assert rep.alpha_bar == pytest.approx(1.0 / (rep.delta_min * fig2_params.period))
        assert rep.delta_min == pytest.approx(np.min(frames_along(fig2_params, rep.times).omega0))


class TestSpectralTriple:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SpectralTriple(1.0, -1.0, 0.0)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            SpectralTriple(np.nan, 0.0, 0.0)
