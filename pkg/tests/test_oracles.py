import math
import warnings

import numpy as np
import pytest

from sluicepump.core import local_alpha
from sluicepump.environment import OhmicSpectrum, ohmic_triple
from sluicepump.integrator import integrate_cycles
from sluicepump.master_equations import SECULAR, rates, stationary_state
from sluicepump.observables import pumped_charge_per_cycle
from sluicepump.oracles import (
    OutOfRegimeWarning,
    Regime,
    bloch_fixed_point,
    delta_q_explicit,
    delta_q_leading_terms,
    delta_q_quasistatic,
    qs_finite_T,
    qs_ideal,
    qs_nonadiabatic,
    qs_secular_zero_T,
    secular_correction,
    secular_expansion,
    secular_gamma,
)
from sluicepump.sluice import SluiceParams, cycle_waveform, frame_at
from sluicepump.units import kelvin_to_rad_s


def frame(params, phase=0.3):
    return frame_at(params, cycle_waveform(params, phase * params.period))


def coupled(fr, g_new, g_old):
    s = g_new / g_old
    return fr.frozen(m1=s * fr.m1, m2_re=s * fr.m2_re, m2_im=s * fr.m2_im)


def asym_params(j_min=0.03, ec_over_j=10.0, g=0.01, f=1e6, **kw):
    ratios = dict(
        jl_max_over_ec=1 / ec_over_j,
        jl_min_over_max=j_min,
        jr_max_over_ec=0.6 / ec_over_j,
        jr_min_over_max=j_min,
        dng_max=0.4,
        dng_min=-0.2,
        g=g,
        f=f,
    )
    ratios.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SluiceParams.from_ratios(**ratios)


BATH = OhmicSpectrum(300e3, 0.0, 0.1)


class TestQuasiStationary:
    def test_ideal(self, fig2_params):
        fr = frame(fig2_params)
        sol = qs_ideal(fr)
        assert sol.regime is Regime.ADIABATIC_GROUND
        assert sol.rho_gg == 1.0 and sol.rho_ge == -fr.w_ge / fr.omega0
        assert qs_ideal(fr.frozen(w_ge_re=0.0, w_ge_im=0.0)).rho_ge == 0

    def test_ideal_scales_with_frequency(self, fig2_params):
        a = qs_ideal(frame(fig2_params)).rho_ge
        b = qs_ideal(frame(fig2_params.with_(f=2 * fig2_params.f))).rho_ge
        assert b == pytest.approx(2 * a, rel=1e-9)

    def test_limits_chain(self, fig2_params):
        fr = frame(fig2_params)
        ideal = qs_ideal(fr)
        no_bath = qs_secular_zero_T(fr, ohmic_triple(BATH, fr.omega0).__class__(0.0, 0.0, 0.0))
        cold = qs_finite_T(fr, None, 0.0)
        assert no_bath.rho_ge == ideal.rho_ge and no_bath.rho_gg == ideal.rho_gg
        assert cold.rho_ge == ideal.rho_ge and cold.rho_gg == ideal.rho_gg
        assert cold.regime is Regime.FINITE_T
        # a vanishingly small temperature is continuous with T = 0
        warm = qs_finite_T(fr, None, 1e-4)
        assert warm.rho_gg == 1.0 and warm.rho_ge == pytest.approx(ideal.rho_ge, rel=1e-15)

    def test_finite_temperature_value(self, fig2_params):
        fr = frame(fig2_params)
        temp = fr.omega0 / 3 / kelvin_to_rad_s(1.0)
        sol = qs_finite_T(fr, None, temp)
        assert sol.rho_gg == pytest.approx(1 - math.exp(-3), rel=1e-12)
        assert sol.rho_gg == pytest.approx(0.9502, abs=1e-4)
        assert sol.rho_ge == pytest.approx(-(fr.w_ge / fr.omega0) * (1 - 2 * math.exp(-3)), rel=1e-12)
        assert sol.note is None

    def test_out_of_regime_warning(self, fig2_params):
        fr = frame(fig2_params)
        hot = fr.omega0 / 1.5 / kelvin_to_rad_s(1.0)
        with pytest.warns(OutOfRegimeWarning):
            sol = qs_finite_T(fr, None, hot)
        assert sol.note

    def test_bloch_fixed_point_is_detailed_balance(self, fig2_params):
        fr = frame(fig2_params)
        temp = fr.omega0 / 3 / kelvin_to_rad_s(1.0)
        sp = ohmic_triple(OhmicSpectrum(300e3, temp, 0.1), fr.omega0)
        g_down, g_up, _ = rates(fr, sp)
        assert bloch_fixed_point(fr, sp) == g_down / (g_down + g_up)
        # ratio form is exactly the Fermi function, which the exponential form approximates
        assert bloch_fixed_point(fr, sp) == pytest.approx(1 / (1 + math.exp(-3)), rel=1e-12)

    def test_secular_matches_numerical_root(self, fig2_params):
        p = fig2_params.with_(g=0.01)
        fr = frame(p)
        sp = ohmic_triple(BATH, fr.omega0)
        root = stationary_state(SECULAR, fr, sp)
        sol = qs_secular_zero_T(fr, sp)
        assert abs(root.rho_ge - sol.rho_ge) < 1e-8
        assert 1 - root.rho_gg < 4 * local_alpha(fr) ** 2

    def test_secular_root_gap_is_second_order(self, fig2_params):
        # the formula assumes rho_gg = 1; the true secular root departs by O(alpha^2)
        fr = frame(fig2_params.with_(g=0.1))
        sp = ohmic_triple(BATH, fr.omega0)
        gaps = []
        for c in (1.0, 0.5, 0.25):
            f3 = fr.frozen(w_gg=c * fr.w_gg, w_ee=c * fr.w_ee, w_ge_re=c * fr.w_ge_re, w_ge_im=c * fr.w_ge_im)
            gaps.append(abs(stationary_state(SECULAR, f3, sp).rho_ge - qs_secular_zero_T(f3, sp).rho_ge))
        assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.1)
        assert gaps[1] / gaps[2] == pytest.approx(4, rel=0.1)

    def test_expansion_error_is_cubic(self, fig2_params):
        fr = frame(fig2_params.with_(g=0.1))
        sp = ohmic_triple(BATH, fr.omega0)
        errs, ratios = [], []
        for g in (0.02, 0.01, 0.005):
            f2 = coupled(fr, g, 0.1)
            ratios.append(secular_gamma(f2, sp) / f2.omega0)
            errs.append(abs(qs_secular_zero_T(f2, sp).rho_ge - secular_expansion(f2, sp)))
        scale = abs(fr.w_ge / fr.omega0)
        for e, r in zip(errs, ratios):
            assert e / scale < 2 * r**3
        # Gamma ~ g^2, so halving g cuts a cubic error by 64
        assert errs[0] / errs[1] == pytest.approx(64, rel=0.1)
        assert errs[1] / errs[2] == pytest.approx(64, rel=0.1)

    def test_correction_vanishes_without_damping(self, fig2_params):
        fr = frame(fig2_params)
        sp = ohmic_triple(BATH, fr.omega0)
        corr = [abs(secular_correction(coupled(fr, g, 0.01), sp).delta_rho) for g in (0.01, 0.001, 0.0)]
        assert corr[0] > corr[1] > corr[2] == 0.0
        assert secular_correction(fr, sp).gamma_rate == secular_gamma(fr, sp)

    def test_nonadiabatic(self):
        sol = qs_nonadiabatic()
        assert (sol.rho_gg, sol.rho_ge) == (0.5, 0)
        assert sol.regime is Regime.NON_ADIABATIC_MIXED
        assert sol.density_matrix().purity == pytest.approx(0.5)


class TestAsymmetry:
    def test_symmetric_cycle(self):
        p = asym_params(jr_max_over_ec=0.1, dng_max=0.3, dng_min=-0.3)
        terms = delta_q_explicit(p, BATH, terms=True)
        scale = abs(terms.gamma_term) + abs(terms.eta_term) + 1e-300
        assert abs(terms.total) <= 1e-10 * max(scale, 1.0)
        assert abs(delta_q_quasistatic(p, BATH)) < 1e-12

    def test_eta_only_term_closes(self):
        for p in (asym_params(), asym_params(j_min=0.001, ec_over_j=20), asym_params(phi=1.2)):
            terms = delta_q_explicit(p, BATH, terms=True)
            assert abs(terms.eta_only_term) <= 1e-10 * abs(terms.gamma_term)

    def test_quadrature_converged(self):
        p = asym_params()
        assert delta_q_explicit(p, BATH, n_nodes=200) == pytest.approx(delta_q_explicit(p, BATH, n_nodes=600), rel=1e-9)

    def test_explicit_tracks_quasistatic_at_weak_coupling(self):
        # the explicit formula is the second-order expansion of the pointwise secular coherence
        ratios = []
        for g in (0.004, 0.002, 0.001):
            p = asym_params(g=g)
            ratios.append(delta_q_explicit(p, BATH) / delta_q_quasistatic(p, BATH))
        assert abs(ratios[-1] - 1) < 0.05
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)

    def test_asymmetry_grows_with_coupling(self):
        vals = [abs(delta_q_quasistatic(asym_params(g=g), BATH)) for g in (0.005, 0.01, 0.02)]
        assert vals[0] < vals[1] < vals[2]

    def test_selection_rule_gate_offsets(self):
        lt = delta_q_leading_terms(asym_params(dng_max=0.3, dng_min=-0.3), BATH, check_regime=False)
        assert lt.a1 == 0.0 and lt.a2 == 0.0
        assert lt.a4 != 0.0

    def test_selection_rule_couplings(self):
        lt = delta_q_leading_terms(asym_params(jr_max_over_ec=0.1), BATH, check_regime=False)
        assert lt.a4 == 0.0 and lt.a5 == 0.0 and lt.a5_consistent == 0.0
        assert lt.a1 != 0.0

    def test_regime_warning(self):
        with pytest.warns(OutOfRegimeWarning):
            lt = delta_q_leading_terms(asym_params(ec_over_j=3), BATH)
        assert not lt.in_regime

    @pytest.mark.xfail(strict=True, reason="closed-form leading terms do not approach the explicit integral along the scaling sequence")
    def test_leading_terms_approach_explicit(self):
        seq = [(0.03, 10), (0.01, 20), (0.003, 40), (0.001, 80)]
        rel = []
        for j_min, ec in seq:
            p = asym_params(j_min=j_min, ec_over_j=ec)
            lt = delta_q_leading_terms(p, BATH, check_regime=False)
            rel.append(abs(delta_q_explicit(p, BATH) / lt.total - 1))
        assert rel[-1] < 0.2 and all(b <= a for a, b in zip(rel, rel[1:]))

    def test_leading_terms_both_conventions_reported(self):
        # evaluated for the record: the verbatim fifth term is dimensionful and dominates
        p = asym_params(j_min=0.001, ec_over_j=80)
        lt = delta_q_leading_terms(p, BATH, check_regime=False)
        ex = delta_q_explicit(p, BATH)
        verbatim = lt.total
        consistent = lt.a1 + lt.a2 + lt.a4 + lt.a5_consistent
        assert abs(lt.a5) > 1e3 * abs(lt.a5_consistent)
        assert np.isfinite([verbatim, consistent, ex]).all()


@pytest.mark.slow
def test_secular_measured_against_explicit():
    # sharpened regime, slow drive: the measured asymmetry agrees within 20 %
    p = asym_params(j_min=0.001, ec_over_j=20, g=0.02, f=0.5e6, jr_max_over_ec=0.03)
    rec = integrate_cycles("secular", p)
    q_l, q_r, _ = pumped_charge_per_cycle(rec)
    assert rec.converged
    assert (q_l - q_r) == pytest.approx(delta_q_explicit(p, BATH), rel=0.2)
