import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symboost import analytic
from symboost.analytic import (AdderNoiseVector, AnalyticParams, DegenerateInputError,
                               adder_fidelity_analytic, calibrate_top_index_shift, crude_extra_boost,
                               density_mass, fit_eta, fit_through_origin, limiting_r_density,
                               p_remain, phi_amplitude, r_sum, ratio_extrema, shor_fidelity_nontyped,
                               shor_fidelity_sym, symmetric_shor_fidelity)
from symboost.circuits import adder_fidelity_sim, adder_output_state
from symboost.noise import Category, ErrorModel, NoiseSpec


def sym_spec(sigma=0.2, seed=1, realization=0, model=ErrorModel.RELATIVE):
    return NoiseSpec(model, Category.TYPED_SYMMETRIC, sigma, seed, realization)


class TestNoiseVector:
    def test_too_short(self):
        with pytest.raises(ValueError):
            AdderNoiseVector(np.zeros(3), 4)

    def test_relative_scaling(self):
        v = AdderNoiseVector.from_alphas([0.1, 0.1, 0.1], 2, ErrorModel.RELATIVE)
        np.testing.assert_allclose(v.r, [0.1 * math.pi, 0.1 * math.pi / 2, 0.1 * math.pi / 4])

    def test_absolute_passthrough(self):
        v = AdderNoiseVector.from_alphas([0.1, 0.2, 0.3], 2, ErrorModel.ABSOLUTE)
        np.testing.assert_allclose(v.r, [0.1, 0.2, 0.3])


class TestNoiseless:
    @pytest.mark.parametrize("L", [2, 3, 4])
    def test_delta_at_sum(self, L):
        z = AdderNoiseVector.zeros(L)
        for s, a in [(0, 0), (1, 2 ** L - 1), (2 ** (L - 1), 3 % 2**L)]:
            for l in range(2 ** (L + 1)):
                expect = 1.0 if l == s + a else 0.0
                assert abs(phi_amplitude(s, a, l, z)) ** 2 == pytest.approx(expect, abs=1e-12)

    def test_r_sum_noiseless_is_2L_at_match(self):
        assert abs(r_sum(3, 4, 7, AdderNoiseVector.zeros(4))) == pytest.approx(16)


def test_calibrated_shift_is_zero_and_printed_form_fails():
    assert calibrate_top_index_shift() == 0
    assert analytic.TOP_INDEX_SHIFT == 0
    # the shift -1 form disagrees with the simulator for a noisy draw
    L, sp = 4, sym_spec(0.1)
    noise = AdderNoiseVector.from_spec(sp, L)
    probs = adder_output_state(3, 5, L, sp).probabilities()
    dev = max(abs(abs(phi_amplitude(3, 5, l, noise, top_shift=-1)) ** 2 - probs[l])
              for l in range(2 ** (L + 1)))
    assert dev > 1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.data(), st.sampled_from(list(ErrorModel)), st.integers(0, 1000))
def test_phi_matches_simulator(L, data, model, realization):
    s = data.draw(st.integers(0, 2**L - 1))
    a = data.draw(st.integers(0, 2**L - 1))
    sp = sym_spec(0.3 if model == ErrorModel.RELATIVE else 0.2, 7, realization, model)
    noise = AdderNoiseVector.from_spec(sp, L)
    probs = adder_output_state(s, a, L, sp).probabilities()
    for l in data.draw(st.lists(st.integers(0, 2 ** (L + 1) - 1), min_size=1, max_size=6)):
        assert abs(phi_amplitude(s, a, l, noise)) ** 2 == pytest.approx(probs[l], abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.data(), st.integers(0, 500))
def test_direct_sum_equals_product_form(L, data, realization):
    s = data.draw(st.integers(0, 2**L - 1))
    a = data.draw(st.integers(0, 2**L - 1))
    noise = AdderNoiseVector.from_spec(sym_spec(0.25, 3, realization), L)
    theta = analytic._coefficients(s, a, L) @ noise.r[:L + 1]
    product = float(np.exp(analytic._log_fidelity(theta)))
    assert adder_fidelity_analytic(s, a, noise) == pytest.approx(product, abs=1e-12)


@pytest.mark.parametrize("model,sigma", [(ErrorModel.RELATIVE, 0.1), (ErrorModel.ABSOLUTE, 0.05)])
@pytest.mark.parametrize("s,a,L", [(3, 5, 4), (11, 6, 5), (15, 15, 4)])
def test_nontyped_mean_matches_simulator(model, sigma, s, a, L):
    sp = NoiseSpec(model, Category.NON_TYPED, sigma, 1)
    n = 1000
    f = np.array([adder_fidelity_sim(s, a, L, sp, r) for r in range(n)])
    var = analytic._nontyped_variance(s, a, L, analytic._weights(model, L))
    z = np.random.default_rng(0).standard_normal((200_000, L + 1))
    model_mean = float(np.mean(np.exp(analytic._log_fidelity(sigma * z * np.sqrt(var)))))
    se = f.std(ddof=1) / math.sqrt(n)
    assert abs(f.mean() - model_mean) < 4 * se + 2e-4


class TestDensity:
    @pytest.mark.parametrize("eta", [1e-4, 0.05, 0.5])
    @pytest.mark.parametrize("x0", [0.0, 0.3, 15 / 16])
    @pytest.mark.parametrize("window", analytic.WINDOWS)
    def test_normalized(self, eta, x0, window):
        p = AnalyticParams(4, 0.01, eta, x0)
        assert density_mass(p, window) == pytest.approx(1.0, abs=1e-7)

    def test_symmetric_about_x0(self):
        p = AnalyticParams(4, 0.01, 0.2, 0.5)
        assert limiting_r_density(0.3, p) == pytest.approx(limiting_r_density(0.7, p))

    def test_singular_at_x0(self):
        with pytest.raises(ValueError):
            limiting_r_density(0.5, AnalyticParams(4, 0.01, 0.2, 0.5))

    def test_unknown_window(self):
        with pytest.raises(ValueError):
            p_remain(AnalyticParams(4, 0.01, 0.2, 0.5), window="both")

    def test_params_validation(self):
        with pytest.raises(ValueError):
            AnalyticParams(4, 0.01, 0.0, 0.5)
        with pytest.raises(ValueError):
            AnalyticParams(4, 0.01, 0.1, 1.0)

    def test_p_remain_small_eta_limit(self):
        # density -> delta at x0 as eta -> 0
        assert p_remain(AnalyticParams(4, 0.01, 1e-7, 0.5)) == pytest.approx(1.0, abs=1e-6)

    def test_p_remain_decreases_with_eta(self):
        vals = [p_remain(AnalyticParams(4, 0.01, e, 0.5)) for e in (1e-4, 1e-3, 1e-2, 0.1, 0.5)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("eta", [0.01, 0.3, 0.9])
    def test_p_remain_matches_substitution(self, eta):
        # normalized over the offset window the density is beta u^(beta-1) on u in [0, 1];
        # with v = u^beta the integral becomes the mean of cos^2(pi v^(1/beta) / 2)
        p = AnalyticParams(4, 0.01, eta, 0.0)
        beta = eta / math.log(2)
        v = np.linspace(0, 1, 2_000_001)
        brute = np.trapezoid(np.cos(np.pi * v ** (1 / beta) / 2) ** 2, v)
        assert p_remain(p) == pytest.approx(brute, abs=1e-6)


class TestShorFormulas:
    def test_noiseless_limits(self):
        assert symmetric_shor_fidelity(1.0, 1.0, 4) == 1.0
        assert shor_fidelity_nontyped(1.0, 4) == 1.0

    def test_nontyped_exponent(self):
        f = 0.999
        assert shor_fidelity_nontyped(f, 4) == pytest.approx((0.75 * f**2 + 0.25 * f**5) ** 64)

    def test_nontyped_rejects_bad_fidelity(self):
        with pytest.raises(ValueError):
            shor_fidelity_nontyped(1.5, 4)

    def test_symmetric_beats_nontyped(self):
        p = AnalyticParams(4, 0.01, 3e-4, 15 / 16)
        assert shor_fidelity_sym(p) > shor_fidelity_nontyped(p.adder_fidelity, 4)

    def test_window_choice_matters(self):
        p = AnalyticParams(4, 0.01, 3e-4, 15 / 16)
        assert shor_fidelity_sym(p, "offset") < shor_fidelity_sym(p, "unit")

    def test_crude_boost(self):
        assert crude_extra_boost(1.0, 15, 4, 0) == 1.0
        lo = crude_extra_boost(0.5, 15, 4, 0)
        hi = crude_extra_boost(0.5, 15, 4, 2)
        assert 0 < lo < hi < 1

    def test_crude_boost_domain(self):
        with pytest.raises(ValueError):
            crude_extra_boost(0.9, 17, 4, 0)


class TestFits:
    def test_through_origin_exact(self):
        slope, r2, rss = fit_through_origin([1, 2, 3], [2, 4, 6])
        assert slope == pytest.approx(2) and r2 == pytest.approx(1) and rss == pytest.approx(0, abs=1e-24)

    def test_through_origin_degenerate(self):
        with pytest.raises(DegenerateInputError):
            fit_through_origin([0, 0], [1, 2])

    def test_fit_eta_exact(self):
        assert fit_eta([(L, math.exp(-0.003 * L)) for L in range(4, 11)]) == pytest.approx(0.003, rel=1e-12)

    def test_fit_eta_needs_three_sizes(self):
        with pytest.raises(DegenerateInputError):
            fit_eta([(4, 0.9), (4, 0.8), (5, 0.7)])

    def test_fit_eta_rejects_zero_fidelity(self):
        with pytest.raises(ValueError):
            fit_eta([(4, 0.9), (5, 0.0), (6, 0.7)])


class TestRatios:
    def test_zero_sigma(self):
        with pytest.raises(DegenerateInputError):
            ratio_extrema(4, 0.0)

    def test_bounds_ordered(self):
        lo, hi = ratio_extrema(5, 0.02, n_draws=200)
        assert 0 <= lo < hi

    def test_zero_input_is_exact_under_symmetric_errors(self):
        # s = a = 0: every Fourier phase vanishes, F = 1 for every draw
        lo, _ = ratio_extrema(5, 0.02, n_draws=100)
        assert lo == 0.0

    def test_absolute_model_extremes(self):
        lo, hi = ratio_extrema(10, 0.02, ErrorModel.ABSOLUTE, n_draws=300, n_pairs=2000)
        assert lo <= 0.05 and hi >= 0.9
