import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc

from bosonbench.distribution import enumerate_sample_space, outcome_probabilities, sample_space_size
from bosonbench.errors import EnumerationCapError, ParameterError
from bosonbench.flatness import (
    complex_entry_exceedance,
    default_sigma,
    empirical_flatness,
    erfc_chain_bound,
    flatness_threshold,
    gaussian_concentration_bound,
    log_sample_space_bound,
    max_entry_exceedance_mc,
    multiplicative_bound_probe,
    permanent_moment_mc,
    permanent_moment_target,
    stirling_upper,
    theorem_bound_evaluator,
)
from bosonbench.linalg import haar_unitary
from bosonbench.rng import RngStream


class TestConcentrationBound:
    def test_large_threshold(self):
        assert gaussian_concentration_bound(3, 0.1, 50.0) == 0.0

    def test_formula(self):
        t = erfc(0.5 / (math.sqrt(2) * 0.2))
        assert gaussian_concentration_bound(4, 0.2, 0.5) == pytest.approx(1 - (1 - t) ** 16, rel=1e-12)

    def test_below_union_bound(self):
        for n in (1, 2, 5):
            for x in (0.5, 1.0, 2.0, 4.0):
                xi = x * math.sqrt(2) * 0.1
                assert gaussian_concentration_bound(n, 0.1, xi) <= n * n * erfc(x) * (1 + 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(1, 10), sigma=st.floats(0.01, 2.0), a=st.floats(0.01, 5.0), b=st.floats(0.01, 5.0))
    def test_monotone(self, n, sigma, a, b):
        lo, hi = sorted((a, b))
        assert gaussian_concentration_bound(n, sigma, hi) <= gaussian_concentration_bound(n, sigma, lo)
        assert gaussian_concentration_bound(n, sigma, a) <= gaussian_concentration_bound(n + 1, sigma, a)

    def test_chain_endpoint(self):
        assert erfc_chain_bound(2, 1.0) is None
        x = 3.0
        assert erfc_chain_bound(2, x) == pytest.approx(8 * math.exp(1 - 9))

    def test_rejects_bad_parameters(self):
        with pytest.raises(ParameterError):
            gaussian_concentration_bound(0, 0.1, 0.1)


class TestComplexExceedance:
    def test_against_monte_carlo(self, rng):
        exact = complex_entry_exceedance(3, 0.3, 0.7)
        p, se = max_entry_exceedance_mc(3, 0.3, 0.7, 100_000, rng)
        assert abs(p - exact) <= 4 * se

    def test_row_repeated(self, rng):
        S = [2, 0, 1]  # three rows, two of them identical
        exact = complex_entry_exceedance(3, 0.3, 0.7, rows=2)
        p, se = max_entry_exceedance_mc(3, 0.3, 0.7, 100_000, rng, S=S)
        assert abs(p - exact) <= 4 * se

    @pytest.mark.parametrize("n,sigma,xi", [(2, 0.2, 0.5), (4, 0.1, 0.3), (6, 0.15, 0.6)])
    def test_monte_carlo_below_exact_tail(self, rng, n, sigma, xi):
        p, se = max_entry_exceedance_mc(n, sigma, xi, 100_000, rng)
        assert p <= complex_entry_exceedance(n, sigma, xi) + 3 * se

    def test_real_tail_formula_is_smaller(self):
        # the modulus of a complex entry has tail exp(-xi^2/2sigma^2) > erfc(xi/sqrt2 sigma)
        s = 1 / math.sqrt(50)
        assert complex_entry_exceedance(4, s, 0.5) == pytest.approx(0.03044, abs=5e-5)
        assert gaussian_concentration_bound(4, s, 0.5) == pytest.approx(0.00649, abs=5e-5)

    def test_chain_endpoint_holds(self):
        for n in (2, 3, 4):
            for x in np.linspace(2.0, 5.0, 13):
                bound = erfc_chain_bound(n, x)
                if bound is not None:
                    assert complex_entry_exceedance(n, 1.0, math.sqrt(2) * x) <= bound


class TestMoments:
    def test_targets(self):
        assert permanent_moment_target(1, 4, 2) == pytest.approx(0.5)
        assert permanent_moment_target(2, 10, 4) == pytest.approx(4 * 3 * 16 / 10**4)
        with pytest.raises(ParameterError):
            permanent_moment_target(2, 2, 3)

    @pytest.mark.parametrize("order", [2, 4])
    def test_single_entry(self, rng, order):
        est = permanent_moment_mc(1, 5, order, 200_000, rng)
        # |x|^2 is exponential with mean 2 sigma^2
        v = 2 / 5
        assert est.target == pytest.approx(v if order == 2 else 2 * v * v)
        assert abs(est.z) <= 4

    @pytest.mark.parametrize("order", [2, 4])
    def test_three_photons(self, rng, order):
        est = permanent_moment_mc(3, 20, order, 100_000, rng)
        assert abs(est.z) <= 4
        assert est.median_of_means == pytest.approx(est.target, rel=0.15)
        assert est.to_json()["z"] == est.z

    def test_size_limits(self, rng):
        with pytest.raises(ParameterError):
            permanent_moment_mc(9, 20, 2, 10, rng)


class TestProbe:
    def test_constant_function(self, rng):
        r = multiplicative_bound_probe(10, 2, [1, 1, 0, 0, 0, 0, 0, 0, 0, 0], "one", 500, rng)
        assert r.haar_mean == 1 and r.gauss_mean == 1 and r.ratio == 1

    def test_second_moment_scales(self, rng):
        m = 100
        r = multiplicative_bound_probe(m, 2, [1, 1] + [0] * (m - 2), "one", 10_000, rng)
        assert r.haar_entry_second_moment == pytest.approx(1 / m, rel=0.05)
        assert r.gauss_entry_second_moment == pytest.approx(2 / m, rel=0.05)
        assert r.entry_variance_ratio == pytest.approx(2, rel=0.07)

    def test_max_entry(self, rng):
        m = 200
        S = [1, 1] + [0] * (m - 2)
        r = multiplicative_bound_probe(m, 2, S, "max-entry", 100_000, rng, threshold=3 / math.sqrt(m))
        assert r.haar_mean <= 1.5 * r.gauss_mean
        assert r.gauss_mean == pytest.approx(complex_entry_exceedance(2, default_sigma(m), 3 / math.sqrt(m)),
                                             abs=4 * r.gauss_stderr)
        assert r.gaussian_ensemble == "G"

    def test_collision_uses_repeated_rows(self, rng):
        r = multiplicative_bound_probe(8, 2, [2] + [0] * 7, "perm-prob", 2000, rng, threshold=0.01)
        assert r.gaussian_ensemble == "G_S"
        assert 0 <= r.haar_mean <= 1

    def test_threshold_required(self, rng):
        with pytest.raises(ParameterError):
            multiplicative_bound_probe(4, 1, [1, 0, 0, 0], "max-entry", 10, rng)


class TestEmpiricalFlatness:
    def test_one_mode_one_photon(self, rng):
        rep = empirical_flatness(1, 1, 5, False, rng)
        assert rep.max_probs == pytest.approx([1.0] * 5)

    def test_single_photon_matches_column(self):
        root = RngStream(10)
        rep = empirical_flatness(10, 1, 20, False, root)
        for t, pmax in enumerate(rep.max_probs):
            U = haar_unitary(10, root.spawn(t))
            assert pmax == pytest.approx(np.max(np.abs(U[:, 0]) ** 2), rel=1e-12)
            assert 1 / 10 <= pmax <= 1

    def test_thread_count_irrelevant(self):
        a = empirical_flatness(6, 2, 12, True, RngStream(5), threads=1)
        b = empirical_flatness(6, 2, 12, True, RngStream(5), threads=3)
        assert a.max_probs == b.max_probs and a.argmax == b.argmax

    def test_restricted_uses_unnormalised_probabilities(self):
        root = RngStream(6)
        rep = empirical_flatness(5, 2, 4, True, root)
        space = enumerate_sample_space(5, 2, restricted=True)
        for t, pmax in enumerate(rep.max_probs):
            assert pmax == pytest.approx(outcome_probabilities(haar_unitary(5, root.spawn(t)), space).max())

    def test_budget_exhausted(self, rng):
        rep = empirical_flatness(4, 2, 50, False, rng, budget_seconds=0.0)
        assert not rep.complete and rep.completed_trials < 50

    def test_cap_hint(self, rng):
        with pytest.raises(EnumerationCapError) as info:
            empirical_flatness(40, 5, 1, False, rng, cap=1000)
        assert "try m <=" in str(info.value)

    def test_thresholds(self):
        assert flatness_threshold(4) == pytest.approx(math.exp(-8))
        assert flatness_threshold(4, "power") == pytest.approx(1 / 16)


def mp_phi(m, n):
    return mpmath.binomial(m + n - 1, n)


class TestBoundEvaluator:
    def test_chain_against_high_precision(self):
        mpmath.mp.dps = 50
        n, m, eps = 3, 243, mpmath.e**-6
        xi = (mpmath.sqrt(eps) / mpmath.factorial(n)) ** (mpmath.mpf(1) / n)
        q = n * n * mpmath.e ** (1 - xi**2 * m / 2)
        expected = mp_phi(m, n) * 2 * q
        got = theorem_bound_evaluator(n, m, math.exp(-6), "tail-chain")
        assert q <= 0.5
        assert got.value == pytest.approx(float(expected), rel=1e-6)
        assert got.vacuous and got.excludes_haar_factor

    def test_chain_small_but_not_vacuous(self):
        got = theorem_bound_evaluator(1, 100, 0.5, "tail-chain")
        assert got.value == pytest.approx(100 * 2 * math.exp(1 - 0.5 * 100 / 2))
        assert not got.vacuous

    def test_chain_ratio_too_large(self):
        got = theorem_bound_evaluator(3, 5, 0.5, "tail-chain")
        assert got.vacuous and got.value == 1.0

    @pytest.mark.parametrize("m", [10, 50, 400])
    def test_markov_two_photons(self, m):
        raw = mpmath.binomial(m + 1, 2) * 192 / mpmath.mpf(m) ** 4
        got = theorem_bound_evaluator(2, m, 1.0, "moment-markov")
        assert got.detail["raw"] == pytest.approx(float(raw), rel=1e-9)
        assert got.value == pytest.approx(min(float(raw), 1.0))
        assert got.vacuous == (raw >= 1)

    def test_unknown_variant(self):
        with pytest.raises(ParameterError):
            theorem_bound_evaluator(2, 4, 0.1, "other")


class TestInequalities:
    @pytest.mark.parametrize("n", range(1, 21))
    def test_stirling(self, n):
        assert math.factorial(n) <= stirling_upper(n)

    def test_erfc_below_gaussian(self):
        x = np.linspace(0, 10, 2001)
        assert np.all(erfc(x) <= np.exp(-x * x) + 1e-300)

    def test_sample_space_growth(self):
        for c in (1.0, 2.0, 5.0):
            for nu in (1.0, 1.5, 2.0, 3.0):
                for n in range(1, 11):
                    m = max(1, int(c * n**nu))
                    assert math.log(sample_space_size(m, n)) <= log_sample_space_bound(n, c, nu) + 1e-12
