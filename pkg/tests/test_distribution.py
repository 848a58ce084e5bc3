import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonbench.distribution import (
    DiscreteDistribution,
    OutcomeSequence,
    beamsplitter,
    build_submatrix,
    collision_free_fraction,
    draw_indices,
    draw_samples,
    enumerate_sample_space,
    full_distribution,
    outcome_probabilities,
    outcome_probability,
    postselected_distribution,
    uniform_distribution,
)
from bosonbench.errors import DimensionError, EnumerationCapError, NormalizationError, ZeroMassError
from bosonbench.linalg import haar_unitary, permanent_naive
from bosonbench.rng import RngStream

H = beamsplitter()


def brute_force_space(m, n, restricted=False):
    """All occupation vectors by filtering the full grid; independent of the enumerator."""
    top = 1 if restricted else n
    grid = np.array(np.meshgrid(*[range(top + 1)] * m, indexing="ij")).reshape(m, -1).T
    keep = grid[grid.sum(axis=1) == n]
    return sorted(map(tuple, keep.tolist()), reverse=True)


class TestOutcomeSequence:
    def test_basic_properties(self):
        S = OutcomeSequence([0, 2, 0, 1])
        assert S.n == 3 and S.m == 4
        assert S.nonzero == (2, 1)
        assert S.modes == (1, 1, 3)
        assert not S.is_collision_free
        assert S.factorial_weight() == 2

    def test_total_checked(self):
        with pytest.raises(DimensionError):
            OutcomeSequence([1, 1], n=3)

    def test_negative_rejected(self):
        with pytest.raises(DimensionError):
            OutcomeSequence([1, -1])

    def test_first_modes(self):
        assert OutcomeSequence.first_modes(2, 4) == (1, 1, 0, 0)


class TestEnumeration:
    def test_two_modes_one_photon(self):
        assert enumerate_sample_space(2, 1).elements == [(1, 0), (0, 1)]

    def test_sizes(self):
        assert len(enumerate_sample_space(4, 2)) == 10
        assert len(enumerate_sample_space(4, 2, restricted=True)) == 6

    @pytest.mark.parametrize("m,n", [(1, 1), (1, 3), (3, 2), (4, 3), (5, 2), (3, 4)])
    @pytest.mark.parametrize("restricted", [False, True])
    def test_matches_brute_force_in_order(self, m, n, restricted):
        space = enumerate_sample_space(m, n, restricted=restricted)
        assert [tuple(S) for S in space] == brute_force_space(m, n, restricted)
        expected = math.comb(m, n) if restricted else math.comb(m + n - 1, n)
        assert len(space) == expected
        assert len(set(space.elements)) == len(space)

    def test_restricted_with_too_few_modes_is_empty(self):
        assert len(enumerate_sample_space(2, 3, restricted=True)) == 0

    def test_cap(self):
        with pytest.raises(EnumerationCapError, match="cap of 100"):
            enumerate_sample_space(10, 5, cap=100)

    def test_index_round_trip(self):
        space = enumerate_sample_space(5, 3)
        for i, S in enumerate(space):
            assert space.index(S) == i
        with pytest.raises(DimensionError):
            enumerate_sample_space(5, 3, restricted=True).index((3, 0, 0, 0, 0))

    def test_occupations_and_weights(self):
        space = enumerate_sample_space(3, 3)
        occ = space.occupations()
        np.testing.assert_array_equal(occ.sum(axis=1), 3)
        w = [math.prod(math.factorial(s) for s in row) for row in occ]
        np.testing.assert_array_equal(space.factorial_weights(), w)


class TestSubmatrix:
    def test_first_modes_gives_top_left_block(self, rng):
        U = haar_unitary(5, rng)
        np.testing.assert_array_equal(build_submatrix(U, (1, 1, 1, 0, 0)), U[:3, :3])

    def test_repeated_row(self):
        np.testing.assert_allclose(build_submatrix(H, (2, 0)), np.full((2, 2), 1 / math.sqrt(2)))

    def test_row_count_is_n(self, rng):
        U = haar_unitary(4, rng)
        for S in enumerate_sample_space(4, 3):
            assert build_submatrix(U, S).shape == (3, 3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            build_submatrix(np.eye(3), (1, 1))


class TestProbabilities:
    def test_hong_ou_mandel(self):
        assert outcome_probability(H, (1, 1)) == pytest.approx(0, abs=1e-15)
        assert outcome_probability(H, (2, 0)) == pytest.approx(0.5, abs=1e-15)
        assert outcome_probability(H, (0, 2)) == pytest.approx(0.5, abs=1e-15)

    def test_hom_by_hand(self):
        # Perm([[a, a], [a, a]]) = 2 a^2 with a = 1/sqrt 2, divided by 2!
        a = 1 / math.sqrt(2)
        assert outcome_probability(H, (2, 0)) == pytest.approx(abs(2 * a * a) ** 2 / 2)
        assert abs(permanent_naive(build_submatrix(H, (1, 1)))) < 1e-15

    def test_single_photon_is_column_weight(self, rng):
        U = haar_unitary(6, rng)
        for j in range(6):
            S = [0] * 6
            S[j] = 1
            assert outcome_probability(U, S) == pytest.approx(abs(U[j, 0]) ** 2, rel=1e-12)

    def test_sums_to_one_m6_n2(self, rng):
        U = haar_unitary(6, rng)
        total = sum(outcome_probability(U, S) for S in enumerate_sample_space(6, 2))
        assert abs(total - 1) <= 1e-9

    def test_vectorised_matches_scalar(self, rng):
        U = haar_unitary(4, rng)
        space = enumerate_sample_space(4, 3)
        np.testing.assert_allclose(outcome_probabilities(U, space),
                                   [outcome_probability(U, S) for S in space], rtol=1e-12)


class TestFullDistribution:
    def test_identity_point_mass(self):
        d = full_distribution(np.eye(3), 1)
        np.testing.assert_array_equal(d.probs, [1, 0, 0])
        assert d.space[0] == (1, 0, 0)

    def test_hom(self):
        d = full_distribution(H, 2)
        assert d.prob((1, 1)) == pytest.approx(0, abs=1e-15)
        assert d.prob((2, 0)) == pytest.approx(0.5)
        assert d.prob((0, 2)) == pytest.approx(0.5)

    def test_haar_normalised(self, rng):
        for _ in range(10):
            d = full_distribution(haar_unitary(5, rng), 2)
            assert abs(d.probs.sum() - 1) <= 1e-9

    def test_non_unitary_fails_normalisation(self):
        with pytest.raises(NormalizationError):
            full_distribution(2 * np.eye(3), 2)

    def test_n1_is_first_column(self, rng):
        U = haar_unitary(7, rng)
        np.testing.assert_allclose(full_distribution(U, 1).probs, np.abs(U[:, 0]) ** 2, rtol=1e-12)


class TestPostselected:
    def test_n1_equals_full(self, rng):
        U = haar_unitary(5, rng)
        np.testing.assert_allclose(postselected_distribution(U, 1).probs, full_distribution(U, 1).probs)

    def test_hom_has_zero_mass(self):
        with pytest.raises(ZeroMassError):
            postselected_distribution(H, 2)

    def test_m20_n3(self, rng):
        d = postselected_distribution(haar_unitary(20, rng), 3)
        assert abs(d.probs.sum() - 1) <= 1e-9
        assert 0 < d.epsilon <= 1

    def test_proportional_to_squared_permanent(self, rng):
        U = haar_unitary(6, rng)
        d = postselected_distribution(U, 3)
        raw = np.array([abs(permanent_naive(build_submatrix(U, S))) ** 2 for S in d.space])
        np.testing.assert_allclose(d.probs, raw / raw.sum(), rtol=1e-10)


class TestCollisionFreeFraction:
    def test_hom(self):
        assert collision_free_fraction(H, 2) == pytest.approx(0, abs=1e-15)

    def test_single_photon(self, rng):
        assert collision_free_fraction(haar_unitary(4, rng), 1) == pytest.approx(1)

    def test_matches_full_distribution_mass(self, rng):
        U = haar_unitary(6, rng)
        d = full_distribution(U, 3)
        cf = sum(p for S, p in zip(d.space, d.probs) if S.is_collision_free)
        assert collision_free_fraction(U, 3) == pytest.approx(cf, rel=1e-12)

    def test_constant_fraction_regime(self, rng):
        vals = [collision_free_fraction(haar_unitary(25, rng.spawn(i)), 3) for i in range(100)]
        assert 0.5 < np.mean(vals) < 1


class TestSampling:
    def test_point_mass(self, rng):
        d = full_distribution(np.eye(3), 1)
        assert all(S == (1, 0, 0) for S in draw_samples(d, 50, rng))

    def test_reproducible(self):
        d = uniform_distribution(enumerate_sample_space(5, 2))
        a = draw_samples(d, 30, RngStream(9, 1))
        b = draw_samples(d, 30, RngStream(9, 1))
        assert a == b

    def test_hom_frequencies(self, rng):
        d = full_distribution(H, 2)
        l = 10**6
        freq = np.bincount(draw_indices(d, l, rng), minlength=3) / l
        for f, p in zip(freq, d.probs):
            assert abs(f - p) <= 3 * math.sqrt(p * (1 - p) / l) + 1e-12

    def test_total_variation_soft_bound(self, rng):
        d = full_distribution(haar_unitary(5, rng), 2)
        l = 200_000
        freq = np.bincount(draw_indices(d, l, rng.spawn(1)), minlength=len(d)) / l
        assert np.abs(freq - d.probs).sum() <= 3 * math.sqrt(len(d) / l)


class TestUniform:
    def test_phi42(self):
        d = uniform_distribution(enumerate_sample_space(4, 2, restricted=True))
        np.testing.assert_allclose(d.probs, [1 / 6] * 6)

    def test_flatness_and_entropy(self):
        d = uniform_distribution(enumerate_sample_space(5, 3))
        assert d.epsilon == pytest.approx(1 / 35)
        assert d.min_entropy_bits == pytest.approx(math.log2(35))

    def test_empty(self):
        with pytest.raises(DimensionError):
            uniform_distribution(enumerate_sample_space(2, 3, restricted=True))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 5), n=st.integers(1, 3))
def test_mode_relabeling_covariance(seed, m, n):
    n = min(n, m)
    rng = RngStream(seed)
    U = haar_unitary(m, rng)
    perm = np.random.default_rng(seed).permutation(m)
    P = np.eye(m)[perm]  # (P U)[i] = U[perm[i]]
    d = full_distribution(U, n)
    dp = full_distribution(P @ U, n)
    for S, p in zip(d.space, d.probs):
        relabeled = [0] * m
        for i in range(m):
            relabeled[i] = S[perm[i]]
        assert dp.prob(relabeled) == pytest.approx(p, abs=1e-12)


def test_exports():
    d = full_distribution(H, 2)
    obj = d.to_json()
    assert obj == {"m": 2, "n": 2, "restricted": False, "probs": list(d.probs)}
    lines = d.to_csv().strip().splitlines()
    assert lines[0] == "index,occupations,probability"
    assert lines[1].startswith("0,2 0,")
    with pytest.raises(NormalizationError):
        DiscreteDistribution(d.space, [0.5, 0.5, 0.5])
