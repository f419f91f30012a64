import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.concepts import Point, enumerated_domain, full_hypercube
from gaplab.distributions import (
    FiniteSupportDistribution,
    PneFamily,
    ProductDistribution,
    RngSeed,
    distribution_from_json_dict,
    geometric_finite,
    make_pne,
    missing_mass,
    missing_mass_fraction,
    mix64,
    point_prob,
    sample_bit_matrix,
    sample_coordinate_columns,
    sample_points,
    uniform_finite,
)
from gaplab.errors import DimensionMismatchError, InvalidParameterError


class TestRngSeed:
    def test_trial_seeds_are_pure_and_distinct(self):
        s = RngSeed(123, 5)
        seeds = [s.trial_seed(t) for t in range(200)]
        assert seeds == [RngSeed(123, 5).trial_seed(t) for t in range(200)]
        assert len(set(seeds)) == 200

    def test_streams_differ(self):
        a = RngSeed(7, 0).trial_seed(3)
        b = RngSeed(7, 1).trial_seed(3)
        assert a != b

    def test_substream_is_deterministic(self):
        assert RngSeed(9).substream(4) == RngSeed(9).substream(4)
        assert RngSeed(9).substream(4) != RngSeed(9).substream(5)

    def test_mix64_avalanche_smoke(self):
        # flipping one input bit flips roughly half the output bits
        flips = bin(mix64(1234567) ^ mix64(1234567 ^ 1)).count("1")
        assert 16 <= flips <= 48

    def test_range_validation(self):
        with pytest.raises(InvalidParameterError):
            RngSeed(-1)
        with pytest.raises(InvalidParameterError):
            RngSeed(1 << 64)


class TestMakePne:
    def test_examples(self):
        d = make_pne(3, 0.01, 2)
        assert np.allclose(d.marginals, [0.01, 0.5, 0.01])
        d2 = make_pne(2, 0.25, 1)
        assert np.allclose(d2.marginals, [0.5, 0.25])

    def test_eps_open_interval(self):
        with pytest.raises(InvalidParameterError):
            make_pne(4, 0.5, 1)
        with pytest.raises(InvalidParameterError):
            make_pne(4, 0.0, 1)

    def test_index_range(self):
        with pytest.raises(InvalidParameterError):
            make_pne(4, 0.1, 5)
        with pytest.raises(InvalidParameterError):
            make_pne(1, 0.1, 1)

    def test_family_member(self):
        fam = PneFamily(6, 0.2)
        assert np.allclose(fam.member(3).marginals, [0.2, 0.2, 0.5, 0.2, 0.2, 0.2])


class TestPointProb:
    def test_examples(self):
        d = make_pne(2, 0.25, 1)
        assert point_prob(d, Point.from_string("10")) == pytest.approx(0.375, abs=1e-15)
        u = ProductDistribution(np.array([0.5, 0.5]))
        assert point_prob(u, Point.from_string("11")) == pytest.approx(0.25, abs=1e-15)

    def test_finite_missing_point_is_zero(self):
        dom = enumerated_domain(3)
        d = uniform_finite(dom)
        outside = Point.from_string("11")
        assert point_prob(d, outside) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            point_prob(make_pne(4, 0.1, 1), Point.from_string("001"))

    def test_matches_product_of_marginals_oracle(self):
        rng = np.random.default_rng(0)
        marg = rng.random(8)
        d = ProductDistribution(marg)
        for _ in range(20):
            bits = rng.integers(0, 2, 8)
            x = Point.from_bits(bits)
            expected = 1.0
            for j, b in enumerate(bits):
                expected *= marg[j] if b else 1.0 - marg[j]
            assert point_prob(d, x) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("dist", [make_pne(10, 0.07, 4),
                                      ProductDistribution(np.linspace(0.05, 0.95, 10))])
    def test_sums_to_one_over_hypercube(self, dist):
        total = sum(point_prob(dist, x) for x in full_hypercube(10))
        assert abs(total - 1.0) <= 1e-9


class TestSampling:
    def test_zero_draws(self):
        assert sample_points(make_pne(4, 0.1, 1), 0, RngSeed(1)) == []

    def test_point_mass(self):
        dom = enumerated_domain(2)
        d = FiniteSupportDistribution(dom, [1.0, 0.0])
        pts = sample_points(d, 5, RngSeed(1))
        assert pts == [dom[0]] * 5

    def test_deterministic_given_seed(self):
        d = make_pne(40, 0.2, 7)
        a = sample_points(d, 20, RngSeed(11, 3))
        b = sample_points(d, 20, RngSeed(11, 3))
        assert a == b
        c = sample_points(d, 20, RngSeed(11, 4))
        assert a != c

    def test_block_path_matches_per_row_reference(self):
        # Drawing the matrix in one call consumes the stream exactly like
        # drawing row by row.
        d = make_pne(37, 0.3, 2)
        words = sample_bit_matrix(d, 6, RngSeed(5).generator(0))
        gen = RngSeed(5).generator(0)
        rows = [sample_bit_matrix(d, 1, gen)[0] for _ in range(6)]
        assert np.array_equal(words, np.stack(rows))

    def test_coordinate_columns_match_marginals(self):
        d = make_pne(50, 0.1, 9)
        gen = RngSeed(3).generator(0)
        cols = sample_coordinate_columns(d, [2, 9, 50], 20000, gen)
        freq = cols.mean(axis=0)
        assert abs(freq[0] - 0.1) < 0.01
        assert abs(freq[1] - 0.5) < 0.015
        assert abs(freq[2] - 0.1) < 0.01

    def test_empirical_marginals_at_one_million(self):
        d = make_pne(4, 0.01, 1)
        words = sample_bit_matrix(d, 1_000_000, RngSeed(2024).generator(0))
        from gaplab.concepts import unpack_bit_rows

        bits = unpack_bit_rows(words, 4)
        freq = bits.mean(axis=0)
        radius = math.sqrt(math.log(2 / 0.01) / (2 * 1_000_000))
        assert radius < 0.002
        assert abs(freq[0] - 0.5) < radius
        for j in (1, 2, 3):
            assert abs(freq[j] - 0.01) < radius

    def test_negative_m_rejected(self):
        with pytest.raises(InvalidParameterError):
            sample_points(make_pne(4, 0.1, 1), -1, RngSeed(0))


class TestFiniteSupport:
    def test_validation(self):
        dom = enumerated_domain(2)
        with pytest.raises(InvalidParameterError):
            FiniteSupportDistribution(dom, [0.6, 0.6])
        with pytest.raises(InvalidParameterError):
            FiniteSupportDistribution(dom, [-0.1, 1.1])
        with pytest.raises(InvalidParameterError):
            FiniteSupportDistribution([dom[0], dom[0]], [0.5, 0.5])

    def test_missing_mass_examples(self):
        dom = enumerated_domain(2)
        u = uniform_finite(dom)
        assert missing_mass(u, [dom[0]]) == 0.5
        assert missing_mass(u, dom) == 0.0
        d3 = FiniteSupportDistribution(enumerated_domain(3), [0.7, 0.2, 0.1])
        observed = [d3.support[0]]
        direct = 0.2 + 0.1  # direct-summation oracle
        assert missing_mass(d3, observed) == pytest.approx(direct, abs=1e-12)

    def test_missing_plus_covered_is_total_exactly(self):
        d3 = FiniteSupportDistribution(enumerated_domain(3), [0.7, 0.2, 0.1])
        observed = [d3.support[1]]
        missing = missing_mass_fraction(d3, observed)
        covered = Fraction(float(d3.probs[1]))
        total = sum((Fraction(float(p)) for p in d3.probs), Fraction(0))
        assert missing + covered == total

    def test_observed_points_outside_support_ignored(self):
        dom = enumerated_domain(2)
        u = uniform_finite(dom)
        stranger = Point.from_string("11")
        assert missing_mass(u, [stranger]) == 1.0

    def test_geometric_preset_sums_to_exactly_one(self):
        for d in (2, 5, 12):
            g = geometric_finite(enumerated_domain(d))
            assert float(np.sum(g.probs)) == 1.0
            assert g.probs[0] == 0.5 or d == 1


def test_distribution_json_roundtrip():
    d = make_pne(6, 0.1, 2)
    r = distribution_from_json_dict(d.to_json_dict())
    assert isinstance(r, ProductDistribution) and np.array_equal(r.marginals, d.marginals)
    fam = PneFamily(6, 0.1)
    r2 = distribution_from_json_dict(fam.to_json_dict())
    assert r2 == fam
    p = ProductDistribution(np.array([0.2, 0.9]))
    r3 = distribution_from_json_dict(p.to_json_dict())
    assert np.array_equal(r3.marginals, p.marginals)
    f = geometric_finite(enumerated_domain(4))
    r4 = distribution_from_json_dict(f.to_json_dict())
    assert r4.support == f.support and np.array_equal(r4.probs, f.probs)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
@settings(max_examples=50)
def test_mix64_is_injective_on_samples(a, b):
    if a != b:
        assert mix64(a) != mix64(b)
