"""Discrete laws, weight vectors, and the compound-Poisson family.

Reference values for the Poisson-difference mass at zero come from the
closed form exp(-2*mu) * I0(2*mu), evaluated independently with mpmath.
"""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from lostructure.distributions import (
    AtomicMeasure,
    CompoundPoissonSpec,
    DiscreteDistribution,
    WeightVector,
    char_fn_H,
    from_scalar_atoms,
    h_point_mass_zero,
    levy_measure_plain,
    levy_measure_star,
    point_mass,
    rademacher,
    sample_H_lambda,
    symmetrize,
    tail_mass,
    uniform_on,
    weighted_sum_law,
    weights_1d,
)
from lostructure.errors import AtomCapExceeded


def skellam_pmf(j: int, mu: float) -> float:
    """P(N1 - N2 = j) for independent Poisson(mu) counts."""
    return float(mpmath.exp(-2 * mu) * mpmath.besseli(abs(j), 2 * mu))


def skellam_zero(mu: float) -> float:
    return skellam_pmf(0, mu)


class TestDiscreteDistribution:
    def test_rademacher(self):
        F = rademacher()
        assert F.support_size == 2
        assert F.mass_at(1) == Fraction(1, 2)
        assert F.mass_at(-1) == Fraction(1, 2)
        assert F.is_symmetric()

    def test_mass_must_sum_to_one(self):
        with pytest.raises(ValueError):
            from_scalar_atoms([(0, Fraction(1, 2))])

    def test_duplicate_atom_rejected(self):
        with pytest.raises(ValueError):
            from_scalar_atoms([(1, Fraction(1, 2)), (1, Fraction(1, 2))])

    def test_nonpositive_mass_rejected(self):
        with pytest.raises(ValueError):
            from_scalar_atoms([(0, Fraction(0)), (1, Fraction(1))])

    def test_marginal(self):
        F = uniform_on([(0, 0), (0, 1), (1, 1), (1, 2)])
        m0 = F.marginal(0)
        assert m0.mass_at(0) == Fraction(1, 2)
        assert m0.mass_at(1) == Fraction(1, 2)
        m1 = F.marginal(1)
        assert m1.mass_at(1) == Fraction(1, 2)

    def test_char_fn_is_cosine_for_rademacher(self):
        phi = rademacher().char_fn()
        for t in (0.0, 0.3, 2.0):
            assert abs(phi(t) - math.cos(t)) < 1e-12

    def test_json_round_trip(self):
        F = uniform_on([0, 1, 2])
        assert DiscreteDistribution.from_json_dict(F.to_json_dict()) == F


class TestWeightVector:
    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            weights_1d([0, 0])

    def test_single_zero_entry_allowed(self):
        a = weights_1d([0, 1])
        assert a.n == 2

    def test_norm_sq(self):
        assert weights_1d([1, 2, 3]).norm_sq == 14

    def test_scale(self):
        a = weights_1d([1, 2]).scale(Fraction(1, 2))
        assert a.scalar_entries() == [Fraction(1, 2), Fraction(1)]
        with pytest.raises(ValueError):
            weights_1d([1]).scale(0)

    def test_coordinate_projection(self):
        a = WeightVector(2, ((1, 5), (2, 0)))
        assert a.coordinate(1).scalar_entries() == [Fraction(5), Fraction(0)]
        assert not a.coordinate_is_zero(0)
        assert not a.coordinate_is_zero(1)

    def test_sorted_abs_desc(self):
        assert weights_1d([1, -3, 2]).sorted_abs_desc() == [3, 2, 1]

    def test_json_round_trip(self):
        a = WeightVector(2, ((Fraction(1, 3), 2), (0, -1)))
        assert WeightVector.from_json_dict(a.to_json_dict()) == a


class TestSymmetrization:
    def test_rademacher(self):
        G = symmetrize(rademacher())
        assert G.mass_at(-2) == Fraction(1, 4)
        assert G.mass_at(0) == Fraction(1, 2)
        assert G.mass_at(2) == Fraction(1, 4)

    def test_uniform_three_point(self):
        G = symmetrize(uniform_on([0, 1, 2]))
        expected = {-2: 1, -1: 2, 0: 3, 1: 2, 2: 1}
        for v, num in expected.items():
            assert G.mass_at(v) == Fraction(num, 9)

    def test_point_mass_degenerates(self):
        G = symmetrize(point_mass(5))
        assert G == point_mass(0)

    def test_tail_mass_strict(self):
        G = symmetrize(rademacher())
        assert tail_mass(G, 1) == Fraction(1, 2)
        assert tail_mass(G, 2) == 0  # boundary atoms excluded
        assert tail_mass(G, 0) == Fraction(1, 2)

    def test_tail_mass_warns_on_asymmetric_input(self):
        with pytest.warns(UserWarning):
            tail_mass(uniform_on([0, 1]), 0)

    def test_tail_mass_negative_delta(self):
        with pytest.raises(ValueError):
            tail_mass(symmetrize(rademacher()), -1)


class TestWeightedSumLaw:
    def test_two_equal_weights(self):
        law = weighted_sum_law(rademacher(), weights_1d([1, 1]))
        assert law.support_size == 3
        assert law.mass_at(0) == Fraction(1, 2)
        assert law.mass_at(2) == Fraction(1, 4)

    def test_two_distinct_weights(self):
        law = weighted_sum_law(rademacher(), weights_1d([1, 2]))
        assert law.support_size == 4
        for v in (-3, -1, 1, 3):
            assert law.mass_at(v) == Fraction(1, 4)

    def test_vector_weights(self):
        law = weighted_sum_law(rademacher(), WeightVector(2, ((1, 0), (0, 1))))
        assert law.dim == 2
        assert law.mass_at((1, 1)) == Fraction(1, 4)

    def test_atom_cap(self):
        with pytest.raises(AtomCapExceeded):
            weighted_sum_law(rademacher(), weights_1d([1, 2, 4, 8]), atom_cap=7)

    def test_requires_scalar_summand(self):
        F2 = uniform_on([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            weighted_sum_law(F2, weights_1d([1]))


class TestJumpMeasures:
    def test_star_pools_signs(self):
        M = levy_measure_star(weights_1d([1, 1, 1]))
        assert M.total == 6
        assert dict(M.scalar_atoms()) == {Fraction(1): Fraction(3), Fraction(-1): Fraction(3)}

    def test_star_zero_entry(self):
        M = levy_measure_star(weights_1d([0, 1]))
        assert M.total == 4
        assert dict(M.scalar_atoms()) == {
            Fraction(0): Fraction(2),
            Fraction(1): Fraction(1),
            Fraction(-1): Fraction(1),
        }

    def test_star_single_entry(self):
        M = levy_measure_star(weights_1d([2]))
        assert dict(M.scalar_atoms()) == {Fraction(2): Fraction(1), Fraction(-2): Fraction(1)}

    def test_plain_measure(self):
        M = levy_measure_plain(weights_1d([1, 1, -1]))
        assert M.total == 3
        assert dict(M.scalar_atoms()) == {Fraction(1): Fraction(2), Fraction(-1): Fraction(1)}

    def test_json_round_trip(self):
        M = levy_measure_star(weights_1d([1, 2]))
        assert AtomicMeasure.from_json_dict(M.to_json_dict()) == M


class TestCompoundPoisson:
    def test_char_fn_at_zero(self):
        assert char_fn_H(weights_1d([1, 2, 3]), [0], 7.0) == 1.0

    def test_char_fn_single_weight(self):
        # exp(-lam/2 * (1 - cos(pi))) = exp(-lam)
        val = char_fn_H(weights_1d([1]), [math.pi], 1.0)
        assert abs(val - math.exp(-1.0)) < 1e-12

    def test_char_fn_lam_zero(self):
        assert char_fn_H(weights_1d([5]), [0.37], 0.0) == 1.0

    def test_char_fn_range(self):
        a = weights_1d([1, 3])
        for t in np.linspace(-5, 5, 17):
            v = char_fn_H(a, [float(t)], 2.0)
            assert 0 < v <= 1

    def test_char_fn_validation(self):
        with pytest.raises(ValueError):
            char_fn_H(weights_1d([1]), [0], -1.0)
        with pytest.raises(ValueError):
            char_fn_H(weights_1d([1]), [0, 0], 1.0)

    def test_spec_alpha(self):
        spec = CompoundPoissonSpec(weights_1d([1, 2, 3]), 4.0)
        assert spec.alpha == 6.0

    def test_normalized_jump_law(self):
        spec = CompoundPoissonSpec(weights_1d([1, 1]), 1.0)
        W = spec.normalized_jump_law()
        assert W.mass_at(1) == Fraction(1, 2)
        assert W.is_symmetric()

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            CompoundPoissonSpec(weights_1d([1]), -0.1)

    def test_sampler_lam_zero(self):
        out = sample_H_lambda(CompoundPoissonSpec(weights_1d([1, 2]), 0.0), 1000, 0)
        assert out.shape == (1000,)
        assert not out.any()

    def test_sampler_deterministic(self):
        spec = CompoundPoissonSpec(weights_1d([1, 3]), 2.0)
        x = spec.sample(2000, seed=7)
        y = spec.sample(2000, seed=7)
        assert np.array_equal(x, y)
        assert not np.array_equal(x, spec.sample(2000, seed=8))

    def test_sampler_shapes(self):
        with pytest.raises(ValueError):
            sample_H_lambda(CompoundPoissonSpec(weights_1d([1]), 1.0), 0, 0)
        spec2 = CompoundPoissonSpec(WeightVector(2, ((1, 0), (0, 1))), 1.0)
        assert spec2.sample(1500, 0).shape == (1500, 2)

    def test_sampler_zero_fraction_matches_closed_form(self):
        # single unit weight at lam=4: each sign has rate 1
        spec = CompoundPoissonSpec(weights_1d([1]), 4.0)
        draws = spec.sample(10**5, seed=3)
        frac = float(np.mean(draws == 0))
        target = skellam_zero(1.0)
        se = math.sqrt(target * (1 - target) / 10**5)
        assert abs(frac - target) < 3 * se


class TestPointMassAtZero:
    def test_lam_zero(self):
        assert h_point_mass_zero(weights_1d([1]), 0.0) == 1.0

    def test_single_weight_closed_form(self):
        got = h_point_mass_zero(weights_1d([1]), 4.0)
        assert abs(got - skellam_zero(1.0)) < 1e-9

    def test_two_weight_cross_sum(self):
        # zero total needs the jump-1 count to cancel 3x the jump-3 count
        got = h_point_mass_zero(weights_1d([1, 3]), 2.0)
        want = sum(skellam_pmf(-3 * k, 0.5) * skellam_pmf(k, 0.5) for k in range(-40, 41))
        assert abs(got - want) < 1e-9

    def test_opposite_signs_pool(self):
        same = h_point_mass_zero(weights_1d([1, 1]), 2.0)
        flipped = h_point_mass_zero(weights_1d([1, -1]), 2.0)
        assert same == flipped
        assert abs(same - skellam_zero(1.0)) < 1e-9

    def test_zero_entries_ignored(self):
        assert abs(h_point_mass_zero(weights_1d([0, 5]), 2.0) - h_point_mass_zero(weights_1d([5]), 2.0)) < 1e-15

    def test_cancellation_across_groups(self):
        # jumps of size 1 and 2 can cancel: mass at zero exceeds the
        # independent product of per-group zero masses
        got = h_point_mass_zero(weights_1d([1, 2]), 4.0)
        floor = skellam_zero(1.0) ** 2
        assert got > floor
