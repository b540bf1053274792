"""Progressions and convex progressions: enumeration laws, properness,
the certified sandwich search, and proper embedding.

Structural equality matters here: two progressions with the same image are
different objects unless their triples match, and several tests rely on
that to pin down what an operation returned.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lostructure.errors import EnumerationCapExceeded, UnsupportedRank
from lostructure.gap import (
    Cgap,
    EmbeddingResult,
    Gap,
    ProductCgap,
    SymmetricPolytope,
    box_body,
    cgap_image,
    coverage_count,
    dilate,
    embed_proper,
    gap_1d,
    image,
    interval_body,
    is_infinitely_proper,
    is_proper,
    is_t_proper,
    lattice_points,
    mahler_sandwich,
    neighborhood_contains,
    size,
    vol,
    zero_cgap,
    zero_gap,
)
from lostructure.distributions import weights_1d

rationals = st.fractions(min_value=Fraction(1, 4), max_value=Fraction(9, 2)).filter(lambda x: x > 0)


def small_gaps(max_rank=2):
    def build(rank, dims, gens):
        return gap_1d(dims[:rank], gens[:rank])

    return st.builds(
        build,
        st.integers(min_value=1, max_value=max_rank),
        st.lists(rationals, min_size=max_rank, max_size=max_rank),
        st.lists(st.integers(min_value=-6, max_value=6).filter(bool), min_size=max_rank, max_size=max_rank),
    )


class TestGapBasics:
    def test_validation(self):
        with pytest.raises(ValueError):
            Gap(1, 1, (1, 2), ((1,),))  # dims/rank mismatch
        with pytest.raises(ValueError):
            gap_1d((0,), (1,))  # dims must be positive
        with pytest.raises(ValueError):
            Gap(0, 0, (), ())

    def test_zero_gap_image(self):
        assert image(zero_gap(1)) == {Fraction(0)}
        assert size(zero_gap(1)) == 1
        assert vol(zero_gap(1)) == 1
        assert is_proper(zero_gap(1))

    def test_vol(self):
        assert vol(gap_1d((Fraction(5, 2), 1), (1, 10))) == 15
        assert vol(gap_1d((Fraction(2, 5),), (7,))) == 1

    def test_proper_two_generator(self):
        P = gap_1d((Fraction(5, 2), 1), (1, 10))
        assert size(P) == 15
        assert is_proper(P)
        assert image(P) == {Fraction(i + 10 * j) for i in range(-2, 3) for j in range(-1, 2)}

    def test_improper_collision(self):
        P = gap_1d((1, 1), (1, 1))
        assert vol(P) == 9
        assert size(P) == 5
        assert not is_proper(P)
        assert image(P) == {Fraction(k) for k in range(-2, 3)}

    def test_fractional_dim_below_one(self):
        P = gap_1d((Fraction(2, 5),), (7,))
        assert image(P) == {Fraction(0)}

    def test_json_round_trip(self):
        P = gap_1d((Fraction(5, 2), 1), (Fraction(1, 3), 10))
        assert Gap.from_json_dict(P.to_json_dict()) == P


class TestDilation:
    def test_identity(self):
        P = gap_1d((2, 1), (1, 5))
        assert dilate(P, 1) == P

    def test_fractional_dim_growth(self):
        P = gap_1d((Fraction(2, 5),), (1,))
        Q = dilate(P, 3)
        assert vol(Q) == 3
        assert image(Q) == {Fraction(-1), Fraction(0), Fraction(1)}

    def test_associativity(self):
        P = gap_1d((Fraction(7, 3),), (2,))
        assert dilate(dilate(P, 2), 3) == dilate(P, 6)

    def test_positive_factor_required(self):
        with pytest.raises(ValueError):
            dilate(gap_1d((1,), (1,)), 0)

    @given(rationals, st.integers(min_value=1, max_value=5))
    def test_floor_dilation_identity(self, L, t):
        lhs = 2 * math.floor(2 * t * L) + 1
        rhs = (2 * t + 1) * (2 * math.floor(2 * L) + 1)
        assert lhs <= rhs

    @given(small_gaps(), st.integers(min_value=1, max_value=4))
    def test_volume_growth_bound(self, P, t):
        assert vol(dilate(P, t)) <= (2 * t + 1) ** P.rank * vol(P)


class TestProperness:
    @given(small_gaps())
    def test_size_at_most_vol(self, P):
        s, v = size(P), vol(P)
        assert s <= v
        assert (s == v) == is_proper(P)

    def test_t_proper_threshold(self):
        # 13*8 = 8*13 forces the first collision at box radius >= 13/2
        P = gap_1d((2, 2), (13, 8))
        assert is_proper(P)
        assert is_t_proper(P, 3)
        assert not is_t_proper(P, 4)

    def test_large_coprime_generators(self):
        P = gap_1d((5, 5), (1393, 985))
        assert not is_infinitely_proper(P)
        assert is_t_proper(P, 2)

    def test_rank_one_rational_always_proper(self):
        P = gap_1d((100,), (Fraction(22, 7),))
        assert is_infinitely_proper(P)
        # short-circuits, no enumeration of the dilated box
        assert is_t_proper(P, 10**9)

    def test_independent_generators(self):
        P = Gap(2, 2, (3, 3), ((1, 0), (0, 1)))
        assert is_infinitely_proper(P)

    def test_small_coprime(self):
        assert is_t_proper(gap_1d((1, 1), (1, 3)), 1)

    def test_enum_cap(self):
        with pytest.raises(EnumerationCapExceeded):
            size(gap_1d((1000, 1000), (1, 10**7)), enum_cap=100)


class TestLatticePoints:
    def test_box(self):
        assert len(lattice_points(box_body([2, 2]))) == 25

    def test_slab_cut(self):
        V = SymmetricPolytope(2, (((1, 0), 2), ((0, 1), 2), ((1, 1), 1)))
        pts = lattice_points(V)
        assert len(pts) == 13
        assert all(abs(x + y) <= 1 for x, y in pts)

    def test_cross_polytope(self):
        V = SymmetricPolytope(2, (((1, 0), 2), ((0, 1), 2), ((1, 1), 1), ((1, -1), 1)))
        assert lattice_points(V) == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]

    def test_negation_closure(self):
        V = SymmetricPolytope(2, (((2, 1), 3), ((1, -1), 2)))
        pts = set(lattice_points(V))
        assert {(-x, -y) for x, y in pts} == pts

    def test_with_basis(self):
        pts = lattice_points(interval_body(5), basis=[(2,)])
        assert pts == [(Fraction(-4),), (Fraction(-2),), (Fraction(0),), (Fraction(2),), (Fraction(4),)]

    def test_rank_zero(self):
        assert lattice_points(SymmetricPolytope(0, ())) == [()]

    def test_unbounded_rejected(self):
        with pytest.raises(ValueError):
            SymmetricPolytope(2, (((1, 0), 1),))

    def test_enum_cap(self):
        with pytest.raises(EnumerationCapExceeded):
            lattice_points(box_body([1000, 1000]), enum_cap=100)

    def test_polytope_json_round_trip(self):
        V = SymmetricPolytope(2, (((1, Fraction(1, 2)), 2), ((0, 1), 3)))
        assert SymmetricPolytope.from_json_dict(V.to_json_dict()) == V


class TestCgap:
    def test_rank_one_image(self):
        K = Cgap(1, (Fraction(1, 3),), interval_body(2))
        assert cgap_image(K) == {Fraction(k, 3) for k in range(-2, 3)}
        assert K.lattice_size() == 5

    def test_cross_body_collapses_values(self):
        body = SymmetricPolytope(2, (((1, 0), 2), ((0, 1), 2), ((1, 1), 1), ((1, -1), 1)))
        K = Cgap(2, (1, 1), body)
        assert K.lattice_size() == 5
        assert cgap_image(K) == {Fraction(-1), Fraction(0), Fraction(1)}

    def test_zero_cgap(self):
        assert cgap_image(zero_cgap()) == {Fraction(0)}
        assert zero_cgap().lattice_size() == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            Cgap(2, (1,), box_body([1, 1]))
        with pytest.raises(ValueError):
            Cgap(1, (1,), box_body([1, 1]))

    def test_json_round_trip(self):
        K = Cgap(1, (Fraction(2, 7),), interval_body(3))
        assert Cgap.from_json_dict(K.to_json_dict()) == K

    def test_product(self):
        K = ProductCgap((Cgap(1, (1,), interval_body(1)), Cgap(1, (10,), interval_body(1))))
        assert K.dim == 2 and K.rank == 2
        assert K.lattice_size() == 9
        img = K.image()
        assert len(img) == 9
        assert (Fraction(1), Fraction(-10)) in img


class TestCoverage:
    def test_neighborhood_contains(self):
        img = {Fraction(0), Fraction(3)}
        assert neighborhood_contains(img, 1, Fraction(4))  # closed boundary
        assert not neighborhood_contains(img, 1, Fraction(5))
        assert not neighborhood_contains(set(), 1, Fraction(0))

    def test_coverage_count(self):
        a = weights_1d([Fraction(1, 2), 2, -1])
        assert coverage_count({Fraction(0)}, 1, a) == 2
        assert coverage_count({Fraction(0)}, 2, a) == 3
        assert coverage_count({Fraction(0)}, Fraction(1, 4), a) == 0

    def test_coverage_vector_entries(self):
        from lostructure.distributions import WeightVector

        a = WeightVector(2, ((1, 1), (5, 0)))
        assert coverage_count({(Fraction(1), Fraction(1))}, 0, a) == 1


class TestMahlerSandwich:
    def test_box_is_its_own_sandwich(self):
        V = box_body([3, 3])
        P, t = mahler_sandwich(V)
        assert t == 1
        assert size(P) == 49
        pts = {tuple(int(c) for c in p) for p in image(P)}
        assert pts == set(lattice_points(V))

    def test_slab_contract(self):
        V = SymmetricPolytope(2, (((1, 0), 4), ((1, -2), 1)))
        S = set(lattice_points(V))
        assert len(S) == 13
        P, t = mahler_sandwich(V)
        assert t <= 3
        inner = {tuple(int(c) for c in p) for p in image(P)}
        assert inner <= S
        outer = {tuple(int(c) for c in p) for p in image(dilate(P, t))}
        assert S <= outer
        for g in P.generators:
            assert V.contains_scaled(g, 2)

    def test_origin_only(self):
        P, t = mahler_sandwich(box_body([Fraction(1, 2), Fraction(1, 2)]))
        assert P.rank == 0
        assert t == 1

    def test_rank_cap(self):
        with pytest.raises(UnsupportedRank):
            mahler_sandwich(box_body([1, 1, 1, 1]))

    def test_interval(self):
        P, t = mahler_sandwich(interval_body(Fraction(7, 2)))
        assert t == 1
        assert image(P) == {Fraction(k) for k in range(-3, 4)}


class TestEmbedProper:
    def test_already_proper_unchanged(self):
        P = gap_1d((2,), (3,))
        res = embed_proper(P)
        assert res.gap == P
        assert res.size_ratio == 1
        assert not res.collapsed

    def test_equal_generators_collapse(self):
        res = embed_proper(gap_1d((1, 1), (1, 1)))
        assert res.collapsed
        assert res.gap == gap_1d((2,), (1,))
        assert res.size_ratio == 1

    def test_commensurable_collapse(self):
        P = gap_1d((3, 2), (2, 3))
        assert not is_proper(P)
        res = embed_proper(P)
        assert res.collapsed
        assert res.gap == gap_1d((12,), (1,))
        assert is_proper(res.gap)
        assert image(P) <= image(res.gap)

    def test_zero_generator_dropped(self):
        res = embed_proper(gap_1d((1, 1), (0, 1)))
        assert res.collapsed
        assert res.gap == gap_1d((1,), (1,))

    def test_all_generators_dead(self):
        res = embed_proper(gap_1d((1,), (0,)))
        assert res.collapsed
        assert res.gap == zero_gap(1)
        assert res.size_ratio == 1

    def test_t_parameter(self):
        res = embed_proper(gap_1d((2, 2), (1, 1)), t=3)
        assert is_t_proper(res.gap, 3)
        assert image(gap_1d((2, 2), (1, 1))) <= image(res.gap)

    def test_validation(self):
        with pytest.raises(ValueError):
            embed_proper(gap_1d((1,), (1,)), t=Fraction(1, 2))
        with pytest.raises(UnsupportedRank):
            embed_proper(gap_1d((1, 1, 1), (1, 2, 4)))
        with pytest.raises(ValueError):
            embed_proper(Gap(2, 1, (1,), ((1, 0),)))

    @given(small_gaps())
    def test_contract(self, P):
        res = embed_proper(P)
        assert isinstance(res, EmbeddingResult)
        assert is_proper(res.gap)
        assert image(P) <= image(res.gap)
        assert res.gap.rank <= P.rank
