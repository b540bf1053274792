"""Residual-mass search and the concentration bound evaluators."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lostructure.beta import (
    EXACT,
    UPPER_BOUND,
    BOUND_LEDGER_HEADER,
    append_bound_ledger,
    beta,
    check_cp_bound,
    cp_bound_rhs,
    mass_outside,
    weighted_sum_bound_rhs,
)
from lostructure.concentration import MODE_EXACT, MODE_MC
from lostructure.config import RunConfig
from lostructure.distributions import (
    AtomicMeasure,
    CompoundPoissonSpec,
    levy_measure_star,
    weights_1d,
)
from lostructure.errors import FLAG_DEGENERATE_BETA, UnsupportedRank
from lostructure.gap import cgap_image, interval_body, zero_cgap


def star(entries):
    return levy_measure_star(weights_1d(entries))


class TestMassOutside:
    def test_strict_distance(self):
        W = star([1, 2, 5])
        assert mass_outside(W, {Fraction(0)}, 1) == 4
        assert mass_outside(W, {Fraction(0)}, 4) == 2
        assert mass_outside(W, {Fraction(0)}, 5) == 0

    def test_empty_set_misses_everything(self):
        assert mass_outside(star([1, 2, 5]), set(), 100) == 6

    def test_requires_line(self):
        from lostructure.distributions import WeightVector

        W2 = levy_measure_star(WeightVector(2, ((1, 0),)))
        with pytest.raises(ValueError):
            mass_outside(W2, {Fraction(0)}, 0)


class TestBetaRankZero:
    def test_closed_form(self):
        W = star([1, 2, 5])
        for tau in (0, 1, Fraction(9, 2), 5):
            res = beta(W, tau, 0, 1)
            assert res.value == mass_outside(W, {Fraction(0)}, tau)
            assert res.exactness == EXACT
            assert res.witness == zero_cgap()

    def test_vanishes_past_support(self):
        assert beta(star([1, 2]), 2, 0, 1).value == 0


class TestBetaRankOne:
    def test_unit_weights_covered(self):
        res = beta(star([1] * 6), 0, 1, 3)
        assert res.value == 0
        assert res.exactness == EXACT

    def test_budget_one_reduces_to_origin(self):
        assert beta(star([1] * 6), 0, 1, 1).value == 12

    def test_two_scale_majority(self):
        W = star([1] * 70 + [99] * 30)
        res = beta(W, 0, 1, 3)
        assert res.value == 60  # both signs of the 30 large entries
        assert res.witness.h == (Fraction(1),)

    def test_two_scale_wide_budget(self):
        assert beta(star([1] * 70 + [99] * 30), 0, 1, 199).value == 0

    def test_positive_window(self):
        res = beta(star([10, 11, 29]), 1, 1, 3)
        assert res.value == 2
        assert res.witness.h == (Fraction(10),)
        assert res.witness.body == interval_body(1)
        assert res.candidates_searched == 8

    def test_even_budget_rounds_down(self):
        W = star([10, 11, 29])
        assert beta(W, 1, 1, 2).value == mass_outside(W, {Fraction(0)}, 1)


class TestBetaRankTwo:
    def test_two_generator_cover(self):
        W = star([1, 1, 10, 10, 10])
        res = beta(W, 0, 2, 9)
        assert res.value == 0
        assert res.exactness == UPPER_BOUND
        assert res.witness.lattice_size() <= 9

    def test_exact_mode_refused(self):
        with pytest.raises(UnsupportedRank):
            beta(star([1, 2]), 0, 2, 9, mode="exact")


class TestBetaValidation:
    def test_rank_range(self):
        with pytest.raises(UnsupportedRank):
            beta(star([1]), 0, 3, 5)
        with pytest.raises(UnsupportedRank):
            beta(star([1]), 0, -1, 5)

    def test_m_floor(self):
        with pytest.raises(ValueError):
            beta(star([1]), 0, 1, 0)

    def test_tau_sign(self):
        with pytest.raises(ValueError):
            beta(star([1]), -1, 1, 3)

    def test_mode_names(self):
        with pytest.raises(ValueError):
            beta(star([1]), 0, 1, 3, mode="bogus")


@st.composite
def integer_measures(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    vals = draw(
        st.lists(st.integers(min_value=-20, max_value=20), min_size=n, max_size=n, unique=True)
    )
    masses = draw(st.lists(st.integers(min_value=1, max_value=5), min_size=n, max_size=n))
    return AtomicMeasure(1, tuple(((Fraction(v),), Fraction(m)) for v, m in zip(vals, masses)))


class TestBetaProperties:
    @given(integer_measures(), st.integers(min_value=0, max_value=3), st.integers(min_value=1, max_value=7))
    def test_witness_reproduces_value(self, W, tau, m):
        res = beta(W, tau, 1, m)
        assert mass_outside(W, cgap_image(res.witness), tau) == res.value

    @given(integer_measures(), st.integers(min_value=0, max_value=2), st.integers(min_value=1, max_value=5))
    def test_monotone_in_budget_and_rank(self, W, tau, m):
        v1 = beta(W, tau, 1, m).value
        assert v1 <= beta(W, tau, 0, 1).value
        assert beta(W, tau, 1, m + 2).value <= v1

    @given(integer_measures(), st.fractions(min_value=0, max_value=3), st.integers(min_value=0, max_value=3))
    def test_random_probes_never_beat_optimum(self, W, tau, M):
        res = beta(W, tau, 1, 2 * M + 1)
        img = cgap_image(res.witness)
        assert mass_outside(W, img, tau) == res.value
        for num in range(1, 41):
            h = Fraction(num, 7)
            probe = {k * h for k in range(-M, M + 1)}
            assert mass_outside(W, probe, tau) >= res.value


class TestBoundRhs:
    def test_compound_frozen_values(self):
        assert cp_bound_rhs(1.0, 1.0, 0, 1) == 2.0
        assert cp_bound_rhs(4.0, 1.0, 0, 1) == 1.0
        assert cp_bound_rhs(1.0, 1.0, 1, 2) == pytest.approx(0.5 + 2**2.5)

    def test_vacuous_when_residual_zero(self):
        assert cp_bound_rhs(1.0, 0.0, 0, 1) == math.inf

    def test_constant_scales_whole_bound(self):
        assert cp_bound_rhs(2.0, 1.5, 0, 1, c=2.0) == 2 * cp_bound_rhs(2.0, 1.5, 0, 1)

    def test_monotonicity(self):
        assert cp_bound_rhs(1.0, 1.0, 0, 4) < cp_bound_rhs(1.0, 1.0, 0, 2)
        assert cp_bound_rhs(9.0, 1.0, 0, 1) < cp_bound_rhs(4.0, 1.0, 0, 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            cp_bound_rhs(0.0, 1.0, 0, 1)
        with pytest.raises(ValueError):
            cp_bound_rhs(1.0, -1.0, 0, 1)

    def test_weighted_core(self):
        assert weighted_sum_bound_rhs(tau=0, p_val=4.0, r=0, m=1, beta_val=1.0) == 1.0

    def test_window_refinement_factor(self):
        core = weighted_sum_bound_rhs(tau=0, p_val=4.0, r=0, m=1, beta_val=1.0)
        both = weighted_sum_bound_rhs(kappa=2, delta=1, tau=1, p_val=4.0, r=0, m=1, beta_val=1.0)
        assert both == 3 * core
        equal = weighted_sum_bound_rhs(kappa=1, delta=1, tau=1, p_val=4.0, r=0, m=1, beta_val=1.0)
        assert equal == 2 * core

    def test_weighted_validation(self):
        assert weighted_sum_bound_rhs(tau=0, p_val=0.0, r=0, m=1, beta_val=1.0) == math.inf
        assert weighted_sum_bound_rhs(tau=0, p_val=1.0, r=0, m=1, beta_val=0.0) == math.inf
        with pytest.raises(ValueError):
            weighted_sum_bound_rhs(tau=1, p_val=1.0, r=0, m=1, beta_val=1.0)
        with pytest.raises(ValueError):
            weighted_sum_bound_rhs(tau=0, p_val=-1.0, r=0, m=1, beta_val=1.0)
        with pytest.raises(ValueError):
            weighted_sum_bound_rhs(kappa=1, delta=0, tau=1, p_val=1.0, r=0, m=1, beta_val=1.0)


class TestCheckCpBound:
    def test_exact_zero_window(self):
        cp = CompoundPoissonSpec(weights_1d([1, 1, 1, 1]), 1.0)
        rep = check_cp_bound(cp, 0, 0, 1)
        want_lhs = float(mpmath.exp(-2) * mpmath.besseli(0, 2))
        assert rep.lhs.mode == MODE_EXACT
        assert abs(rep.lhs.value - want_lhs) < 1e-9
        assert rep.rhs == pytest.approx(math.sqrt(2))  # alpha=2, beta=1
        assert rep.slack == pytest.approx(rep.rhs / rep.lhs.value)
        assert rep.flags == ()
        assert rep.constants_used == {"c_cp": 1.0}
        assert rep.params["n"] == 4 and rep.params["r"] == 0 and rep.params["m"] == 1

    def test_degenerate_residual_flagged(self):
        cp = CompoundPoissonSpec(weights_1d([1, 1]), 1.0)
        rep = check_cp_bound(cp, 1, 0, 1)
        assert rep.flags == (FLAG_DEGENERATE_BETA,)
        assert rep.rhs == math.inf
        assert rep.slack == math.inf

    def test_window_estimate_deterministic(self):
        cfg = RunConfig(mc_samples=10**4)
        cp = CompoundPoissonSpec(weights_1d([1, 1]), 1.0)
        a = check_cp_bound(cp, Fraction(1, 2), 0, 1, cfg)
        b = check_cp_bound(cp, Fraction(1, 2), 0, 1, cfg)
        assert a.lhs.mode == MODE_MC
        assert a.lhs.value == b.lhs.value
        assert 0 < a.lhs.value <= 1


class TestBoundLedger:
    def test_header_once_then_rows(self, tmp_path):
        path = tmp_path / "bounds.csv"
        rep = check_cp_bound(CompoundPoissonSpec(weights_1d([1, 1]), 1.0), 0, 0, 1)
        append_bound_ledger(path, "a-1", rep)
        append_bound_ledger(path, "a-2", rep)
        lines = path.read_text().splitlines()
        assert lines[0] == BOUND_LEDGER_HEADER
        assert len(lines) == 3
        assert lines[1].startswith("a-1,2,0,1,0,")
        assert all(len(line.split(",")) == 9 for line in lines[1:])
