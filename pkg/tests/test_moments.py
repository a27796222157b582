import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_moments, distribution_for_score
from qkclf import circuits, moments
from qkclf.circuits import ClassifierSpec, OutcomeDistribution
from qkclf.errors import DegenerateDistribution, ScoreOutOfRange, UndecidableScore


class TestMomentsFromDistribution:
    def test_pure_outcome(self):
        r = moments.moments_from_distribution(OutcomeDistribution((1, 0, 0, 0)), 1)
        assert (r.mean, r.variance) == (1, 0)
        assert r.skewness is None and r.degenerate

    def test_uniform(self):
        r = moments.moments_from_distribution(OutcomeDistribution((0.25,) * 4), 2)
        assert r.mean == 0 and r.variance == 4 and r.skewness == 0

    def test_toy(self, toy):
        r = moments.moments_from_distribution(circuits.simulate_distribution(toy, ClassifierSpec()), 1)
        assert abs(r.mean - 0.5) < 1e-12
        assert abs(r.variance - 0.75) < 1e-12

    @pytest.mark.parametrize("f", [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9])
    @pytest.mark.parametrize("lam", [1, 2, 3])
    def test_brute_force(self, f, lam):
        p = distribution_for_score(f)
        r = moments.moments_from_distribution(OutcomeDistribution(p), lam)
        mean, m2, m3, var, skew = brute_moments(p, lam)
        assert r.second_moment == lam**2
        assert abs(r.mean - mean) < 1e-12
        assert abs(r.third_moment - m3) < 1e-10
        assert abs(r.variance - var) < 1e-10
        assert abs(r.skewness - skew) < 1e-10
        assert abs(r.score - f) < 1e-12

    @given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3), st.integers(1, 4))
    def test_property_any_distribution(self, raw, lam):
        p = np.array(raw) / sum(raw)
        r = moments.moments_from_distribution(OutcomeDistribution(tuple(p)), lam)
        mean, _, m3, var, skew = brute_moments(p, lam)
        assert abs(r.variance - var) < 1e-9 * lam**2
        if var > 1e-6:
            assert abs(r.skewness - skew) < 1e-6


class TestClosedForms:
    def test_variance_examples(self):
        assert moments.variance_of_score(0.0) == 1
        assert moments.variance_of_score(1.0) == 0 and moments.variance_of_score(-1.0) == 0
        assert abs(moments.variance_of_score(0.5, 3) - 6.75) < 1e-15

    def test_variance_cross_check(self):
        _, _, _, var, _ = brute_moments(distribution_for_score(0.5), 3)
        assert abs(var - 6.75) < 1e-12

    def test_skewness_examples(self):
        assert moments.skewness_of_score(0.0) == 0
        assert abs(moments.skewness_of_score(0.6) + 1.5) < 1e-12
        assert abs(moments.skewness_of_score(0.5) + 1.1547) < 1e-4
        assert abs(brute_moments(distribution_for_score(0.6), 1)[4] + 1.5) < 1e-12

    def test_errors(self):
        with pytest.raises(ScoreOutOfRange):
            moments.variance_of_score(1.5)
        with pytest.raises(DegenerateDistribution):
            moments.skewness_of_score(1.0)

    @given(st.floats(-0.999, 0.999), st.integers(1, 5))
    def test_skew_independent_of_lambda(self, f, lam):
        r = moments.moments_from_distribution(OutcomeDistribution(distribution_for_score(f)), lam)
        assert abs(r.skewness - moments.skewness_of_score(f)) < 1e-6 * (1 + abs(r.skewness))


class TestPlanShots:
    def test_reference_case(self):
        plan = moments.plan_shots(0.5, c=2, delta=0.1)
        assert plan.shots == 120
        assert plan.epsilon == 0.25

    @pytest.mark.parametrize("c,delta", [(2, 0.1), (3, 0.05), (10, 0.5)])
    def test_certain_score(self, c, delta):
        assert moments.plan_shots(1.0, c=c, delta=delta).shots == 1

    @pytest.mark.parametrize("f", [0.9, 0.5, 0.1, -0.3])
    def test_lambda_invariant(self, f):
        counts = {moments.plan_shots(f, lam, 2, 0.1).shots for lam in (1, 2, 3, 4)}
        assert len(counts) == 1

    @given(st.floats(0.01, 0.99), st.floats(1.01, 10), st.floats(0.001, 0.99))
    def test_formula(self, f, c, delta):
        plan = moments.plan_shots(f, 1, c, delta)
        exact = (1 - f * f) * c * c / (delta * f * f)
        assert plan.shots >= exact - 1e-6
        assert plan.shots < exact + 1

    def test_errors(self):
        with pytest.raises(UndecidableScore):
            moments.plan_shots(0.0)
        with pytest.raises(ValueError):
            moments.plan_shots(0.5, c=1.0)
        with pytest.raises(ValueError):
            moments.plan_shots(0.5, delta=1.0)

    def test_ceiling_ignores_dust(self):
        assert moments.ceil_count(120.00000000000001) == 120
        assert moments.ceil_count(120.2) == 121
        assert moments.ceil_count(0.0) == 1
