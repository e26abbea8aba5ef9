import math

import pytest
from scipy.optimize import brentq

from rrgraph.branching import (
    BranchingConfig,
    OffspringLaw,
    grow_restricted_tree,
    restricted_tree_parameters,
    simulate_branching,
    simulate_restricted_trees,
    survival_fixed_point,
    total_progeny_tail,
    wp,
    wp_report,
)
from rrgraph.errors import InfeasibleParameterError, InvalidParameterError
from rrgraph.signed_perm import GeneratorSet, SignedPerm, compose, identity, reversal_as_perm


def bisection_root(lam):
    return brentq(lambda x: -math.expm1(-lam * x) - x, 1e-12, 1.0, xtol=1e-14)


def binomial_survival(m, p):
    """Positive root of 1 - x = (1 - p x)^m"""
    return brentq(lambda x: (1.0 - p * x) ** m - (1.0 - x), 1e-9, 1.0, xtol=1e-14)


class TestSurvivalFixedPoint:
    def test_lambda_two(self):
        result = survival_fixed_point(1.0)
        assert result.root == pytest.approx(0.796812, abs=1e-6)
        assert result.root == pytest.approx(bisection_root(2.0), abs=1e-10)
        assert abs(result.residual) <= 1e-12

    def test_half(self):
        assert survival_fixed_point(0.5).root == pytest.approx(0.582812, abs=1e-6)

    def test_small_epsilon_branch(self):
        eps = 0.01
        assert abs(survival_fixed_point(eps).root - 2 * eps) <= 0.05 * 2 * eps

    @pytest.mark.parametrize("eps", [-0.5, -1.0, 0.0])
    def test_not_supercritical(self, eps):
        assert survival_fixed_point(eps).root == 0.0

    @pytest.mark.parametrize("eps", [1e-6, 1e-3, 0.2, 3.0, 30.0])
    def test_matches_bisection(self, eps):
        root = survival_fixed_point(eps).root
        assert 0.0 < root < 1.0
        assert root == pytest.approx(bisection_root(1.0 + eps), rel=1e-8)

    def test_monotone_in_epsilon(self):
        roots = [survival_fixed_point(e).root for e in (0.1, 0.2, 0.5, 1.0, 2.0)]
        assert roots == sorted(roots)

    def test_rejects_nan(self):
        with pytest.raises(InvalidParameterError):
            survival_fixed_point(float("nan"))


class TestWp:
    def test_report(self):
        report = wp_report(0.5, 16)
        assert report.root == pytest.approx(0.582812, abs=1e-6)
        assert report.small_epsilon_branch == 1.0
        assert report.in_range

    def test_window(self):
        n = 10**8
        eps = n ** -0.125
        report = wp_report(eps, n)
        assert report.in_range
        assert report.root == pytest.approx(2 * eps, rel=0.25)

    def test_outside_window_flagged(self):
        assert not wp_report(1.5, 16).in_range
        assert not wp_report(0.1, 16).in_range

    def test_wp_is_the_root(self):
        assert wp(1.0, 8) == survival_fixed_point(1.0).root


class TestBranchingConfig:
    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            BranchingConfig.binomial(10, 1.5)
        with pytest.raises(InvalidParameterError):
            BranchingConfig.p0(1, 0.5)
        with pytest.raises(InvalidParameterError):
            BranchingConfig.poisson(-1.0)

    def test_build_surfaces_the_failed_check(self):
        with pytest.raises(InvalidParameterError, match="p must lie in"):
            BranchingConfig.build(offspring=OffspringLaw.BINOMIAL, m=4, p=2.0)

    def test_checks_run_on_model_validate(self):
        with pytest.raises(ValueError, match="P0 process needs m >= 2"):
            BranchingConfig.model_validate({"offspring": "p0", "m": 1, "p": 0.5})
        config = BranchingConfig.model_validate({"offspring": "binomial", "m": 4, "p": 0.5})
        assert config.m == 4


class TestSimulation:
    def test_deterministic_and_thread_independent(self):
        config = BranchingConfig.binomial(20, 0.08)
        a = simulate_branching(config, 3000, master_seed=5, block_size=500, threads=1)
        b = simulate_branching(config, 3000, master_seed=5, block_size=500, threads=4)
        assert a == b

    def test_subcritical_dies(self):
        estimate = simulate_branching(BranchingConfig.binomial(10, 0.05), 2000, master_seed=1)
        assert estimate.mean <= 0.01

    def test_zero_offspring(self):
        estimate = simulate_branching(BranchingConfig.poisson(0.0), 100, master_seed=1)
        assert estimate.survivors == 0

    def test_ordering_of_survival_bounds(self):
        """pi(m-1) <= pi_0 <= pi(m) up to confidence-interval overlap"""
        m, p = 50, 1.5 / 50
        lower = simulate_branching(BranchingConfig.binomial(m - 1, p), 10_000, master_seed=11)
        middle = simulate_branching(BranchingConfig.p0(m, p), 10_000, master_seed=12)
        upper = simulate_branching(BranchingConfig.binomial(m, p), 10_000, master_seed=13)
        assert lower.lower <= middle.upper
        assert middle.lower <= upper.upper
        assert lower.lower <= upper.upper

    @pytest.mark.parametrize("m", [10, 100, 1000])
    def test_binomial_matches_exact_survival(self, m):
        estimate = simulate_branching(BranchingConfig.binomial(m, 2.0 / m), 10_000, master_seed=m)
        exact = binomial_survival(m, 2.0 / m)
        se = math.sqrt(exact * (1 - exact) / 10_000)
        assert abs(estimate.mean - exact) <= 4 * se

    def test_binomial_approaches_poisson(self):
        poisson = survival_fixed_point(1.0).root
        gaps = [abs(binomial_survival(m, 2.0 / m) - poisson) for m in (10, 100, 1000)]
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[-1] < 1e-3

    def test_poisson_two(self):
        estimate = simulate_branching(BranchingConfig.poisson(2.0), 10_000, master_seed=3)
        assert estimate.lower - 0.01 <= 0.796812 <= estimate.upper + 0.01


class TestTotalProgeny:
    def test_trivial(self):
        assert total_progeny_tail(10, 0.3, 1) == 1.0
        assert total_progeny_tail(10, 0.0, 2) == 0.0

    def test_single_child_law(self):
        """m = 1: the tree is a path, so P(T >= k) = p^(k-1)"""
        assert total_progeny_tail(1, 0.4, 4) == pytest.approx(0.4**3)

    def test_two_children(self):
        # T = 1 w.p. (1-p)^2, T = 2 w.p. 2p(1-p)^3
        p = 0.3
        expected = 1 - (1 - p) ** 2 - 2 * p * (1 - p) ** 3
        assert total_progeny_tail(2, p, 3) == pytest.approx(expected)

    def test_bounded_below_by_survival(self):
        m = 1000
        assert total_progeny_tail(m, 1.5 / m, 10) >= survival_fixed_point(0.5).root - 0.01


class TestRestrictedTreeParameters:
    def test_n64(self):
        params = restricted_tree_parameters(64)
        assert params.half_floor == 11
        assert params.target_size == 5
        assert params.admissible_count == 1431
        assert params.m_offspring == 1166

    def test_exact_floors(self):
        # 16^(3/4) = 8 exactly; a floating pow can land just below
        params = restricted_tree_parameters(16)
        assert params.half_floor == 4
        assert params.target_size == 2

    def test_infeasible(self):
        with pytest.raises(InfeasibleParameterError):
            restricted_tree_parameters(8)


class TestRestrictedTree:
    def test_lambda_zero_fails(self):
        run = grow_restricted_tree(32, 0.0, seed=1)
        assert run.vertices == [identity(32).entries]
        assert not run.succeeded

    def test_lambda_one_succeeds(self):
        n = 32
        params = restricted_tree_parameters(n)
        run = grow_restricted_tree(n, 1.0, seed=1)
        assert run.succeeded
        assert len(run.vertices) == params.target_size
        assert len(set(run.vertices)) == len(run.vertices)
        lefts = [pair[0] for _, _, pair in run.parent_edges]
        assert len(set(lefts)) == len(lefts)
        for parent, child, (left, right) in run.parent_edges:
            assert params.half_floor + 1 <= left <= right <= n
            expected = compose(SignedPerm(run.vertices[parent]), reversal_as_perm(n, left, right))
            assert expected.entries == run.vertices[child]

    def test_children_in_lex_order(self):
        """At lambda = 1 the root's first child is the lex-smallest admissible neighbor"""
        n = 32
        params = restricted_tree_parameters(n)
        run = grow_restricted_tree(n, 1.0, seed=2)
        first = min(
            (compose(identity(n), g) for g in GeneratorSet.reversals(n).elements
             if g.entries[: params.half_floor] == tuple(range(1, params.half_floor + 1))),
            key=lambda v: tuple(2 * abs(e) - (e < 0) for e in v.entries),
        )
        assert run.vertices[1] == first.entries

    def test_deterministic(self):
        a = grow_restricted_tree(48, 0.002, seed=9)
        b = grow_restricted_tree(48, 0.002, seed=9)
        assert a == b

    def test_matches_total_progeny_quick(self):
        n = 64
        params = restricted_tree_parameters(n)
        lam = 1.5 / params.m_offspring
        summary = simulate_restricted_trees(n, lam, 400, master_seed=21)
        assert summary.duplicates == 0
        se = math.sqrt(summary.predicted_tail * (1 - summary.predicted_tail) / 400)
        assert abs(summary.frequency - summary.predicted_tail) <= 4 * se + 1e-9
        floor = survival_fixed_point(0.5).root
        assert summary.frequency >= floor - 3 * math.sqrt(floor * (1 - floor) / 400)

    @pytest.mark.slow
    def test_n64_at_threshold_scale(self):
        """lambda = 1.5 / C(65, 2) gives lambda * m < 1 at n = 64; the oracle is the exact tail"""
        n = 64
        lam = 1.5 / math.comb(65, 2)
        summary = simulate_restricted_trees(n, lam, 2000, master_seed=64, threads=-1)
        assert summary.duplicates == 0
        p = summary.predicted_tail
        assert abs(summary.frequency - p) <= 4 * math.sqrt(p * (1 - p) / 2000)
