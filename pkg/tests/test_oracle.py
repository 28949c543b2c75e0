from dataclasses import replace
from itertools import product

import numpy as np
import pytest

from pga_lab import (
    ABSTAIN,
    Abstain,
    AuctionParams,
    Bid,
    MixedStrategy,
    PureProfile,
    best_response_scan,
    certify_equilibrium,
    cdf_sensitivity_check,
    comparative_statics_check,
    expected_payoff_vs_symmetric,
    find_pure_deviation,
    hillman_samet_check,
    monte_carlo_replay,
    pure_payoff,
    revenue_report,
    solve_equilibrium,
)

from _util import philox, random_params

REF = AuctionParams(10, 1, 0.1, 0.1, 20)


class TestMonteCarloReplay:
    def test_bit_identical_given_seed(self):
        eq = solve_equilibrium(REF)
        a = monte_carlo_replay(REF, eq, trials=50_000, seed=9)
        b = monte_carlo_replay(REF, eq, trials=50_000, seed=9)
        assert a == b
        c = monte_carlo_replay(REF, eq, trials=50_000, seed=10)
        assert c.revenue.mean != a.revenue.mean

    def test_agreement_with_closed_forms(self):
        rng = philox(77)
        for i in range(5):
            params = random_params(rng, max_agents=24)
            eq = solve_equilibrium(params)
            rep = monte_carlo_replay(params, eq, trials=40_000, seed=100 + i)
            closed = revenue_report(params)
            assert rep.revenue.within(closed.expected_revenue)
            assert rep.submitted_txs.within(closed.expected_submitted_txs)
            assert rep.base_revenue.within(closed.base_revenue)
            assert rep.priority_revenue.within(closed.priority_revenue)
            assert rep.per_agent_payoff.within(0.0)

    def test_near_total_abstention_yields_near_zero_revenue(self):
        # value barely above the fee with a full base penalty
        params = AuctionParams(1.0 + 1e-6, 1.0, 1.0, 1.0, 10)
        eq = solve_equilibrium(params)
        assert eq.abstain_prob > 0.999
        rep = monte_carlo_replay(params, eq, trials=20_000, seed=4)
        assert rep.revenue.mean == pytest.approx(0.0, abs=1e-2)

    def test_standard_error_scales(self):
        eq = solve_equilibrium(REF)
        small = monte_carlo_replay(REF, eq, trials=10_000, seed=5)
        large = monte_carlo_replay(REF, eq, trials=160_000, seed=5)
        assert large.revenue.std_error < small.revenue.std_error / 3


class TestBestResponseScan:
    def test_equilibrium_certificate(self):
        rng = philox(55)
        for _ in range(10):
            params = random_params(rng)
            cert = certify_equilibrium(params, solve_equilibrium(params))
            assert cert.passed
            assert cert.max_payoff <= 1e-9
            assert cert.max_overbid_payoff < 0.0

    def test_grid_size_enforced(self):
        with pytest.raises(ValueError):
            best_response_scan(REF, solve_equilibrium(REF), grid_points=10)

    def test_flags_overabstention(self):
        eq = solve_equilibrium(REF)
        shifted = MixedStrategy(
            abstain_prob=eq.abstain_prob + 0.05,
            cdf=eq.cdf,
            quantile=eq.quantile,
            support=(0.0, eq.support_max),
        )
        assert best_response_scan(REF, shifted) > 1e-4

    def test_flags_underabstention_via_support_payoffs(self):
        eq = solve_equilibrium(REF)
        shifted = MixedStrategy(
            abstain_prob=eq.abstain_prob - 1e-3,
            cdf=eq.cdf,
            quantile=eq.quantile,
            support=(0.0, eq.support_max),
        )
        # opponents participate too often: every bid is now strictly losing
        assert best_response_scan(REF, shifted) == 0.0
        assert expected_payoff_vs_symmetric(REF, shifted, 0.0) < -1e-9

    def test_flags_one_mil_shift_either_way(self):
        eq = solve_equilibrium(REF)
        for delta in (+1e-3, -1e-3):
            shifted = MixedStrategy(
                abstain_prob=eq.abstain_prob + delta,
                cdf=eq.cdf,
                quantile=eq.quantile,
                support=(0.0, eq.support_max),
            )
            max_payoff = best_response_scan(REF, shifted)
            min_at_zero = expected_payoff_vs_symmetric(REF, shifted, 0.0)
            assert max_payoff > 1e-9 or min_at_zero < -1e-9

    def test_overbid_probes_strictly_negative(self):
        eq = solve_equilibrium(REF)
        for eps in (1e-9, 1e-3, 0.5):
            payoff = expected_payoff_vs_symmetric(
                REF, eq.strategy, REF.breakeven_bid * (1 + eps)
            )
            assert payoff < 0.0


class TestFindPureDeviation:
    def test_deviation_for_every_grid_profile_with_penalties(self):
        params = AuctionParams(10, 1, 0.1, 0.0, 3)
        grid = [None] + [i * 0.9 for i in range(11)]
        for actions in product(grid, repeat=3):
            dev = find_pure_deviation(params, PureProfile.of(actions))
            assert dev is not None
            assert dev.gain > 0.0

    def test_breakeven_pair_is_equilibrium_without_penalties(self):
        params = AuctionParams(10, 1, 0.0, 0.0, 3)
        assert find_pure_deviation(params, PureProfile.of([9, 9, None])) is None
        assert find_pure_deviation(params, PureProfile.of([9, 9, 3])) is None

    def test_unique_top_bid_attracts_an_overbid(self):
        params = AuctionParams(10, 1, 0.0, 0.0, 3)
        dev = find_pure_deviation(params, PureProfile.of([8, 2, None]))
        assert dev is not None
        assert isinstance(dev.action, Bid)
        assert dev.action.amount == pytest.approx(8.5)
        assert dev.agent != 0

    def test_overbidder_prefers_to_abstain(self):
        params = AuctionParams(10, 1, 0.2, 0.2, 3)
        dev = find_pure_deviation(params, PureProfile.of([10, 1, None]))
        assert dev is not None
        assert isinstance(dev.action, Abstain)

    def test_constructed_deviations_verified_exhaustively(self):
        # the claimed deviation must beat every grid alternative's guarantee:
        # cross-check gains against an exhaustive scan of grid actions
        params = AuctionParams(10, 1, 0.1, 0.1, 3)
        grid_actions = [ABSTAIN] + [Bid(i * 0.9) for i in range(11)]
        rng = philox(14)
        profiles = [
            PureProfile.of([rng.choice([None, 0.0, 2.7, 5.4, 8.1, 9.0, 9.9]) for _ in range(3)])
            for _ in range(60)
        ]
        for profile in profiles:
            dev = find_pure_deviation(params, profile)
            assert dev is not None
            best_grid_gain = -np.inf
            for alt in grid_actions:
                actions = list(profile.actions)
                actions[dev.agent] = alt
                gain = pure_payoff(params, PureProfile(tuple(actions)), dev.agent) - dev.original_payoff
                best_grid_gain = max(best_grid_gain, gain)
            # the construction may use off-grid bids, so it can beat the grid,
            # but it must be strictly profitable whenever the grid scan is
            if best_grid_gain > 0:
                assert dev.gain > 0


class TestComparativeStatics:
    def test_all_signs_pass_at_low_markup_point(self):
        base = AuctionParams(2.0, 1.0, 0.5, 0.05, 20)
        checks = comparative_statics_check(base) + cdf_sensitivity_check(base)
        assert all(c.passed for c in checks)
        assert len(checks) == 13

    def test_priority_rate_never_moves_abstention(self):
        base = AuctionParams(10, 1, 0.1, 0.1, 5)
        checks = {(c.quantity, c.parameter): c for c in comparative_statics_check(base)}
        entry = checks[("abstain_prob", "revert_rate_priority")]
        assert entry.derivative == 0.0
        assert entry.passed

    def test_known_failure_of_published_r1_direction_at_high_markup(self):
        # documented counterexample: at V=10, g=1, r1=r2=0.1, N=5 the expected
        # bid RISES with r1 (the abstention response dominates), so 7 of the 8
        # published directions hold and the (expected_bid, r1) check fails;
        # verified independently by quadrature and Monte Carlo
        base = AuctionParams(10, 1, 0.1, 0.1, 5)
        checks = {(c.quantity, c.parameter): c for c in comparative_statics_check(base)}
        failing = checks[("expected_bid", "revert_rate_base")]
        assert not failing.passed
        assert failing.derivative > 0.0
        others = [c for key, c in checks.items() if key != ("expected_bid", "revert_rate_base")]
        assert all(c.passed for c in others)
        # direct confirmation without finite differences
        lo = solve_equilibrium(replace(base, revert_rate_base=0.05)).expected_bid()
        hi = solve_equilibrium(replace(base, revert_rate_base=0.20)).expected_bid()
        assert hi > lo

    def test_cdf_pointwise_signs_at_low_markup_point(self):
        base = AuctionParams(2.0, 1.0, 0.5, 0.05, 20)
        for check in cdf_sensitivity_check(base):
            assert check.passed, check


class TestHillmanSamet:
    def test_reference_deviation_bound(self):
        assert hillman_samet_check(1.0, 0.1, 2, grid_points=1001) <= 1e-10

    def test_holds_for_larger_fields(self):
        for n in (5, 10):
            assert hillman_samet_check(1.0, 0.1, n, grid_points=1001) <= 1e-10

    def test_plateau_below_minimum_outlay(self):
        params = AuctionParams(1.0, 0.1, 1.0, 1.0, 2)
        eq = solve_equilibrium(params)
        assert eq.abstain_prob == pytest.approx((0.1 / 1.0) ** (1 / 1), rel=1e-15)
