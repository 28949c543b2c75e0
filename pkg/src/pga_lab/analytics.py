"""Equilibrium outcome quantities in closed form.

Everything here follows from the symmetric equilibrium plus rent dissipation:
agents net zero in expectation, so whenever anyone participates the full value
V flows to the sequencer. Revenue therefore equals (1 - p*^N) V, splits into a
base-fee and a priority-fee component, and admits finite N -> infinity limits
whenever r1 > 0.

When r1 = 0 every agent participates (p* = 0) regardless of r2, so the report
uses the full-participation conventions: revenue exactly V for any N, base
component exactly g, and an unbounded submitted-transaction limit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .equilibrium import solve_equilibrium
from .errors import CostTooLarge
from .model import AuctionParams
from .numerics import log_binom_pmf

_PMF_TRUNCATION = 1e-15  # drop binomial terms below this fraction of running mass


@dataclass(frozen=True)
class RevenueLimits:
    """N -> infinity values of the report quantities (r1 > 0), or the
    full-participation conventions (r1 = 0, submitted txs unbounded)."""

    revenue: float
    base_revenue: float
    priority_revenue: float
    submitted_txs: float
    submitted_unbounded: bool


@dataclass(frozen=True)
class RevenueReport:
    abstain_prob: float
    participation_prob: float
    expected_revenue: float
    base_revenue: float
    priority_revenue: float
    expected_submitted_txs: float
    limits: RevenueLimits


def revenue_report(params: AuctionParams) -> RevenueReport:
    """Expected sequencer revenue, its base/priority decomposition, expected
    submitted transactions, and their large-N limits.

    None of the quantities depends on r2: participation is pinned by r1 alone,
    and rent dissipation fixes the totals.
    """
    v, g = params.value, params.base_fee
    r1, n = params.revert_rate_base, params.num_agents
    vg = params.breakeven_bid
    if r1 == 0.0:
        return RevenueReport(
            abstain_prob=0.0,
            participation_prob=1.0,
            expected_revenue=v,
            base_revenue=g,
            priority_revenue=vg,
            expected_submitted_txs=float(n),
            limits=RevenueLimits(v, g, vg, math.inf, submitted_unbounded=True),
        )
    rg = r1 * g
    # log-space keeps 1 - p accurate for N up to ~1e6
    log_ratio = math.log(rg) - math.log(vg + rg)
    p_star = math.exp(log_ratio / (n - 1))
    one_minus_p = -math.expm1(log_ratio / (n - 1))
    one_minus_pn = -math.expm1(log_ratio * n / (n - 1))
    revenue = one_minus_pn * v
    excess_losers = one_minus_p * n - one_minus_pn
    base = one_minus_pn * g + excess_losers * rg
    priority = one_minus_pn * vg - excess_losers * rg
    p_inf = vg / (vg + rg)
    s_inf = math.log1p(vg / rg)
    limits = RevenueLimits(
        revenue=v * p_inf,
        base_revenue=g * p_inf * (1.0 - r1) + rg * s_inf,
        priority_revenue=vg - rg * s_inf,
        submitted_txs=s_inf,
        submitted_unbounded=False,
    )
    return RevenueReport(
        abstain_prob=p_star,
        participation_prob=one_minus_pn,
        expected_revenue=revenue,
        base_revenue=base,
        priority_revenue=priority,
        expected_submitted_txs=one_minus_p * n,
        limits=limits,
    )


def welfare_loss(params: AuctionParams) -> float:
    """Expected value left unextracted: V - expected revenue = V p*^N."""
    return params.value - revenue_report(params).expected_revenue


def _check_cost(params: AuctionParams, c: float) -> None:
    if not (math.isfinite(c) and c >= 0.0):
        raise ValueError(f"cost must be finite and non-negative, got {c}")
    if c >= params.breakeven_bid:
        raise CostTooLarge(
            f"cost {c} must stay below breakeven bid {params.breakeven_bid}"
        )


def scheme1_profit(params: AuctionParams, c: float) -> float:
    """Sequencer profit when it absorbs a processing cost c per submitted
    transaction: (1 - p*^N) V - c (1 - p*) N, at the params' own r1."""
    _check_cost(params, c)
    rep = revenue_report(params)
    return rep.expected_revenue - c * rep.expected_submitted_txs


def scheme1_optimal_r1(params: AuctionParams, c: float) -> float:
    """Profit-maximizing base-fee revert rate under internalized costs:
    r1* = c(V-g) / ((V-c) g), capped at 1 (the cap binds exactly when c > g)."""
    _check_cost(params, c)
    v, g = params.value, params.base_fee
    return min(c * (v - g) / ((v - c) * g), 1.0)


def scheme1_profit_curve(
    params: AuctionParams, c: float, grid_points: int = 10_001
) -> tuple[np.ndarray, np.ndarray]:
    """Scheme-1 profit over an r1 grid on [0, 1] (vectorized, for scans)."""
    _check_cost(params, c)
    v, g, n = params.value, params.base_fee, params.num_agents
    vg = params.breakeven_bid
    r1 = np.linspace(0.0, 1.0, grid_points)
    ratio = r1 * g / (vg + r1 * g)
    p = ratio ** (1.0 / (n - 1))
    profit = (1.0 - p**n) * v - c * (1.0 - p) * n
    return r1, profit


def scheme1_optimal_r1_scan(
    params: AuctionParams, c: float, grid_points: int = 10_001
) -> float:
    """Brute-force argmax of scheme-1 profit over an r1 grid; the independent
    check on scheme1_optimal_r1."""
    r1, profit = scheme1_profit_curve(params, c, grid_points)
    return float(r1[int(np.argmax(profit))])


def scheme2_revenue(params: AuctionParams, c: float) -> float:
    """Expected sequencer revenue when every participant pays the flat
    processing charge c itself: (1 - p*^N) V at the entry-cost equilibrium.

    This is the gross inflow (auction payments plus collected charges); the
    charges exactly cover the sequencer's own per-transaction cost, and rent
    dissipation makes the gross inflow equal the extracted value.
    """
    _check_cost(params, c)
    rg = params.revert_rate_base * params.base_fee
    ratio = (rg + c) / (params.breakeven_bid + rg)
    p_star = ratio ** (1.0 / (params.num_agents - 1))
    return (1.0 - p_star**params.num_agents) * params.value


class Winner(enum.Enum):
    SCHEME1 = "scheme1"
    SCHEME2 = "scheme2"
    TIE = "tie"


@dataclass(frozen=True)
class SchemeComparison:
    c: float
    optimal_r1: float
    scheme1_profit_at_optimum: float
    scheme2_revenue_at_r1_zero: float
    winner: Winner


def compare_schemes(params: AuctionParams, c: float, tol: float = 1e-9) -> SchemeComparison:
    """Scheme 1 (sequencer internalizes cost c, at its profit-optimal r1)
    versus scheme 2 (participants pay c, full revert protection r1 = 0)."""
    _check_cost(params, c)
    r1_opt = scheme1_optimal_r1(params, c)
    profit1 = scheme1_profit(replace(params, revert_rate_base=r1_opt), c)
    revenue2 = scheme2_revenue(replace(params, revert_rate_base=0.0), c)
    if abs(revenue2 - profit1) <= tol:
        winner = Winner.TIE
    elif revenue2 > profit1:
        winner = Winner.SCHEME2
    else:
        winner = Winner.SCHEME1
    return SchemeComparison(
        c=c,
        optimal_r1=r1_opt,
        scheme1_profit_at_optimum=profit1,
        scheme2_revenue_at_r1_zero=revenue2,
        winner=winner,
    )


@dataclass(frozen=True)
class MevTaxParams:
    """An application-level tax at rate tau on the portion of the bid kept by
    the application, refunded on revert.

    With a raw revert rate r on all gas and the bid measured as the winner's
    total non-base payment b = (1 + tau) * b_tilde, the game is the standard
    one with r1 = r and r2 = r / (1 + tau).
    """

    raw_revert_rate: float
    tax_rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.raw_revert_rate) and 0.0 <= self.raw_revert_rate <= 1.0):
            raise ValueError(f"raw revert rate must lie in [0, 1], got {self.raw_revert_rate}")
        if not (math.isfinite(self.tax_rate) and self.tax_rate >= 0.0):
            raise ValueError(f"tax rate must be non-negative, got {self.tax_rate}")

    @property
    def r1(self) -> float:
        return self.raw_revert_rate

    @property
    def r2(self) -> float:
        return self.raw_revert_rate / (1.0 + self.tax_rate)

    @property
    def bid_scale(self) -> float:
        """Effective bid per unit of pre-tax priority fee: b = (1+tau) b_tilde."""
        return 1.0 + self.tax_rate


def mev_tax_reparameterize(raw_revert_rate: float, tax_rate: float) -> MevTaxParams:
    return MevTaxParams(raw_revert_rate, tax_rate)


def expected_winning_bid(params: AuctionParams, entry_cost: float = 0.0) -> float:
    """E[winning bid], counting 0 when everyone abstains:
    sum over k of P(participants = k) * E[max of k draws from F*]."""
    eq = solve_equilibrium(params, entry_cost)
    n = params.num_agents
    succ = 1.0 - eq.abstain_prob
    log_pmf = np.array([log_binom_pmf(k, n, succ) for k in range(1, n + 1)])
    pmf = np.exp(log_pmf)
    order = np.argsort(pmf, kind="stable")[::-1]
    total = 0.0
    mass = 0.0
    for idx in order:
        w = pmf[idx]
        if mass > 0.0 and w < _PMF_TRUNCATION * mass:
            break
        total += w * eq.expected_max_bid(int(idx) + 1)
        mass += w
    return total


def expected_mev_tax(params: AuctionParams, tax_rate: float) -> float:
    """Expected per-auction tax take: tau/(1+tau) times the expected winning
    bid under the reparameterized penalties (r1 = r, r2 = r/(1+tau)).

    The raw rate r is taken from params.revert_rate_base; the priority-fee
    rate is overridden by the reparameterization.
    """
    if not (math.isfinite(tax_rate) and tax_rate >= 0.0):
        raise ValueError(f"tax rate must be non-negative, got {tax_rate}")
    if tax_rate == 0.0:
        return 0.0
    reparam = mev_tax_reparameterize(params.revert_rate_base, tax_rate)
    taxed = replace(params, revert_rate_priority=reparam.r2)
    return tax_rate / (1.0 + tax_rate) * expected_winning_bid(taxed)


def mev_tax_asymptote(params: AuctionParams) -> float:
    """Large-tau value of the expected tax: the winning-bid expectation with
    the priority-fee revert rate driven to zero."""
    return expected_winning_bid(replace(params, revert_rate_priority=0.0))
