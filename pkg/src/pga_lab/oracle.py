"""Independent numerical verification of the closed forms.

Nothing here reuses an analytics formula as its own check: revenue and payoffs
are re-derived by replaying auctions draw by draw, the equilibrium is certified
by scanning deviation payoffs, pure-strategy claims are checked by explicit
deviation construction, comparative statics by finite differences, and the
quantile by bisection against the CDF.

Randomness comes from numpy's Philox counter-based generator. Work is split
into fixed-size chunks, each driven by a SeedSequence-spawned child stream, so
results are reproducible bit for bit regardless of how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .equilibrium import Equilibrium, solve_equilibrium
from .model import (
    ABSTAIN,
    Action,
    AuctionParams,
    Bid,
    MixedStrategy,
    PureProfile,
    expected_payoff_vs_symmetric,
    pure_payoff,
)
from .errors import NumericsError
from .numerics import bisection_inverse

_CHUNK = 1 << 16


def _chunk_rngs(seed: int, n_chunks: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    return [np.random.Generator(np.random.Philox(ss)) for ss in children]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_se * self.std_error


@dataclass(frozen=True)
class ReplayReport:
    """Monte Carlo estimates from full auction replay."""

    revenue: McEstimate
    base_revenue: McEstimate
    priority_revenue: McEstimate
    submitted_txs: McEstimate
    per_agent_payoff: McEstimate
    trials: int
    seed: int


OracleReport = ReplayReport


class _Acc:
    """Streaming mean/variance accumulator (sum and sum of squares)."""

    __slots__ = ("s", "s2", "n")

    def __init__(self) -> None:
        self.s = 0.0
        self.s2 = 0.0
        self.n = 0

    def add(self, x: np.ndarray) -> None:
        self.s += float(x.sum())
        self.s2 += float((x * x).sum())
        self.n += x.size

    def estimate(self, seed: int) -> McEstimate:
        mean = self.s / self.n
        var = max(self.s2 / self.n - mean * mean, 0.0)
        se = math.sqrt(var / self.n)
        return McEstimate(mean=mean, std_error=se, trials=self.n, seed=seed)


def monte_carlo_replay(
    params: AuctionParams, eq: Equilibrium, trials: int, seed: int
) -> ReplayReport:
    """Replay independent auctions under the symmetric strategy.

    Each agent independently abstains with probability p* or draws a bid from
    F*. The highest bid wins (ties, a probability-zero event, are broken at
    random); the sequencer collects g + b_w from the winner, r1 g + r2 b_j
    from every losing participant, and the flat entry charge from every
    participant when the equilibrium carries one. Per-agent payoff is tracked
    for agent 0; by symmetry its mean estimates every agent's payoff.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    p = params
    n = p.num_agents
    rg = p.revert_rate_base * p.base_fee
    r2 = p.revert_rate_priority
    c = eq.entry_cost
    p_star = eq.abstain_prob

    acc = {k: _Acc() for k in ("rev", "base", "prio", "sub", "pay")}
    n_chunks = (trials + _CHUNK - 1) // _CHUNK
    for i, rng in enumerate(_chunk_rngs(seed, n_chunks)):
        m = min(_CHUNK, trials - i * _CHUNK)
        part = rng.random((m, n)) >= p_star
        bids = eq._quantile_arr(rng.random((m, n)))
        masked = np.where(part, bids, -1.0)
        k = part.sum(axis=1)
        any_part = k > 0
        b_max = masked.max(axis=1)
        sum_bids = np.where(part, bids, 0.0).sum(axis=1)

        winner = np.argmax(masked, axis=1)
        ties = (masked == b_max[:, None]).sum(axis=1)
        for row in np.nonzero(any_part & (ties > 1))[0]:
            idxs = np.nonzero(masked[row] == b_max[row])[0]
            winner[row] = idxs[rng.integers(len(idxs))]

        base = np.where(any_part, p.base_fee + (k - 1) * rg, 0.0)
        prio = np.where(any_part, b_max + r2 * (sum_bids - b_max), 0.0)
        rev = base + prio + c * k

        b0 = bids[:, 0]
        part0 = part[:, 0]
        win0 = part0 & (winner == 0)
        payoff0 = np.where(
            part0,
            np.where(win0, p.breakeven_bid - b0, -(rg + r2 * b0)) - c,
            0.0,
        )

        acc["rev"].add(rev)
        acc["base"].add(base)
        acc["prio"].add(prio)
        acc["sub"].add(k.astype(float))
        acc["pay"].add(payoff0)

    return ReplayReport(
        revenue=acc["rev"].estimate(seed),
        base_revenue=acc["base"].estimate(seed),
        priority_revenue=acc["prio"].estimate(seed),
        submitted_txs=acc["sub"].estimate(seed),
        per_agent_payoff=acc["pay"].estimate(seed),
        trials=trials,
        seed=seed,
    )


def best_response_scan(
    params: AuctionParams,
    strategy: Union[Equilibrium, MixedStrategy],
    grid_points: int = 1000,
    entry_cost: Optional[float] = None,
) -> float:
    """Maximum deviation payoff against N-1 opponents playing `strategy`,
    over a uniform bid grid on [0, V - g] plus the abstain action.

    For an equilibrium this maximum must not exceed ~1e-9; any strategy whose
    abstention probability is off shows a strictly positive value here.
    """
    if grid_points < 100:
        raise ValueError(f"grid_points must be >= 100, got {grid_points}")
    if isinstance(strategy, Equilibrium):
        if entry_cost is None:
            entry_cost = strategy.entry_cost
        strategy = strategy.strategy
    elif entry_cost is None:
        entry_cost = 0.0
    grid = np.linspace(0.0, params.breakeven_bid, grid_points)
    best = 0.0  # abstaining is always available and pays exactly zero
    for b in grid:
        best = max(best, expected_payoff_vs_symmetric(params, strategy, float(b), entry_cost))
    return best


@dataclass(frozen=True)
class EquilibriumCertificate:
    max_payoff: float
    min_support_payoff: float
    max_overbid_payoff: float
    passed: bool


def certify_equilibrium(
    params: AuctionParams,
    eq: Equilibrium,
    grid_points: int = 1000,
    tol: float = 1e-9,
) -> EquilibriumCertificate:
    """Indifference certificate, two-sided: every supported bid earns within
    tol of the zero abstention payoff (so no deviation gains, and no supported
    action loses), and probes above the breakeven bid earn strictly negative
    payoffs. Either direction of a mis-set abstention probability fails it:
    too much abstention makes low bids strictly profitable, too little makes
    every supported bid strictly worse than abstaining."""
    max_payoff = best_response_scan(params, eq, grid_points)
    support = np.linspace(0.0, eq.support_max, grid_points)
    strategy = eq.strategy
    min_support = min(
        expected_payoff_vs_symmetric(params, strategy, float(b), eq.entry_cost)
        for b in support
    )
    probes = [params.breakeven_bid * (1.0 + eps) for eps in (1e-6, 1e-3, 0.1, 1.0)]
    overbid = max(
        expected_payoff_vs_symmetric(params, strategy, b, eq.entry_cost) for b in probes
    )
    return EquilibriumCertificate(
        max_payoff=max_payoff,
        min_support_payoff=min_support,
        max_overbid_payoff=overbid,
        passed=(max_payoff <= tol and min_support >= -tol and overbid < 0.0),
    )


@dataclass(frozen=True)
class PureDeviation:
    agent: int
    action: Action
    original_payoff: float
    new_payoff: float

    @property
    def gain(self) -> float:
        return self.new_payoff - self.original_payoff


def _deviation(
    params: AuctionParams, profile: PureProfile, agent: int, action: Action
) -> PureDeviation:
    original = pure_payoff(params, profile, agent)
    actions = list(profile.actions)
    actions[agent] = action
    new = pure_payoff(params, PureProfile(tuple(actions)), agent)
    dev = PureDeviation(agent=agent, action=action, original_payoff=original, new_payoff=new)
    if not dev.gain > 0.0:
        raise NumericsError(
            f"constructed deviation is not strictly profitable: agent {agent}, "
            f"{action!r}, gain {dev.gain:.3e}"
        )
    return dev


def find_pure_deviation(
    params: AuctionParams, profile: PureProfile, tol: float = 1e-12
) -> Optional[PureDeviation]:
    """A strictly profitable unilateral deviation, or None exactly when losing
    is free (r1 = r2 = 0) and the profile's top two bids equal V - g.

    The construction mirrors the case analysis that rules out pure equilibria
    under any positive losing cost: overbidders abstain, a beatable top bid
    gets overbid below breakeven, a lone breakeven bidder lowers its bid, and
    a breakeven tie abstains (which only breaks even when losing is free).
    """
    b_star = params.breakeven_bid
    zero_rates = params.revert_rate_base == 0.0 and params.revert_rate_priority == 0.0
    n = params.num_agents
    bids = [
        (a.amount, i) for i, a in enumerate(profile.actions) if isinstance(a, Bid)
    ]
    if len(profile.actions) != n:
        raise ValueError(f"profile has {len(profile.actions)} actions, expected {n}")

    if not bids:
        # empty auction: any agent wins for sure at half the breakeven bid
        return _deviation(params, profile, 0, Bid(0.5 * b_star))

    b_max = max(amount for amount, _ in bids)
    top = [i for amount, i in bids if amount == b_max]

    if b_max > b_star + tol:
        # winning loses money; a top bidder walks away
        return _deviation(params, profile, top[0], ABSTAIN)

    if b_max < b_star - tol:
        non_top = [j for j in range(n) if j not in top]
        if non_top:
            # beat the current top at the midpoint toward breakeven
            return _deviation(params, profile, non_top[0], Bid(0.5 * (b_max + b_star)))
        # everyone ties at the top: one of them escapes the tie cheaply
        return _deviation(params, profile, top[0], Bid(b_max + 0.25 * (b_star - b_max)))

    # top bid at breakeven
    if len(top) >= 2:
        if zero_rates:
            return None  # exactly the pure equilibria
        return _deviation(params, profile, top[0], ABSTAIN)
    runner_up = max(
        (amount for amount, i in bids if i != top[0]), default=None
    )
    if runner_up is None:
        new_bid = 0.0
    else:
        new_bid = 0.5 * (runner_up + b_star)
    # the lone breakeven bidder still wins, now at a profit
    return _deviation(params, profile, top[0], Bid(new_bid))


@dataclass(frozen=True)
class SignCheck:
    quantity: str
    parameter: str
    derivative: float
    expected: str  # "+", "-", or "0"
    passed: bool


def _sign_ok(derivative: float, expected: str) -> bool:
    if expected == "+":
        return derivative > 0.0
    if expected == "-":
        return derivative < 0.0
    return derivative == 0.0


def _p_star(params: AuctionParams) -> float:
    return solve_equilibrium(params).abstain_prob


def _expected_bid(params: AuctionParams) -> float:
    return solve_equilibrium(params).expected_bid()


def comparative_statics_check(base: AuctionParams, step: float = 1e-5) -> list[SignCheck]:
    """Finite-difference signs of p* and E[B*] in every parameter.

    Expected directions: p* rises with N, g, r1, falls with V, and ignores r2
    identically; the expected bid rises with V and falls with N, r1, r2.

    Caveat established by these very checks: the r1 direction of the bid
    distribution is not global. Raising r1 both shifts the indifference ratio
    up (lower bids) and raises abstention (which pushes the remaining bidders
    toward higher bids); at high markups V - g >> g the abstention channel
    dominates and E[B*] rises with r1. The check reports the true sign either
    way.
    """
    if not 0.0 < step <= 1e-3:
        raise ValueError(f"step must lie in (0, 1e-3], got {step}")

    def central(fn, field: str) -> float:
        hi = fn(replace(base, **{field: getattr(base, field) + step}))
        lo = fn(replace(base, **{field: getattr(base, field) - step}))
        return (hi - lo) / (2.0 * step)

    def unit_n(fn) -> float:
        return fn(replace(base, num_agents=base.num_agents + 1)) - fn(base)

    expectations = [
        ("abstain_prob", "num_agents", unit_n(_p_star), "+"),
        ("abstain_prob", "base_fee", central(_p_star, "base_fee"), "+"),
        ("abstain_prob", "revert_rate_base", central(_p_star, "revert_rate_base"), "+"),
        ("abstain_prob", "value", central(_p_star, "value"), "-"),
        ("abstain_prob", "revert_rate_priority", central(_p_star, "revert_rate_priority"), "0"),
        ("expected_bid", "value", central(_expected_bid, "value"), "+"),
        ("expected_bid", "num_agents", unit_n(_expected_bid), "-"),
        ("expected_bid", "revert_rate_base", central(_expected_bid, "revert_rate_base"), "-"),
        ("expected_bid", "revert_rate_priority", central(_expected_bid, "revert_rate_priority"), "-"),
    ]
    return [
        SignCheck(quantity=q, parameter=par, derivative=d, expected=e, passed=_sign_ok(d, e))
        for q, par, d, e in expectations
    ]


def cdf_sensitivity_check(
    base: AuctionParams, step: float = 1e-5, grid_points: int = 9
) -> list[SignCheck]:
    """Pointwise finite-difference signs of F*(b) on an interior bid grid:
    F* rises pointwise with N, r1, r2 and falls with V.

    The r1 direction carries the same caveat as comparative_statics_check:
    away from low markups the abstention response flips the pointwise sign
    on part of the support."""
    eq = solve_equilibrium(base)
    grid = np.linspace(0.1, 0.9, grid_points) * eq.support_max

    def delta(field: str, h) -> np.ndarray:
        hi = solve_equilibrium(replace(base, **{field: getattr(base, field) + h}))
        lo = solve_equilibrium(replace(base, **{field: getattr(base, field) - h}))
        return hi._cdf_arr(grid) - lo._cdf_arr(grid)

    def delta_n() -> np.ndarray:
        hi = solve_equilibrium(replace(base, num_agents=base.num_agents + 1))
        return hi._cdf_arr(grid) - eq._cdf_arr(grid)

    cases = [
        ("num_agents", delta_n(), "+"),
        ("value", delta("value", step), "-"),
        ("revert_rate_base", delta("revert_rate_base", step), "+"),
        ("revert_rate_priority", delta("revert_rate_priority", step), "+"),
    ]
    out = []
    for par, d, expected in cases:
        extreme = float(d.min() if expected == "+" else d.max())
        out.append(
            SignCheck(
                quantity="cdf_pointwise",
                parameter=par,
                derivative=extreme,
                expected=expected,
                passed=_sign_ok(extreme, expected),
            )
        )
    return out


def bisection_quantile(eq: Equilibrium, u: float, tol: float = 1e-12) -> float:
    """Invert the CDF numerically; the independent check on the algebraic
    quantile."""
    return bisection_inverse(eq.cdf, u, 0.0, eq.support_max, tol=tol)


def hillman_samet_check(
    value: float, min_outlay: float, num_agents: int, grid_points: int = 1001
) -> float:
    """Cross-check against the classic all-pay auction with a minimum outlay
    and no refunds (Hillman and Samet, 1987).

    That model is the special case r1 = r2 = 1 with base fee g equal to the
    minimum outlay; in terms of the effective bid x = g + b its equilibrium
    CDF is (x/V)^(1/(N-1)) on [g, V]. Returns the maximum absolute deviation
    between our effective-bid CDF and that closed form over the grid.
    """
    if not 0.0 < min_outlay < value:
        raise ValueError("need 0 < min_outlay < value")
    params = AuctionParams(value, min_outlay, 1.0, 1.0, num_agents)
    eq = solve_equilibrium(params)
    p = eq.abstain_prob
    xs = np.linspace(min_outlay, value, grid_points)
    ours = p + (1.0 - p) * eq._cdf_arr(xs - min_outlay)
    reference = (xs / value) ** (1.0 / (num_agents - 1))
    return float(np.abs(ours - reference).max())
