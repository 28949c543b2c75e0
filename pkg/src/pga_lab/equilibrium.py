"""Closed-form symmetric equilibrium of the auction.

With any positive losing cost (r1 > 0, r2 > 0, or a flat entry cost c > 0)
no pure-strategy equilibrium exists; the unique symmetric mixed equilibrium
abstains with probability

    p* = ((r1*g + c) / (V - g + r1*g)) ** (1/(N-1))

and, conditional on bidding, draws from the CDF

    F*(b) = (z(b)**(1/(N-1)) - p*) / (1 - p*),
    z(b)  = (r1*g + r2*b + c) / (V - g - b + r1*g + r2*b),

the value of z being pinned by indifference: every supported bid earns exactly
the abstention payoff of zero. F* reaches 1 at b = V - g - c, so the support
is [0, V - g - c]; with c = 0 this is the full [0, V - g]. (For c > 0 the
breakeven-bid endpoint V - g carries z > 1; see boundary_gap.)

With r1 = r2 = 0 and c = 0 losing is free and the game instead has the pure
equilibria characterized by pure_equilibrium: the top two bids both equal the
breakeven bid V - g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CostTooLarge,
    DegenerateNoRevertCost,
    NotApplicable,
    NumericsError,
    OutOfSupport,
)
from .model import ABSTAIN, Action, AuctionParams, Bid, MixedStrategy, PureProfile
from .numerics import adaptive_simpson

_NEG_CLAMP = 1e-12  # residue window treated as float noise, not a formula bug


@dataclass(frozen=True)
class Equilibrium:
    """Symmetric mixed equilibrium for given params and flat entry cost."""

    params: AuctionParams
    entry_cost: float
    abstain_prob: float

    @property
    def breakeven_bid(self) -> float:
        return self.params.breakeven_bid

    @property
    def support_max(self) -> float:
        """Upper end of the bid support: V - g - c, where the CDF hits 1."""
        return self.params.breakeven_bid - self.entry_cost

    @property
    def boundary_gap(self) -> float:
        """Raw CDF value at the breakeven bid V - g, minus one.

        Zero when entry_cost = 0. Positive entry cost shrinks the support to
        [0, V - g - c], so the raw formula exceeds 1 on (V - g - c, V - g];
        the gap is reported rather than renormalized away.
        """
        b = self.params.breakeven_bid
        rg = self.params.revert_rate_base * self.params.base_fee
        den = rg + self.params.revert_rate_priority * b
        if den == 0.0:
            return math.inf if self.entry_cost > 0.0 else 0.0
        z = (den + self.entry_cost) / den
        raw = (z ** (1.0 / (self.params.num_agents - 1)) - self.abstain_prob) / (
            1.0 - self.abstain_prob
        )
        return raw - 1.0

    def _ratio(self, b):
        """Indifference ratio z(b); accepts scalars or numpy arrays."""
        p = self.params
        rg = p.revert_rate_base * p.base_fee
        num = rg + p.revert_rate_priority * b + self.entry_cost
        den = p.breakeven_bid - b + rg + p.revert_rate_priority * b
        return num / den

    def _cdf_arr(self, b: np.ndarray) -> np.ndarray:
        p = self.abstain_prob
        inv = 1.0 / (self.params.num_agents - 1)
        b = np.minimum(b, self.support_max)
        raw = (self._ratio(b) ** inv - p) / (1.0 - p)
        bad = raw < -_NEG_CLAMP
        if np.any(bad):
            raise NumericsError(
                f"CDF residue below clamp window: min raw value {raw[bad].min():.3e}"
            )
        return np.clip(raw, 0.0, 1.0)

    def cdf(self, b: float) -> float:
        """F*(b) for b in [0, V - g]. Exactly 1 on [V - g - c, V - g]."""
        if not math.isfinite(b) or b < -_NEG_CLAMP or b > self.breakeven_bid + _NEG_CLAMP:
            raise OutOfSupport(f"bid {b} outside [0, {self.breakeven_bid}]")
        b = min(max(b, 0.0), self.breakeven_bid)
        if b >= self.support_max:
            return 1.0
        p = self.abstain_prob
        raw = (self._ratio(b) ** (1.0 / (self.params.num_agents - 1)) - p) / (1.0 - p)
        if raw < 0.0:
            if raw < -_NEG_CLAMP:
                raise NumericsError(f"CDF residue below clamp window at b={b}: {raw:.3e}")
            raw = 0.0
        return min(raw, 1.0)

    def _quantile_arr(self, u: np.ndarray) -> np.ndarray:
        p = self.params
        rg = p.revert_rate_base * p.base_fee
        r2 = p.revert_rate_priority
        q = (self.abstain_prob + (1.0 - self.abstain_prob) * u) ** (p.num_agents - 1)
        den = r2 * (1.0 - q) + q
        num = q * (p.breakeven_bid + rg) - rg - self.entry_cost
        with np.errstate(invalid="ignore", divide="ignore"):
            b = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        return np.clip(b, 0.0, self.support_max)

    def quantile(self, u: float) -> float:
        """Exact algebraic inverse of the CDF.

        With q = (p* + (1-p*)u)^(N-1), the supported bid solving F*(b) = u is
        b = (q (V-g+r1 g) - r1 g - c) / (r2 (1-q) + q).
        """
        if not 0.0 <= u <= 1.0:
            raise OutOfSupport(f"quantile argument {u} outside [0, 1]")
        return float(self._quantile_arr(np.asarray(u, dtype=float)))

    def sample_action(self, rng: np.random.Generator) -> Action:
        """Abstain with probability p*, else bid quantile(U), U uniform."""
        if rng.random() < self.abstain_prob:
            return ABSTAIN
        return Bid(self.quantile(rng.random()))

    def sample_bids(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized bid draws conditional on participation."""
        return self._quantile_arr(rng.random(size))

    def expected_bid(self) -> float:
        """E[B*] for B* ~ F*, via the tail integral of 1 - F*."""
        return adaptive_simpson(
            lambda x: 1.0 - self.cdf(x), 0.0, self.support_max, tol=1e-8, max_depth=20
        )

    def expected_max_bid(self, k: int) -> float:
        """E[max of k i.i.d. draws from F*], via the tail integral of 1 - F^k."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return adaptive_simpson(
            lambda x: 1.0 - self.cdf(x) ** k, 0.0, self.support_max, tol=1e-8, max_depth=20
        )

    @property
    def strategy(self) -> MixedStrategy:
        return MixedStrategy(
            abstain_prob=self.abstain_prob,
            cdf=self.cdf,
            quantile=self.quantile,
            support=(0.0, self.support_max),
        )


def solve_equilibrium(
    params: AuctionParams, entry_cost: float = 0.0, strict: bool = False
) -> Equilibrium:
    """Solve for the symmetric mixed equilibrium.

    entry_cost = 0 is the baseline game; entry_cost > 0 charges every
    participant a flat fee (paid win or lose) on top of any revert penalty.
    strict=True raises if the CDF does not reach 1 at the breakeven bid V - g,
    i.e. whenever entry_cost > 0 truncates the support to [0, V - g - c].
    """
    if not (math.isfinite(entry_cost) and entry_cost >= 0.0):
        raise ValueError(f"entry_cost must be finite and non-negative, got {entry_cost}")
    if entry_cost >= params.breakeven_bid:
        raise CostTooLarge(
            f"entry_cost {entry_cost} must stay below breakeven bid {params.breakeven_bid}"
        )
    if (
        params.revert_rate_base == 0.0
        and params.revert_rate_priority == 0.0
        and entry_cost == 0.0
    ):
        raise DegenerateNoRevertCost(
            "losing is free (r1 = r2 = 0, no entry cost); use pure_equilibrium"
        )
    rg = params.revert_rate_base * params.base_fee
    ratio = (rg + entry_cost) / (params.breakeven_bid + rg)
    p_star = ratio ** (1.0 / (params.num_agents - 1))
    eq = Equilibrium(params=params, entry_cost=float(entry_cost), abstain_prob=p_star)
    if strict and not eq.boundary_gap <= _NEG_CLAMP:
        raise NumericsError(
            f"CDF at breakeven bid exceeds 1 by {eq.boundary_gap:.3e}; "
            f"support truncates at {eq.support_max}"
        )
    return eq


@dataclass(frozen=True)
class PureEquilibrium:
    """Characterization of the pure equilibria when losing costs nothing:
    the two highest bids both equal top_bid = V - g - c, everything else
    arbitrary (necessarily at or below top_bid once ordered)."""

    params: AuctionParams
    entry_cost: float
    top_bid: float

    def is_equilibrium(self, profile: PureProfile, tol: float = 1e-12) -> bool:
        bids = sorted(
            (a.amount for a in profile.actions if isinstance(a, Bid)), reverse=True
        )
        if len(bids) < 2:
            return False
        return abs(bids[0] - self.top_bid) <= tol and abs(bids[1] - self.top_bid) <= tol


def pure_equilibrium(params: AuctionParams, entry_cost: float = 0.0) -> PureEquilibrium:
    """Pure-strategy equilibrium description, valid only when r1 = r2 = 0.

    Any nonzero revert rate destroys all pure equilibria (some agent always
    has a strictly profitable unilateral deviation).
    """
    if params.revert_rate_base != 0.0 or params.revert_rate_priority != 0.0:
        raise NotApplicable(
            "no pure-strategy equilibrium exists when a revert rate is nonzero"
        )
    if not (math.isfinite(entry_cost) and entry_cost >= 0.0):
        raise ValueError(f"entry_cost must be finite and non-negative, got {entry_cost}")
    if entry_cost >= params.breakeven_bid:
        raise CostTooLarge(
            f"entry_cost {entry_cost} must stay below breakeven bid {params.breakeven_bid}"
        )
    return PureEquilibrium(
        params=params,
        entry_cost=float(entry_cost),
        top_bid=params.breakeven_bid - entry_cost,
    )
