"""Core auction model: parameters, actions, strategies, and exact payoffs.

The game: N agents compete for a single opportunity of common value V in a
block whose base fee is g. Each agent either abstains or submits a bid b >= 0
(a priority fee). The highest participating bid wins, ties broken uniformly at
random; the winner extracts V and pays g + b. Every losing participant pays a
revert penalty r1*g + r2*b on the base and priority components of its fee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .errors import (
    IndexOutOfRange,
    NonPositiveFee,
    RateOutOfRange,
    TooFewAgents,
    UnknownPreset,
    ValueNotAboveBaseFee,
)


@dataclass(frozen=True)
class AuctionParams:
    """One auction instance: (V, g, r1, r2, N).

    value: common value V of the opportunity.
    base_fee: flat fee g every included transaction pays.
    revert_rate_base: fraction r1 of g paid by a losing participant.
    revert_rate_priority: fraction r2 of the bid paid by a losing participant.
    num_agents: number of competing agents, N >= 2.
    """

    value: float
    base_fee: float
    revert_rate_base: float
    revert_rate_priority: float
    num_agents: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.base_fee) and self.base_fee > 0.0):
            raise NonPositiveFee(f"base_fee must be positive, got {self.base_fee}")
        if not (math.isfinite(self.value) and self.value > self.base_fee):
            raise ValueNotAboveBaseFee(
                f"value must exceed base_fee, got value={self.value}, base_fee={self.base_fee}"
            )
        for name in ("revert_rate_base", "revert_rate_priority"):
            r = getattr(self, name)
            if not (math.isfinite(r) and 0.0 <= r <= 1.0):
                raise RateOutOfRange(f"{name} must lie in [0, 1], got {r}")
        if int(self.num_agents) != self.num_agents or self.num_agents < 2:
            raise TooFewAgents(f"num_agents must be an integer >= 2, got {self.num_agents}")

    @property
    def breakeven_bid(self) -> float:
        """V - g: the largest bid with non-negative payoff on a win."""
        return self.value - self.base_fee


def validate_params(
    value: float,
    base_fee: float,
    revert_rate_base: float,
    revert_rate_priority: float,
    num_agents: int,
) -> AuctionParams:
    """Construct validated AuctionParams from raw values."""
    return AuctionParams(value, base_fee, revert_rate_base, revert_rate_priority, int(num_agents))


@dataclass(frozen=True)
class Abstain:
    """The no-bid action."""


@dataclass(frozen=True)
class Bid:
    amount: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.amount) and self.amount >= 0.0):
            raise ValueError(f"bid amount must be finite and non-negative, got {self.amount}")


Action = Union[Abstain, Bid]

ABSTAIN = Abstain()


@dataclass(frozen=True)
class PureProfile:
    """One action per agent."""

    actions: tuple[Action, ...]

    @staticmethod
    def of(actions: Sequence[Union[Action, float, None]]) -> "PureProfile":
        """Build a profile from Actions, bare bid amounts, or None (abstain)."""
        converted: list[Action] = []
        for a in actions:
            if a is None:
                converted.append(ABSTAIN)
            elif isinstance(a, (Abstain, Bid)):
                converted.append(a)
            else:
                converted.append(Bid(float(a)))
        return PureProfile(tuple(converted))


@dataclass(frozen=True)
class MixedStrategy:
    """Symmetric randomized strategy: abstain with probability abstain_prob,
    otherwise draw the bid from the distribution described by cdf/quantile.

    cdf is defined on [support[0], support[1]] and quantile on [0, 1]; the two
    are inverse to each other on the support.
    """

    abstain_prob: float
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]
    support: tuple[float, float]

    def __post_init__(self) -> None:
        if not 0.0 <= self.abstain_prob <= 1.0:
            raise RateOutOfRange(f"abstain_prob must lie in [0, 1], got {self.abstain_prob}")

    def win_weight(self, bid: float) -> float:
        """p + (1 - p) F(bid), extended by 1 above the support."""
        if bid >= self.support[1]:
            return 1.0
        p = self.abstain_prob
        return p + (1.0 - p) * self.cdf(bid)


def pure_payoff(params: AuctionParams, profile: PureProfile, agent: int) -> float:
    """Exact expected payoff of one agent under a pure profile.

    Abstaining pays exactly 0. A participant wins with probability
    1{b_i = b_max} / (1 + #ties among others) and nets V - g - b_i on a win,
    paying r1*g + r2*b_i otherwise.
    """
    if not 0 <= agent < params.num_agents:
        raise IndexOutOfRange(f"agent {agent} out of range for N={params.num_agents}")
    if len(profile.actions) != params.num_agents:
        raise IndexOutOfRange(
            f"profile has {len(profile.actions)} actions, expected {params.num_agents}"
        )
    action = profile.actions[agent]
    if isinstance(action, Abstain):
        return 0.0
    b = action.amount
    bids = [a.amount for a in profile.actions if isinstance(a, Bid)]
    b_max = max(bids)
    if b < b_max:
        p_win = 0.0
    else:
        ties_among_others = sum(
            1
            for j, a in enumerate(profile.actions)
            if j != agent and isinstance(a, Bid) and a.amount == b
        )
        p_win = 1.0 / (1.0 + ties_among_others)
    win_part = (params.value - params.base_fee - b) * p_win
    lose_part = (params.revert_rate_base * params.base_fee + params.revert_rate_priority * b) * (
        1.0 - p_win
    )
    return win_part - lose_part


def expected_payoff_vs_symmetric(
    params: AuctionParams,
    opponents: MixedStrategy,
    own_bid: float,
    entry_cost: float = 0.0,
) -> float:
    """Expected payoff of bidding own_bid against N-1 opponents all playing
    the given symmetric mixed strategy.

    The win probability is (p + (1-p) F(b))^(N-1); abstaining is worth exactly
    0 and is the caller's alternative. entry_cost is subtracted when bidding
    carries a flat participation charge.
    """
    if not (math.isfinite(own_bid) and own_bid >= 0.0):
        raise ValueError(f"own_bid must be finite and non-negative, got {own_bid}")
    w = opponents.win_weight(own_bid) ** (params.num_agents - 1)
    gain = (params.value - params.base_fee - own_bid) * w
    revert = (
        params.revert_rate_base * params.base_fee
        + params.revert_rate_priority * own_bid
    ) * (1.0 - w)
    return gain - revert - entry_cost


@dataclass(frozen=True)
class SettingPreset:
    """A named (r1, r2) pairing for a fee-handling regime."""

    name: str
    revert_rate_base: float
    revert_rate_priority: float
    note: str


# Regimes whose penalty rates are free parameters take the rate at call time;
# full revert protection pins both rates to zero.
_PRESETS: dict[str, tuple[str, str, str]] = {
    # name: (r1 rule, r2 rule, note)
    "l1-priority-fees": ("r", "r", "L1 block builder, bids paid via priority fees"),
    "l1-coinbase-transfer": ("r", "0", "L1 block builder, bids paid via coinbase transfer"),
    "l2-priority-ordering": ("r", "r", "L2 sequencer with priority ordering"),
    "l2-mev-taxes": ("r", "0", "L2 priority ordering for apps using MEV taxes"),
    "l1-revert-protection": ("0", "0", "L1 block builder with revert protection"),
    "l2-revert-protection": ("0", "0", "L2 sequencer with revert protection"),
    "l2-revert-protection-mev-taxes": ("0", "0", "L2 revert protection for apps using MEV taxes"),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, rate: float | None = None) -> SettingPreset:
    """Look up a named fee-handling regime.

    Regimes with a free penalty rate require an explicit rate in (0, 1];
    no default is invented for them.
    """
    try:
        r1_rule, r2_rule, note = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(_PRESETS)}") from None
    needs_rate = "r" in (r1_rule, r2_rule)
    if needs_rate:
        if rate is None:
            raise RateOutOfRange(f"preset {name!r} requires an explicit rate in (0, 1]")
        if not (math.isfinite(rate) and 0.0 < rate <= 1.0):
            raise RateOutOfRange(f"preset rate must lie in (0, 1], got {rate}")
    elif rate is not None:
        raise RateOutOfRange(f"preset {name!r} pins both rates to 0; rate argument not allowed")
    r1 = rate if r1_rule == "r" else 0.0
    r2 = rate if r2_rule == "r" else 0.0
    return SettingPreset(name, float(r1), float(r2), note)
