"""Splitting a prize pool by expected payout under an elimination-order model."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .core import DimensionError, OrderDistribution, PayoutSchedule, as_capitals


def to_cents(amount) -> int:
    return int((Decimal(str(amount)) * 100).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class ChopResult:
    cents: tuple
    engine: str
    probabilities: dict

    @property
    def payouts(self) -> tuple:
        return tuple(Decimal(c) / 100 for c in self.cents)

    def as_floats(self) -> tuple:
        return tuple(c / 100 for c in self.cents)


def place_of(player: int, sigma) -> int:
    """Finishing place (1 = winner) of ``player``; the first one eliminated is last."""
    return len(sigma) - list(sigma).index(player)


def _apportion(expected: np.ndarray, total: int) -> tuple:
    """Round to whole cents while keeping the exact total (largest remainder)."""
    base = np.floor(expected).astype(np.int64)
    short = total - int(base.sum())
    order = np.argsort(-(expected - base), kind="stable")
    for i in order[:short]:
        base[i] += 1
    return tuple(int(c) for c in base)


def chop(capitals, schedule, probs: OrderDistribution) -> ChopResult:
    cap = as_capitals(capitals)
    if not isinstance(schedule, PayoutSchedule):
        schedule = PayoutSchedule(schedule)
    k = cap.k
    if len(schedule) != k or probs.k != k:
        raise DimensionError(f"{k} players need a {k}-place schedule and distribution")
    p = probs.as_floats()
    if abs(sum(p.values()) - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {sum(p.values())!r}, not 1")
    prizes = [to_cents(x) for x in schedule.payouts]
    expected = np.zeros(k)
    for sigma, prob in p.items():
        for player in sigma:
            expected[player - 1] += prizes[place_of(player, sigma) - 1] * prob
    if expected.sum() > 0:
        expected *= sum(prizes) / expected.sum()  # absorb rounding in the probabilities
    return ChopResult(_apportion(expected, sum(prizes)), probs.provenance, dict(p))


def chip_proportional(capitals, schedule) -> tuple:
    """Naive pool split by chip share; a comparison figure, not a model."""
    cap = as_capitals(capitals)
    pool = sum(PayoutSchedule(schedule).payouts if not isinstance(schedule, PayoutSchedule)
               else schedule.payouts)
    return tuple(pool * c / cap.N for c in cap)
