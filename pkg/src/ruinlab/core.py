"""Domain types and closed-form quantities shared by every engine.

Elimination orders are tuples of 1-based player labels: position ``j`` holds
the ``j``-th player to go broke and the last entry is the winner, so
``(1, 3, 2)`` means player 1 busts first, then player 3, and player 2 takes
every chip.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Number = Union[float, Fraction]
Order = tuple

ENGINES = ("exact", "jacobi", "icm", "interp", "mc", "regression")


class DimensionError(ValueError):
    """Raised when capitals, orders, or schedules disagree on player count."""


@dataclass(frozen=True)
class CapitalVector:
    stacks: tuple

    def __init__(self, stacks: Iterable[int]):
        raw = list(stacks)
        if any(int(s) != s for s in raw):
            raise ValueError(f"stacks must be integers, got {raw!r}")
        values = tuple(int(s) for s in raw)
        if not 2 <= len(values) <= 4:
            raise DimensionError(f"need 2 to 4 players, got {len(values)}")
        if any(s < 0 for s in values):
            raise ValueError(f"stacks must be nonnegative, got {values}")
        object.__setattr__(self, "stacks", values)

    @property
    def k(self) -> int:
        return len(self.stacks)

    @property
    def N(self) -> int:
        return sum(self.stacks)

    @property
    def is_live(self) -> bool:
        return all(s >= 1 for s in self.stacks)

    def require_live(self) -> "CapitalVector":
        if not self.is_live:
            raise ValueError(f"every stack must be >= 1, got {self.stacks}")
        return self

    def __iter__(self):
        return iter(self.stacks)

    def __len__(self):
        return len(self.stacks)

    def __getitem__(self, i):
        return self.stacks[i]


def as_capitals(capitals) -> CapitalVector:
    return capitals if isinstance(capitals, CapitalVector) else CapitalVector(capitals)


def parse_order(sigma, k: int | None = None) -> Order:
    """Accept ``"321"``, ``321``, or ``(3, 2, 1)`` and return a validated tuple."""
    if isinstance(sigma, int):
        sigma = str(sigma)
    if isinstance(sigma, str):
        sigma = tuple(int(ch) for ch in sigma.strip())
    order = tuple(int(p) for p in sigma)
    n = len(order)
    if k is not None and n != k:
        raise DimensionError(f"order {order} has {n} entries, expected {k}")
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"{order} is not a permutation of 1..{n}")
    return order


def order_str(sigma: Order) -> str:
    return "".join(str(p) for p in sigma)


def all_orders(k: int) -> list:
    """Every elimination order of ``k`` players, in lexicographic order."""
    return list(itertools.permutations(range(1, k + 1)))


def canonicalize(capitals, sigma) -> tuple:
    """Permute capitals so that the identity order reads off ``P(sigma)``.

    Returns ``(permuted capitals, identity order)``.
    """
    cap = as_capitals(capitals)
    order = parse_order(sigma, cap.k)
    permuted = CapitalVector(cap[p - 1] for p in order)
    return permuted, tuple(range(1, cap.k + 1))


def plackett_luce(weights, pi, exact: bool = False) -> Number:
    """Probability that sequential weight-proportional draws come out as ``pi``."""
    w = as_capitals(weights).require_live()
    pi = parse_order(pi, w.k)
    remaining = Fraction(w.N) if exact else float(w.N)
    prob = Fraction(1) if exact else 1.0
    for p in pi:
        prob *= w[p - 1] / remaining
        remaining -= w[p - 1]
    return prob


def icm_probability(capitals, sigma, exact: bool = False) -> Number:
    """Independent chip model: winner drawn first in proportion to chips, and so on.

    This is Plackett-Luce applied to the finishing order read from first place
    down, i.e. the reversed elimination order.
    """
    order = parse_order(sigma, as_capitals(capitals).k)
    return plackett_luce(capitals, order[::-1], exact=exact)


def winner_probability(capitals, player: int) -> float:
    cap = as_capitals(capitals)
    if not 1 <= player <= cap.k:
        raise IndexError(f"player {player} out of range 1..{cap.k}")
    return cap[player - 1] / cap.N


@dataclass(frozen=True)
class ExpectedTimes:
    t1: float
    t2: float


def expected_times(capitals) -> ExpectedTimes:
    """Mean rounds until the first and the second bust, three players."""
    cap = as_capitals(capitals)
    if cap.k != 3:
        raise DimensionError("expected_times is defined for three players only")
    a, b, c = cap.require_live().stacks
    return ExpectedTimes(t1=3 * a * b * c / cap.N, t2=float(a * b + a * c + b * c))


@dataclass(frozen=True)
class PayoutSchedule:
    """Prize money by finishing place, first place first."""

    payouts: tuple

    def __init__(self, payouts: Iterable):
        values = tuple(payouts)
        if any(p < 0 for p in values):
            raise ValueError("payouts must be nonnegative")
        object.__setattr__(self, "payouts", values)

    def __len__(self):
        return len(self.payouts)


@dataclass(frozen=True)
class OrderDistribution:
    """Probability of every elimination order, tagged with the engine that produced it."""

    k: int
    entries: Mapping
    provenance: str
    diagnostics: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.provenance not in ENGINES:
            raise ValueError(f"unknown engine tag {self.provenance!r}")
        expected = set(all_orders(self.k))
        if set(self.entries) != expected:
            raise DimensionError("entries must cover every order of the live players")
        if any(p < -1e-12 for p in self.entries.values()):
            raise ValueError("negative probability in distribution")

    def __getitem__(self, sigma) -> Number:
        return self.entries[parse_order(sigma, self.k)]

    def total(self) -> Number:
        return sum(self.entries.values())

    def as_floats(self) -> dict:
        return {s: float(p) for s, p in self.entries.items()}

    def winner_marginal(self, player: int) -> Number:
        return sum(p for s, p in self.entries.items() if s[-1] == player)

    def identity_residuals(self, capitals) -> list:
        """Deviations from P(123)+P(213)=C/N, P(132)+P(312)=B/N, P(231)+P(321)=A/N."""
        cap = as_capitals(capitals)
        if self.k != 3:
            raise DimensionError("identities are stated for three players")
        a, b, c = cap.stacks
        n = cap.N
        e = self.entries
        return [
            float(e[(1, 2, 3)] + e[(2, 1, 3)] - Fraction(c, n)),
            float(e[(1, 3, 2)] + e[(3, 1, 2)] - Fraction(b, n)),
            float(e[(2, 3, 1)] + e[(3, 2, 1)] - Fraction(a, n)),
        ]


def icm_distribution(capitals, exact: bool = False) -> OrderDistribution:
    cap = as_capitals(capitals).require_live()
    entries = {s: icm_probability(cap, s, exact=exact) for s in all_orders(cap.k)}
    return OrderDistribution(cap.k, entries, "icm")


def complete_by_identities(partial: Mapping, capitals, provenance: str = "regression",
                           tol: float = 1e-9) -> OrderDistribution:
    """Fill in 123, 132, 231 from 213, 312, 321 using the optional-stopping identities."""
    cap = as_capitals(capitals)
    if cap.k != 3:
        raise DimensionError("identity completion needs three players")
    given = {parse_order(s, 3): p for s, p in partial.items()}
    missing = {(2, 1, 3), (3, 1, 2), (3, 2, 1)} - set(given)
    if missing:
        raise ValueError(f"partial distribution lacks {sorted(missing)}")
    a, b, c = cap.stacks
    n = cap.N
    exact = all(isinstance(p, Fraction) for p in given.values())
    share = (lambda x: Fraction(x, n)) if exact else (lambda x: x / n)
    entries = {
        (2, 1, 3): given[(2, 1, 3)],
        (3, 1, 2): given[(3, 1, 2)],
        (3, 2, 1): given[(3, 2, 1)],
        (1, 2, 3): share(c) - given[(2, 1, 3)],
        (1, 3, 2): share(b) - given[(3, 1, 2)],
        (2, 3, 1): share(a) - given[(3, 2, 1)],
    }
    worst = min(entries.values())
    if worst < -tol:
        raise ValueError(f"inconsistent inputs: completed probability {float(worst):.3g} < 0")
    return OrderDistribution(3, entries, provenance)


def two_player_win(own: int, other: int) -> float:
    """Fair-coin gambler's ruin: chance the holder of ``own`` takes everything."""
    return own / (own + other)


def compose_after_bust(busted: int, survivor_orders: Mapping, players: Sequence[int]) -> dict:
    """Prefix ``busted`` to orders of the surviving players.

    ``survivor_orders`` is keyed by local orders over ``1..len(players)``;
    ``players`` maps those local labels back to global ones.
    """
    out = {}
    for local, p in survivor_orders.items():
        out[(busted,) + tuple(players[i - 1] for i in local)] = p
    return out
