"""Kernel estimates, tail constants, decay exponents and the Brownian limit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_capitals, parse_order


@dataclass(frozen=True)
class KernelQuery:
    """Interior point ``(x1, x2)`` and boundary point ``(y, 0)`` of the 3-player simplex."""
    x1: int
    x2: int
    y: int
    N: int
    d: int = field(default=-1)

    def __post_init__(self):
        if self.x1 < 1 or self.x2 < 1 or self.x1 + self.x2 >= self.N:
            raise ValueError("interior point needs x1, x2 >= 1 and x1 + x2 < N")
        if not 0 < self.y < self.N:
            raise ValueError("boundary coordinate must satisfy 0 < y < N")
        if self.d < 0:
            object.__setattr__(self, "d", graph_distance((self.x1, self.x2), (self.y, 0)))


def graph_distance(p, q) -> int:
    """Lattice distance with steps (+-1, 0), (0, +-1), (1, -1), (-1, 1).

    A diagonal step helps only when the two coordinate changes have opposite signs.
    """
    d1, d2 = q[0] - p[0], q[1] - p[1]
    if d1 * d2 < 0:
        return max(abs(d1), abs(d2))
    return abs(d1) + abs(d2)


def dhs_kernel_estimate(q: KernelQuery) -> float:
    """Order-of-magnitude size of the hitting probability at ``(y, 0)``; constants dropped."""
    x1, x2, y, N, d = q.x1, q.x2, q.y, q.N, q.d
    num = x1 * x2 * (x1 + x2) * (N - (x1 + x2)) * (N - x2) * y ** 2 * (N - y) ** 2
    den = N ** 4 * (x1 + d) ** 2 * (x2 + d) ** 2 * (x1 + x2 + 2 * d) ** 2
    return num / den


def kernel_sum(x1: int, x2: int, N: int) -> float:
    """Estimate summed over the whole face, i.e. the chance that player 2 busts first."""
    return sum(dhs_kernel_estimate(KernelQuery(x1, x2, y, N)) for y in range(1, N))


def tail_constant_three() -> float:
    """Limit of ``N**3 P_{1,1,N-2}(321)``."""
    g = math.gamma(1 / 3) / math.gamma(5 / 6)
    return math.sqrt(math.pi) / (3 * math.sqrt(3)) * g ** 3


def decay_exponent(values) -> tuple:
    """Fit ``p ~ a N**-kappa`` by least squares in log-log; returns ``(kappa, a)``."""
    pts = [(float(n), float(p)) for n, p in values]
    if len(pts) < 2:
        raise ValueError("need at least two (N, p) points")
    if any(n <= 0 or p <= 0 for n, p in pts):
        raise ValueError("N and p must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([p for _, p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(-slope), float(np.exp(intercept))


def richardson(sizes, values, power: float = 4.0) -> float:
    """Extrapolate the last two levels assuming error ``c * size**-power``."""
    if len(values) == 1:
        return float(values[0])
    h1, h2 = float(sizes[-2]) ** power, float(sizes[-1]) ** power
    p1, p2 = values[-2], values[-1]
    return float((h2 * p2 - h1 * p1) / (h2 - h1))


@dataclass(frozen=True)
class BrownianEstimate:
    capitals: tuple
    orders: tuple
    sizes: tuple
    values: tuple
    limit: float

    def rows(self):
        return list(zip(self.sizes, self.values))


def brownian_limit(capitals, sigma, levels, engine: str = "jacobi", **engine_kw) -> BrownianEstimate:
    """Scale the start by each multiplier in ``levels`` and extrapolate to the continuum.

    ``sigma`` is one order or a collection of orders whose probabilities are summed,
    e.g. ``("312", "321")`` for "player 3 busts first".
    """
    from .exact import exact_orders_3
    from .jacobi import jacobi_solve_3

    cap = as_capitals(capitals).require_live()
    if cap.k != 3:
        raise ValueError("the Brownian limit is implemented for three players")
    if isinstance(sigma, (str, int)) or (isinstance(sigma, tuple) and sigma and isinstance(sigma[0], int)):
        orders = (parse_order(sigma, 3),)
    else:
        orders = tuple(parse_order(s, 3) for s in sigma)
    levels = sorted(set(int(n) for n in levels))
    sizes, values = [], []
    for n in levels:
        stacks = tuple(n * c for c in cap)
        N = sum(stacks)
        if engine == "jacobi":
            v = 0.0
            for s in orders:
                v += jacobi_solve_3(N, s, **engine_kw).value(stacks)
        elif engine == "exact":
            dist = exact_orders_3(stacks, **engine_kw).as_floats()
            v = sum(dist[s] for s in orders)
        else:
            raise ValueError(f"unknown engine {engine!r}")
        sizes.append(N)
        values.append(v)
    return BrownianEstimate(tuple(cap), orders, tuple(sizes), tuple(values),
                            richardson(sizes, values))
