"""Barycentric interpolation from a fixed-total reference table.

Capitals summing to ``N`` are rescaled to the table total ``N_ref``. The
scaled point sits in a cell of the integer lattice; floor/ceiling
combinations of its coordinates give candidate vertices, and those whose
last coordinate is neither the floor nor the ceiling of the scaled last
coordinate are dropped. The remaining vertices span a simplex containing the
point and the estimate is the weighted sum of the tabulated values.

Weights are computed in rational arithmetic, so they come out exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import OrderDistribution, all_orders, as_capitals, parse_order
from .tables import ReferenceTable, lookup_full


@dataclass(frozen=True)
class BarycentricWeights:
    vertices: tuple
    lambdas: tuple
    point: tuple

    def __iter__(self):
        return iter(zip(self.vertices, self.lambdas))

    def reconstruct(self) -> tuple:
        k = len(self.point)
        return tuple(sum(l * v[i] for v, l in self) for i in range(k))


def scaled_point(capitals, N_ref: int) -> tuple:
    cap = as_capitals(capitals).require_live()
    return tuple(Fraction(s * N_ref, cap.N) for s in cap.stacks)


def _solve(rows: list, rhs: list) -> list | None:
    """Exact Gaussian elimination; ``None`` if singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def barycentric(point, vertices) -> tuple | None:
    """Weights expressing ``point`` as an affine combination of ``vertices``.

    Only the first ``k - 1`` coordinates are used (the last is implied by
    the fixed total). With fewer vertices than ``k`` the system is solved
    through its normal equations and accepted only if it reproduces the
    point exactly. Returns ``None`` for a degenerate vertex set.
    """
    m = len(vertices)
    dims = len(point) - 1
    base = vertices[-1]
    if m == 1:
        return (Fraction(1),) if tuple(base) == tuple(point) else None
    cols = [[Fraction(v[d] - base[d]) for d in range(dims)] for v in vertices[:-1]]
    target = [Fraction(point[d]) - base[d] for d in range(dims)]
    if m - 1 == dims:
        rows = [[cols[j][d] for j in range(m - 1)] for d in range(dims)]
        sol = _solve(rows, target)
    else:
        gram = [[sum(ci[d] * cj[d] for d in range(dims)) for cj in cols] for ci in cols]
        proj = [sum(ci[d] * target[d] for d in range(dims)) for ci in cols]
        sol = _solve(gram, proj)
        if sol is not None:
            recon = [sum(sol[j] * cols[j][d] for j in range(m - 1)) for d in range(dims)]
            if recon != target:
                return None
    if sol is None:
        return None
    return tuple(sol) + (1 - sum(sol),)


def _candidates(point, N_ref: int) -> list:
    """Floor/ceiling vertices in binary-counter order, filtered on the last coordinate."""
    k = len(point)
    last = point[-1]
    keep = {math.floor(last), math.ceil(last)}
    found = []
    for bits in itertools.product((0, 1), repeat=k - 1):
        head = tuple(math.ceil(x) if b else math.floor(x) for x, b in zip(point[:-1], bits))
        v = head + (N_ref - sum(head),)
        if v[-1] in keep:
            found.append(((sum(bits), bits), v))
    # v000, v001, v010, v100, v011, v101, v110, v111
    found.sort(key=lambda t: t[0])
    out = []
    for _, v in found:
        if v not in out:
            out.append(v)
    return out


def _distance(v, point) -> float:
    return math.sqrt(sum(float(a - b) ** 2 for a, b in zip(v, point)))


def select_simplex(capitals, N_ref: int) -> BarycentricWeights:
    """Vertices and weights for interpolating at ``capitals`` from an ``N_ref`` grid.

    Lower-dimensional simplices are tried first, so grid points, edges and
    faces collapse to 1, 2 or 3 vertices. Among simplices of the same size,
    vertex sets are tried in increasing total distance from the scaled point
    and the first with all weights nonnegative is used.
    """
    point = scaled_point(capitals, N_ref)
    cands = _candidates(point, N_ref)
    for size in range(1, len(point) + 1):
        subsets = list(itertools.combinations(cands, size))
        subsets.sort(key=lambda vs: sum(_distance(v, point) for v in vs))
        for vs in subsets:
            lam = barycentric(point, vs)
            if lam is not None and all(l >= 0 for l in lam):
                keep = [(v, l) for v, l in zip(vs, lam) if l != 0]
                return BarycentricWeights(tuple(v for v, _ in keep),
                                          tuple(l for _, l in keep), point)
    raise RuntimeError(f"no simplex contains {point}; candidates {cands}")


def select_simplex_3(capitals, N_ref: int = 300) -> BarycentricWeights:
    if as_capitals(capitals).k != 3:
        raise ValueError("select_simplex_3 needs three stacks")
    return select_simplex(capitals, N_ref)


def select_simplex_4(capitals, N_ref: int = 100) -> BarycentricWeights:
    if as_capitals(capitals).k != 4:
        raise ValueError("select_simplex_4 needs four stacks")
    return select_simplex(capitals, N_ref)


def vertex_probability(table: ReferenceTable, stacks, sigma) -> float:
    """Table value at a vertex; vertices on a face of the simplex are solved directly."""
    stacks = tuple(int(s) for s in stacks)
    order = parse_order(sigma, len(stacks))
    zeros = [p for p in range(1, len(stacks) + 1) if stacks[p - 1] == 0]
    if not zeros:
        return lookup_full(table, stacks, order)
    if len(zeros) > 1:
        raise ValueError(f"vertex {stacks} has several empty stacks; the capitals are too "
                         f"lopsided for an N={table.N} table")
    busted = zeros[0]
    if order[0] != busted:
        return 0.0
    players = [p for p in range(1, len(stacks) + 1) if p != busted]
    survivors = [stacks[p - 1] for p in players]
    local = tuple(players.index(p) + 1 for p in order[1:])
    if len(survivors) == 2:
        return survivors[local[-1] - 1] / sum(survivors)
    from .exact import exact_orders_3

    return float(exact_orders_3(survivors, max_N=max(table.N, 250))[local])


def interpolate(table: ReferenceTable, capitals, sigma, weights: BarycentricWeights | None = None) -> float:
    cap = as_capitals(capitals)
    if cap.k != table.k:
        raise ValueError(f"{cap.k} stacks against a {table.k}-player table")
    w = weights or select_simplex(cap, table.N)
    return float(sum(float(l) * vertex_probability(table, v, sigma) for v, l in w))


def interp_3(table: ReferenceTable, capitals, sigma) -> float:
    return interpolate(table, capitals, sigma)


def interp_4(table: ReferenceTable, capitals, sigma) -> float:
    return interpolate(table, capitals, sigma)


def interp_distribution(table: ReferenceTable, capitals) -> OrderDistribution:
    cap = as_capitals(capitals)
    w = select_simplex(cap, table.N)
    entries = {s: interpolate(table, cap, s, w) for s in all_orders(cap.k)}
    diagnostics = {"vertices": w.vertices, "lambdas": w.lambdas, "N_ref": table.N}
    return OrderDistribution(cap.k, entries, "interp", diagnostics)
