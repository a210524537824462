"""Exact elimination-order probabilities from the absorbing-chain linear system.

Transient states are the interior compositions (every stack >= 1). From the
interior the chain can only leave through a state with exactly one empty
stack, so the first-exit distribution (the Poisson kernel) lives on those
"face" states. The kernel row of a start ``x`` is ``z' S`` where
``(I - Q) z = e_x``; ``I - Q`` is symmetric because every move is reversible
with the same probability, so no transpose solve is needed.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import (
    CapitalVector,
    DimensionError,
    OrderDistribution,
    all_orders,
    as_capitals,
    compose_after_bust,
)

DEFAULT_CAP_3 = 250
DEFAULT_CAP_4 = 60
RATIONAL_CAP = 30


class CapExceeded(RuntimeError):
    pass


def _pair_moves(k: int) -> np.ndarray:
    """Unit transfers between each pair of players, both directions."""
    moves = []
    for i, j in itertools.combinations(range(k), 2):
        for d in (1, -1):
            m = np.zeros(k, dtype=np.int64)
            m[i], m[j] = d, -d
            moves.append(m)
    return np.array(moves)


def _compositions(N: int, k: int, minimum: int) -> np.ndarray:
    """All k-part compositions of N with parts >= minimum, lexicographic."""
    if k == 1:
        return np.array([[N]], dtype=np.int64) if N >= minimum else np.zeros((0, 1), np.int64)
    rows = []
    for first in range(minimum, N - minimum * (k - 1) + 1):
        rest = _compositions(N - first, k - 1, minimum)
        if len(rest):
            rows.append(np.column_stack([np.full(len(rest), first), rest]))
    if not rows:
        return np.zeros((0, k), dtype=np.int64)
    return np.vstack(rows)


def compositions(N: int, k: int) -> np.ndarray:
    """Compositions of N into k positive parts in lexicographic order."""
    return _compositions(N, k, 1)


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Indexed lattice of a k-player game with N chips in play.

    ``interior`` rows are sorted lexicographically; ``boundary`` holds the
    states with exactly one empty stack, grouped by which player is empty
    and lexicographic within a group. ``neighbors[i, m]`` indexes the
    concatenation ``interior ++ boundary``.
    """

    k: int
    N: int
    interior: np.ndarray
    boundary: np.ndarray
    neighbors: np.ndarray
    dense_index: np.ndarray

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def n_states(self) -> int:
        """Size of the full simplex lattice, corners and edges included."""
        return comb(self.N + self.k - 1, self.k - 1)

    @property
    def n_absorbing(self) -> int:
        return self.k

    @property
    def move_probability(self) -> float:
        return 1.0 / len(_pair_moves(self.k))

    def index(self, stacks) -> int:
        """Position of an interior or face state in the concatenated ordering."""
        s = tuple(int(v) for v in stacks)
        if len(s) != self.k or sum(s) != self.N or min(s) < 0:
            raise KeyError(s)
        idx = int(self.dense_index[s[:-1]])
        if idx < 0:
            raise KeyError(s)
        return idx

    def interior_index(self, stacks) -> int:
        idx = self.index(stacks)
        if idx >= self.n_interior:
            raise KeyError(f"{tuple(stacks)} is not an interior state")
        return idx


@functools.lru_cache(maxsize=8)
def build_state_space(k: int, N: int) -> StateSpace:
    if k not in (3, 4):
        raise DimensionError(f"state spaces are built for 3 or 4 players, got {k}")
    if N < k:
        raise ValueError(f"need N >= k, got N={N}, k={k}")
    interior = compositions(N, k)
    faces = []
    for empty in range(k):
        rest = compositions(N, k - 1)
        faces.append(np.insert(rest, empty, 0, axis=1))
    boundary = np.vstack(faces)
    everything = np.vstack([interior, boundary])

    dense = np.full((N + 1,) * (k - 1), -1, dtype=np.int64)
    dense[tuple(everything[:, :-1].T)] = np.arange(len(everything))

    moves = _pair_moves(k)
    targets = interior[:, None, :] + moves[None, :, :]
    neighbors = dense[tuple(np.moveaxis(targets[..., :-1], -1, 0))]
    assert (neighbors >= 0).all()
    for arr in (interior, boundary, neighbors, dense):
        arr.setflags(write=False)
    return StateSpace(k, N, interior, boundary, neighbors, dense)


def chain_blocks(space: StateSpace, scaled: bool = False) -> tuple:
    """Sparse ``Q`` (interior to interior) and ``S`` (interior to face) blocks.

    With ``scaled=True`` both blocks are multiplied by the number of moves so
    every entry is exactly 1.0.
    """
    n = space.n_interior
    rows = np.repeat(np.arange(n), space.neighbors.shape[1])
    cols = space.neighbors.ravel()
    vals = np.full(len(cols), 1.0 if scaled else space.move_probability)
    inner = cols < n
    Q = sp.csr_matrix((vals[inner], (rows[inner], cols[inner])), shape=(n, n))
    S = sp.csr_matrix((vals[~inner], (rows[~inner], cols[~inner] - n)),
                      shape=(n, space.n_boundary))
    return Q, S


@dataclass(frozen=True, eq=False)
class _System:
    """Factorized ``m (I - Q)`` with m the move count, so all entries are integers.

    1/6 and 1/12 are not representable in binary; scaling avoids perturbing
    the chain, and residuals in extended precision recover the last digits
    that an M-matrix LU loses in its pivots.
    """

    space: StateSpace
    S: sp.csr_matrix
    M: sp.csr_matrix
    lu: object

    def solve(self, rhs: np.ndarray, refine: int = 2) -> np.ndarray:
        b = np.asarray(rhs, dtype=np.longdouble)
        x = self.lu.solve(np.asarray(rhs, dtype=float)).astype(np.longdouble)
        for _ in range(refine):
            residual = b - self.M @ x
            x = x + self.lu.solve(residual.astype(float))
        return x


@functools.lru_cache(maxsize=8)
def _factorized(k: int, N: int) -> _System:
    space = build_state_space(k, N)
    Q, S = chain_blocks(space, scaled=True)
    moves = space.neighbors.shape[1]
    M = (moves * sp.identity(space.n_interior, format="csc") - Q.tocsc()).tocsc()
    # symmetric M-matrix: keep diagonal pivots so elimination stays sign-consistent
    lu = spla.splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    return _System(space, S.tocsr(), M.astype(np.longdouble).tocsr(), lu)


def _check_cap(N: int, cap: int | None, default: int, what: str):
    cap = default if cap is None else cap
    if N > cap:
        raise CapExceeded(f"{what} with N={N} exceeds the cap of {cap}; "
                          f"raise max_N or use the jacobi/interp engines")


def _kernel_row(system: _System, stacks) -> np.ndarray:
    rhs = np.zeros(system.space.n_interior)
    rhs[system.space.interior_index(stacks)] = 1.0
    return system.S.T @ system.solve(rhs)


def poisson_kernel(capitals, max_N: int | None = None) -> dict:
    """First-exit distribution over face states, keyed by stack tuple."""
    cap = as_capitals(capitals).require_live()
    _check_cap(cap.N, max_N, DEFAULT_CAP_3 if cap.k == 3 else DEFAULT_CAP_4, "kernel")
    system = _factorized(cap.k, cap.N)
    row = _kernel_row(system, cap.stacks)
    boundary = system.space.boundary
    return {tuple(int(v) for v in boundary[j]): float(row[j]) for j in np.flatnonzero(row)}


def _fold_three(kernel_row: np.ndarray, boundary: np.ndarray, N: int) -> dict:
    """Finish each first-exit state with two-player ruin odds."""
    entries = {s: np.longdouble(0) for s in all_orders(3)}
    for j in np.flatnonzero(kernel_row):
        mass = kernel_row[j]
        stacks = boundary[j]
        busted = int(np.flatnonzero(stacks == 0)[0]) + 1
        a, b = [p for p in (1, 2, 3) if p != busted]
        ua, ub = int(stacks[a - 1]), int(stacks[b - 1])
        entries[(busted, a, b)] += mass * ub / N
        entries[(busted, b, a)] += mass * ua / N
    return {s: float(p) for s, p in entries.items()}


def exact_orders_3(capitals, exact: bool = False, max_N: int | None = None) -> OrderDistribution:
    """All six elimination-order probabilities for three players.

    With ``exact=True`` the chain is solved in rational arithmetic (N <= 30).
    """
    cap = as_capitals(capitals).require_live()
    if cap.k != 3:
        raise DimensionError("exact_orders_3 needs three stacks")
    if exact:
        _check_cap(cap.N, max_N, RATIONAL_CAP, "rational solve")
        return _exact_orders_3_rational(cap)
    _check_cap(cap.N, max_N, DEFAULT_CAP_3, "exact_orders_3")
    system = _factorized(3, cap.N)
    entries = _fold_three(_kernel_row(system, cap.stacks), system.space.boundary, cap.N)
    return OrderDistribution(3, entries, "exact")


@functools.lru_cache(maxsize=8)
def canonical_grid_3(N: int, max_N: int | None = None) -> np.ndarray:
    """``G[a, b] = P_{a, b, N-a-b}(123)`` for every interior composition, else NaN.

    One solve with the order-123 boundary data gives the whole grid; other
    orders follow by permuting stacks.
    """
    _check_cap(N, max_N, DEFAULT_CAP_3, "canonical_grid_3")
    space = build_state_space(3, N)
    values = canonical_values(3, N, max_N=N)
    grid = np.full((N + 1, N + 1), np.nan)
    grid[space.interior[:, 0], space.interior[:, 1]] = values
    grid.setflags(write=False)
    return grid


def canonical_values(k: int, N: int, max_N: int | None = None) -> np.ndarray:
    """``P(1..k)`` at every interior composition, aligned with ``space.interior``."""
    if k == 3:
        _check_cap(N, max_N, DEFAULT_CAP_3, "canonical_values")
        system = _factorized(3, N)
        face = boundary_values_123(system.space)
    elif k == 4:
        from .jacobi import face_values_4

        _check_cap(N, max_N, DEFAULT_CAP_4, "canonical_values")
        system = _factorized(4, N)
        face = face_values_4(N)
    else:
        raise DimensionError(f"need 3 or 4 players, got {k}")
    return system.solve(system.S @ face).astype(float)


def boundary_values_123(space: StateSpace) -> np.ndarray:
    """Face data for order 1..k restricted to the face where player 1 is broke."""
    if space.k == 3:
        c = space.boundary[:, 2]
        on_face = space.boundary[:, 0] == 0
        return np.where(on_face, c / space.N, 0.0)
    raise DimensionError("use jacobi.face_values_4 for four players")


def lookup_grid_3(grid: np.ndarray, stacks, sigma) -> float:
    s = [stacks[p - 1] for p in sigma]
    return float(grid[s[0], s[1]])


def exact_orders_4(capitals, max_N: int | None = None) -> OrderDistribution:
    """Four-player orders: exit distribution onto the faces, then three-player finish."""
    cap = as_capitals(capitals).require_live()
    if cap.k != 4:
        raise DimensionError("exact_orders_4 needs four stacks")
    _check_cap(cap.N, max_N, DEFAULT_CAP_4, "exact_orders_4")
    system = _factorized(4, cap.N)
    space = system.space
    row = _kernel_row(system, cap.stacks)
    grid3 = canonical_grid_3(cap.N, max_N=max(cap.N, DEFAULT_CAP_3))
    entries = {s: np.longdouble(0) for s in all_orders(4)}
    local_orders = all_orders(3)
    for j in np.flatnonzero(row):
        stacks = space.boundary[j]
        busted = int(np.flatnonzero(stacks == 0)[0]) + 1
        players = [p for p in range(1, 5) if p != busted]
        survivors = [int(stacks[p - 1]) for p in players]
        finish = {o: lookup_grid_3(grid3, survivors, o) for o in local_orders}
        for order, p in compose_after_bust(busted, finish, players).items():
            entries[order] += row[j] * p
    return OrderDistribution(4, {s: float(p) for s, p in entries.items()}, "exact")


def _exact_orders_3_rational(cap: CapitalVector) -> OrderDistribution:
    space = build_state_space(3, cap.N)
    n = space.n_interior
    # 6(I - Q) has integer entries; solve 6(I - Q) z = 6 e_x in exact arithmetic
    lower = upper = 0
    rows = [dict() for _ in range(n)]
    for i in range(n):
        rows[i][i] = Fraction(6)
        for j in space.neighbors[i]:
            j = int(j)
            if j < n:
                rows[i][j] = rows[i].get(j, Fraction(0)) - 1
                lower = max(lower, i - j)
                upper = max(upper, j - i)
    rhs = [Fraction(0)] * n
    rhs[space.interior_index(cap.stacks)] = Fraction(6)
    green = _banded_solve(rows, rhs, max(lower, upper))

    mass = [Fraction(0)] * space.n_boundary
    for i in range(n):
        if green[i] == 0:
            continue
        for j in space.neighbors[i]:
            j = int(j)
            if j >= n:
                mass[j - n] += green[i] / 6
    entries = {s: Fraction(0) for s in all_orders(3)}
    N = cap.N
    for j, m in enumerate(mass):
        if m == 0:
            continue
        stacks = space.boundary[j]
        busted = int(np.flatnonzero(stacks == 0)[0]) + 1
        a, b = [p for p in (1, 2, 3) if p != busted]
        entries[(busted, a, b)] += m * Fraction(int(stacks[b - 1]), N)
        entries[(busted, b, a)] += m * Fraction(int(stacks[a - 1]), N)
    return OrderDistribution(3, entries, "exact")


def _banded_solve(rows: list, rhs: list, width: int) -> list:
    """Gaussian elimination without pivoting on a banded SPD system (sparse rows)."""
    n = len(rows)
    rows = [dict(r) for r in rows]
    rhs = list(rhs)
    for k in range(n):
        pivot = rows[k][k]
        pivot_row = rows[k]
        for i in range(k + 1, min(n, k + width + 1)):
            f = rows[i].get(k)
            if not f:
                continue
            f = f / pivot
            target = rows[i]
            for j, v in pivot_row.items():
                if j >= k:
                    target[j] = target.get(j, 0) - f * v
            del target[k]
            rhs[i] -= f * rhs[k]
    x = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        acc = rhs[k]
        for j, v in rows[k].items():
            if j > k:
                acc -= v * x[j]
        x[k] = acc / rows[k][k]
    return x
