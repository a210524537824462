"""Two-sided Jacobi iteration for elimination-order probabilities on a whole grid.

The six-point (twelve-point for four players) average is monotone, so a
sweep started below the solution stays below it and one started above stays
above. Starting the interior at 0 and at 1 with the exact face data gives a
certified bracket ``lower <= P <= upper`` after every sweep.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np

from .core import DimensionError, parse_order
from .exact import StateSpace, build_state_space, canonical_grid_3, lookup_grid_3

log = logging.getLogger(__name__)

# TBB builds in common distros are too old for numba and only produce a warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@numba.njit(cache=True, parallel=True)
def _sweeps(lower, upper, scratch_lo, scratch_hi, neighbors, n_interior, count):
    """Run ``count`` synchronous sweeps on both bounds; return the final max gap."""
    moves = neighbors.shape[1]
    for _ in range(count):
        for i in numba.prange(n_interior):
            lo = 0.0
            hi = 0.0
            for m in range(moves):
                j = neighbors[i, m]
                lo += lower[j]
                hi += upper[j]
            scratch_lo[i] = lo / moves
            scratch_hi[i] = hi / moves
        for i in numba.prange(n_interior):
            lower[i] = scratch_lo[i]
            upper[i] = scratch_hi[i]
    gap = 0.0
    for i in range(n_interior):
        g = upper[i] - lower[i]
        if g > gap:
            gap = g
    return gap


@numba.njit(cache=True)
def _gauss_seidel(values, neighbors, n_interior, count):
    moves = neighbors.shape[1]
    for _ in range(count):
        for i in range(n_interior):
            acc = 0.0
            for m in range(moves):
                acc += values[neighbors[i, m]]
            values[i] = acc / moves


@dataclass
class BoundsGrid:
    """Lower and upper brackets on every interior state for one order.

    ``lower``/``upper`` are indexed like ``space.interior``.
    """

    space: StateSpace
    order: tuple
    lower: np.ndarray
    upper: np.ndarray
    iterations: int
    gap: float
    certified: bool = True

    @property
    def N(self) -> int:
        return self.space.N

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def bounds(self, stacks) -> tuple:
        i = self.space.interior_index(stacks)
        return float(self.lower[i]), float(self.upper[i])

    def value(self, stacks) -> float:
        lo, hi = self.bounds(stacks)
        return 0.5 * (lo + hi)

    def error(self, stacks) -> float:
        """Certified half-width at one state."""
        lo, hi = self.bounds(stacks)
        return 0.5 * (hi - lo)

    def as_dict(self) -> dict:
        mid = self.midpoint
        return {tuple(int(v) for v in s): float(mid[i]) for i, s in enumerate(self.space.interior)}


def boundary_values_3(N: int, sigma) -> np.ndarray:
    """Face data for a three-player order, aligned with ``space.boundary``.

    On the face where the first-eliminated player is broke, the value is the
    eventual winner's share of the chips; the other two faces are 0.
    """
    order = parse_order(sigma, 3)
    space = build_state_space(3, N)
    first, _, winner = order
    face = space.boundary[:, first - 1] == 0
    return np.where(face, space.boundary[:, winner - 1] / N, 0.0)


def face_values_4(N: int, sigma=(1, 2, 3, 4), face_engine: str = "exact") -> np.ndarray:
    """Face data for a four-player order from exact three-player probabilities."""
    order = parse_order(sigma, 4)
    space = build_state_space(4, N)
    first = order[0]
    players = [p for p in range(1, 5) if p != first]
    local = tuple(players.index(p) + 1 for p in order[1:])
    values = np.zeros(space.n_boundary)
    on_face = np.flatnonzero(space.boundary[:, first - 1] == 0)
    if face_engine == "exact":
        grid = canonical_grid_3(N, max_N=max(N, 250))
    elif face_engine == "jacobi":
        grid = np.full((N + 1, N + 1), np.nan)
        inner = jacobi_solve_3(N, (1, 2, 3))
        grid[inner.space.interior[:, 0], inner.space.interior[:, 1]] = inner.midpoint
    else:
        raise ValueError(f"unknown face engine {face_engine!r}")
    for j in on_face:
        survivors = [int(space.boundary[j, p - 1]) for p in players]
        values[j] = lookup_grid_3(grid, survivors, local)
    return values


def _run(space: StateSpace, order, face: np.ndarray, max_iter: int, tol: float,
         check_every: int, method: str, history: list | None) -> BoundsGrid:
    n = space.n_interior
    lower = np.concatenate([np.zeros(n), face])
    upper = np.concatenate([np.ones(n), face])
    neighbors = np.ascontiguousarray(space.neighbors)
    if method == "gauss-seidel":
        _gauss_seidel(lower, neighbors, n, max_iter)
        _gauss_seidel(upper, neighbors, n, max_iter)
        gap = float(np.max(upper[:n] - lower[:n]))
        return BoundsGrid(space, order, lower[:n], upper[:n], max_iter, gap, certified=False)
    if method != "jacobi":
        raise ValueError(f"unknown method {method!r}")

    scratch_lo = np.empty(n)
    scratch_hi = np.empty(n)
    done = 0
    gap = 1.0 if n else 0.0
    if history is not None:
        history.append((0, lower[:n].copy(), upper[:n].copy()))
    while done < max_iter and gap > tol:
        step = min(check_every, max_iter - done)
        gap = _sweeps(lower, upper, scratch_lo, scratch_hi, neighbors, n, step)
        done += step
        if history is not None:
            history.append((done, lower[:n].copy(), upper[:n].copy()))
    log.debug("jacobi N=%d order=%s: %d sweeps, gap %.3g", space.N, order, done, gap)
    return BoundsGrid(space, order, lower[:n], upper[:n], done, float(gap))


def jacobi_solve_3(N: int, sigma, max_iter: int | None = None, tol: float = 1e-15,
                   check_every: int = 256, method: str = "jacobi",
                   history: list | None = None) -> BoundsGrid:
    """Bracket ``P_{a,b,c}(sigma)`` for every interior composition of ``N``.

    Iterates until the largest gap is at most ``tol`` or ``max_iter``
    sweeps (default ``2 N**2``) have run. Pass a list as ``history`` to
    collect ``(sweeps, lower, upper)`` snapshots at every gap check.
    """
    if N < 3:
        raise ValueError("need N >= 3")
    order = parse_order(sigma, 3)
    space = build_state_space(3, N)
    max_iter = 2 * N * N if max_iter is None else max_iter
    return _run(space, order, boundary_values_3(N, order), max_iter, tol,
                check_every, method, history)


def jacobi_solve_4(N: int, sigma=(1, 2, 3, 4), max_iter: int | None = None,
                   tol: float = 1e-9, check_every: int = 256, method: str = "jacobi",
                   face_engine: str = "exact", history: list | None = None) -> BoundsGrid:
    """Bracket ``P_{a,b,c,d}(sigma)`` on the whole four-player grid.

    Face data come from three-player probabilities at the same total.
    """
    if N < 4:
        raise ValueError("need N >= 4")
    order = parse_order(sigma, 4)
    space = build_state_space(4, N)
    max_iter = 2 * N * N if max_iter is None else max_iter
    return _run(space, order, face_values_4(N, order, face_engine), max_iter, tol,
                check_every, method, history)


def jacobi_solve(k: int, N: int, sigma=None, **kwargs) -> BoundsGrid:
    if k == 3:
        return jacobi_solve_3(N, sigma or (1, 2, 3), **kwargs)
    if k == 4:
        return jacobi_solve_4(N, sigma or (1, 2, 3, 4), **kwargs)
    raise DimensionError(f"jacobi engine supports 3 or 4 players, got {k}")
