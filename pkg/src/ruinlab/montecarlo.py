"""Monte Carlo estimates of elimination-order probabilities.

Paths are simulated in vectorised batches. Each batch draws from its own
``numpy.random.Generator`` spawned from ``SeedSequence(seed)``, so results
depend only on ``(seed, samples, batch_size)`` and not on how many threads
work through the batches.

Unit-step paths are only followed until the first bust; the last two
players are then finished analytically with the two-player ruin odds, so
each path contributes fractional weight to two orders.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import OrderDistribution, all_orders, as_capitals, order_str

MODES = ("plain", "consolidated")
VARIANTS = ("all_in", "occasional_all_in", "compulsive")
DEFAULT_BATCH = 65536


def _pairs(k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(k), 2)))


@dataclass(frozen=True)
class ConsolidatedStep:
    """One block of ``m`` unit rounds, ``m`` the smallest stack.

    ``counts[c]`` is the number of rounds played by pair ``c`` (pairs in
    lexicographic order; for three players pair ``c`` is the one not
    involving player ``3 - c``). ``wins[c]`` counts rounds won by the
    lower-indexed player of that pair.
    """

    m: int
    counts: tuple
    wins: tuple

    def deltas(self, k: int) -> np.ndarray:
        out = np.zeros(k, dtype=np.int64)
        for (i, j), n, z in zip(_pairs(k), self.counts, self.wins):
            net = 2 * z - n
            out[i] += net
            out[j] -= net
        return out


def draw_consolidated_step(stacks, rng: np.random.Generator) -> ConsolidatedStep:
    stacks = np.asarray(stacks)
    k = len(stacks)
    npairs = k * (k - 1) // 2
    m = int(stacks.min())
    counts = rng.multinomial(m, np.full(npairs, 1.0 / npairs))
    wins = rng.binomial(counts, 0.5)
    return ConsolidatedStep(m, tuple(int(c) for c in counts), tuple(int(w) for w in wins))


def _advance(stacks: np.ndarray, rng: np.random.Generator, consolidated: bool) -> np.ndarray:
    """One (possibly consolidated) move for every row; returns unit rounds used."""
    n, k = stacks.shape
    pairs = _pairs(k)
    if consolidated:
        m = stacks.min(axis=1)
        counts = rng.multinomial(m, np.full(len(pairs), 1.0 / len(pairs)))
        net = 2 * rng.binomial(counts, 0.5) - counts
        for c, (i, j) in enumerate(pairs):
            stacks[:, i] += net[:, c]
            stacks[:, j] -= net[:, c]
        return m
    choice = rng.integers(len(pairs), size=n)
    sign = 2 * rng.integers(2, size=n) - 1
    rows = np.arange(n)
    stacks[rows, pairs[choice, 0]] += sign
    stacks[rows, pairs[choice, 1]] -= sign
    return np.ones(n, dtype=np.int64)


def run_to_first_bust(stacks, rng: np.random.Generator, consolidated: bool = True) -> tuple:
    """Advance every row of ``stacks`` (shape ``(n, k)``) until one stack is empty.

    Returns the stopped stacks and the number of unit rounds each path took.
    A consolidated block of ``m`` rounds cannot empty a stack early since
    every stack holds at least ``m``.
    """
    state = np.array(stacks, dtype=np.int64, copy=True)
    if state.ndim == 1:
        state = state[None, :]
    if (state < 1).any():
        raise ValueError("every stack must start at 1 or more")
    steps = np.zeros(len(state), dtype=np.int64)
    active = np.arange(len(state))
    while len(active):
        sub = state[active]
        steps[active] += _advance(sub, rng, consolidated)
        state[active] = sub
        active = active[(sub > 0).all(axis=1)]
    return state, steps


def simulate_to_first_elimination(capitals, rng: np.random.Generator,
                                  consolidated: bool = True) -> tuple:
    """Single path: the first boundary state reached and the rounds it took."""
    cap = as_capitals(capitals).require_live()
    state, steps = run_to_first_bust(np.array([cap.stacks]), rng, consolidated)
    return tuple(int(v) for v in state[0]), int(steps[0])


@dataclass(frozen=True)
class SimulationEstimate:
    k: int
    estimates: dict
    stderr: dict
    winner: tuple
    winner_stderr: tuple
    samples: int
    seed: int
    mode: str
    mean_rounds: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def as_distribution(self) -> OrderDistribution:
        return OrderDistribution(self.k, dict(self.estimates), "mc",
                                 {"stderr": self.stderr, "samples": self.samples,
                                  "seed": self.seed, "mode": self.mode})

    def rows(self) -> list:
        return [(order_str(s), self.estimates[s], self.stderr[s]) for s in all_orders(self.k)]


def _fold_first_bust(stopped: np.ndarray, labels: np.ndarray, order_index: dict,
                     weights: np.ndarray, prefix: np.ndarray | None = None):
    """Fractional counting after a three-player first bust.

    ``labels[r]`` gives the global player of each column of ``stopped[r]``;
    ``prefix`` holds players already eliminated (four-player paths).
    """
    n = len(stopped)
    total = stopped.sum(axis=1)
    busted_col = np.argmin(stopped, axis=1)
    rows = np.arange(n)
    others = np.array([[c for c in range(3) if c != b] for b in range(3)])[busted_col]
    a_col, b_col = others[:, 0], others[:, 1]
    busted = labels[rows, busted_col]
    pa, pb = labels[rows, a_col], labels[rows, b_col]
    ua, ub = stopped[rows, a_col], stopped[rows, b_col]
    head = [] if prefix is None else [prefix]
    first = np.column_stack(head + [busted, pa, pb])
    second = np.column_stack(head + [busted, pb, pa])
    idx_first = _order_ids(first, order_index)
    idx_second = _order_ids(second, order_index)
    np.add.at(weights, (rows, idx_first), ub / total)
    np.add.at(weights, (rows, idx_second), ua / total)


def _order_ids(orders: np.ndarray, order_index: dict) -> np.ndarray:
    """Row-wise position of each order (digits of player labels) in ``all_orders``."""
    k = orders.shape[1]
    table = np.full(10 ** k, -1, dtype=np.int64)
    for s, i in order_index.items():
        table[int("".join(map(str, s)))] = i
    code = np.zeros(len(orders), dtype=np.int64)
    for c in range(k):
        code = code * 10 + orders[:, c]
    return table[code]


def _order_batch(stacks: tuple, n: int, rng: np.random.Generator, consolidated: bool) -> tuple:
    k = len(stacks)
    orders = all_orders(k)
    order_index = {s: i for i, s in enumerate(orders)}
    weights = np.zeros((n, len(orders)))
    start = np.tile(np.array(stacks, dtype=np.int64), (n, 1))
    stopped, rounds = run_to_first_bust(start, rng, consolidated)
    labels = np.tile(np.arange(1, k + 1), (n, 1))
    if k == 3:
        _fold_first_bust(stopped, labels, order_index, weights)
    else:
        busted_col = np.argmin(stopped, axis=1)
        keep = np.array([[c for c in range(4) if c != b] for b in range(4)])[busted_col]
        rows = np.arange(n)[:, None]
        survivors = stopped[rows, keep]
        sub_labels = labels[rows, keep]
        stopped3, more = run_to_first_bust(survivors, rng, consolidated)
        rounds = rounds + more
        _fold_first_bust(stopped3, sub_labels, order_index, weights,
                         prefix=busted_col + 1)
    return weights, rounds


def _variant_batch(stacks: tuple, n: int, rng: np.random.Generator, variant: str) -> tuple:
    k = len(stacks)
    orders = all_orders(k)
    order_index = {s: i for i, s in enumerate(orders)}
    state = np.tile(np.array(stacks, dtype=np.int64), (n, 1))
    record = np.zeros((n, k), dtype=np.int64)
    filled = np.zeros(n, dtype=np.int64)
    rounds = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while len(active):
        sub = state[active]
        alive = sub > 0
        keys = rng.random(sub.shape)
        keys[~alive] = 2.0
        pick = np.argsort(keys, axis=1)[:, :2]
        rows = np.arange(len(sub))
        i, j = pick[:, 0], pick[:, 1]
        si, sj = sub[rows, i], sub[rows, j]
        if variant == "all_in":
            bet = np.minimum(si, sj)
            i_wins = rng.random(len(sub)) < 0.5
        elif variant == "occasional_all_in":
            bet = rng.integers(1, np.minimum(si, sj) + 1)
            i_wins = rng.random(len(sub)) < 0.5
        elif variant == "compulsive":
            i_wins = rng.random(len(sub)) * (si + sj) < si
            bet = np.where(i_wins, sj, si)
        else:
            raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
        delta = np.where(i_wins, bet, -bet)
        sub[rows, i] += delta
        sub[rows, j] -= delta
        rounds[active] += 1
        loser = np.where(i_wins, j, i)
        bust = sub[rows, loser] == 0
        glob = active[bust]
        record[glob, filled[glob]] = loser[bust] + 1
        filled[glob] += 1
        state[active] = sub
        done = (sub > 0).sum(axis=1) == 1
        fin = active[done]
        record[fin, k - 1] = np.argmax(sub[done], axis=1) + 1
        active = active[~done]
    weights = np.zeros((n, len(orders)))
    weights[np.arange(n), _order_ids(record, order_index)] = 1.0
    return weights, rounds


def _reduce(k: int, chunks: list, samples: int, seed: int, mode: str) -> SimulationEstimate:
    orders = all_orders(k)
    total = sum(c[0] for c in chunks)
    total_sq = sum(c[1] for c in chunks)
    win = sum(c[2] for c in chunks)
    win_sq = sum(c[3] for c in chunks)
    rounds = sum(c[4] for c in chunks)
    mean = total / samples
    var = np.maximum(total_sq / samples - mean ** 2, 0.0)
    se = np.sqrt(var / samples)
    wmean = win / samples
    wse = np.sqrt(np.maximum(win_sq / samples - wmean ** 2, 0.0) / samples)
    return SimulationEstimate(
        k=k,
        estimates={s: float(mean[i]) for i, s in enumerate(orders)},
        stderr={s: float(se[i]) for i, s in enumerate(orders)},
        winner=tuple(float(v) for v in wmean),
        winner_stderr=tuple(float(v) for v in wse),
        samples=samples, seed=seed, mode=mode,
        mean_rounds=float(rounds / samples),
    )


def _simulate(capitals, samples: int, seed: int, mode: str, batch, threads: int,
              batch_size: int) -> SimulationEstimate:
    cap = as_capitals(capitals).require_live()
    if cap.k not in (3, 4):
        raise ValueError("simulation supports three or four players")
    if samples <= 0:
        raise ValueError("samples must be positive")
    orders = all_orders(cap.k)
    winners = np.array([s[-1] for s in orders]) - 1
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(arg):
        size, ss = arg
        weights, rounds = batch(cap.stacks, size, np.random.Generator(np.random.PCG64(ss)))
        per_winner = np.zeros((size, cap.k))
        for c in range(cap.k):
            per_winner[:, c] = weights[:, winners == c].sum(axis=1)
        return (weights.sum(axis=0), (weights ** 2).sum(axis=0),
                per_winner.sum(axis=0), (per_winner ** 2).sum(axis=0), int(rounds.sum()))

    jobs = list(zip(sizes, streams))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(work, jobs))
    else:
        chunks = [work(j) for j in jobs]
    return _reduce(cap.k, chunks, samples, seed, mode)


def estimate_orders(capitals, samples: int, seed: int = 0, mode: str = "consolidated",
                    threads: int = 1, batch_size: int = DEFAULT_BATCH) -> SimulationEstimate:
    """Estimate every order probability from ``samples`` unit-step paths."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    consolidated = mode == "consolidated"
    return _simulate(capitals, samples, seed, mode,
                     lambda st, n, rng: _order_batch(st, n, rng, consolidated),
                     threads, batch_size)


def estimate_variant(capitals, variant: str, samples: int, seed: int = 0,
                     threads: int = 1, batch_size: int = DEFAULT_BATCH) -> SimulationEstimate:
    """Estimate order probabilities under a variable-bet variant, counting whole orders."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    return _simulate(capitals, samples, seed, variant,
                     lambda st, n, rng: _variant_batch(st, n, rng, variant),
                     threads, batch_size)
