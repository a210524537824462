"""Reference tables of canonical-order probabilities at a fixed total.

A table stores ``P(1..k)`` for every composition of ``N`` into ``k`` positive
parts. Any other order is read by permuting the stacks first, so nothing
else needs storing.

File layout (UTF-8 text)::

    ruinlab-table v1 k=3 N=300 method=jacobi
    # precision: ...
    1 1 298 1.6888127785490800e-07
    ...

one line per composition in lexicographic order, probabilities written with
17 significant digits so that reading them back is bit-exact.
"""

from __future__ import annotations

import fcntl
import os
import re
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .core import as_capitals, canonicalize

MAGIC = "ruinlab-table v1"
ENV_VAR = "RUINLAB_TABLES"
_HEADER = re.compile(r"^ruinlab-table v1 k=(\d+) N=(\d+) method=(\S+)\s*$")


class TableMissing(FileNotFoundError):
    pass


class TableFormatError(ValueError):
    pass


@dataclass(eq=False)
class ReferenceTable:
    k: int
    N: int
    method: str
    values: np.ndarray
    precision: str = ""
    _index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        from .exact import compositions

        expected = comb(self.N - 1, self.k - 1)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (expected,):
            raise TableFormatError(f"expected {expected} entries, got {self.values.shape}")
        comps = compositions(self.N, self.k)
        index = np.full((self.N + 1,) * (self.k - 1), -1, dtype=np.int64)
        index[tuple(comps[:, :-1].T)] = np.arange(len(comps))
        self._index = index

    def __len__(self):
        return len(self.values)

    def compositions(self) -> np.ndarray:
        from .exact import compositions

        return compositions(self.N, self.k)

    def canonical(self, stacks) -> float:
        """Stored ``P(1..k)`` at one composition of ``N``."""
        s = tuple(int(v) for v in stacks)
        if len(s) != self.k or sum(s) != self.N or min(s) < 1:
            raise KeyError(f"{s} is not a composition of {self.N} into {self.k} positive parts")
        return float(self.values[self._index[s[:-1]]])

    def canonical_many(self, stacks: np.ndarray) -> np.ndarray:
        stacks = np.asarray(stacks, dtype=np.int64)
        return self.values[self._index[tuple(stacks[:, :-1].T)]]


def lookup_full(table: ReferenceTable, capitals, sigma) -> float:
    """``P_capitals(sigma)`` read from a canonical-order table."""
    cap = as_capitals(capitals)
    if cap.k != table.k:
        raise ValueError(f"table holds {table.k}-player data, got {cap.k} stacks")
    if cap.N != table.N:
        raise KeyError(f"capitals sum to {cap.N}, table is for N={table.N}")
    permuted, _ = canonicalize(cap, sigma)
    return table.canonical(permuted.stacks)


def generate_table(k: int, N: int, engine: str = "jacobi", max_iter: int | None = None,
                   tol: float | None = None, max_N: int | None = None) -> ReferenceTable:
    if engine == "exact":
        from .exact import canonical_values

        values = canonical_values(k, N, max_N=max_N)
        note = "sparse LU on the integer-scaled chain with extended-precision refinement"
        return ReferenceTable(k, N, "exact", values, note)
    if engine == "jacobi":
        from .jacobi import jacobi_solve

        kwargs = {"max_iter": max_iter}
        if tol is not None:
            kwargs["tol"] = tol
        grid = jacobi_solve(k, N, **kwargs)
        note = (f"midpoint of certified bounds; max half-gap {grid.gap / 2:.3e} "
                f"after {grid.iterations} sweeps")
        return ReferenceTable(k, N, "jacobi", grid.midpoint, note)
    raise ValueError(f"unknown table engine {engine!r} (use exact or jacobi)")


def table_dir(flag: str | os.PathLike | None = None) -> Path:
    if flag:
        return Path(flag)
    if os.environ.get(ENV_VAR):
        return Path(os.environ[ENV_VAR])
    return Path("tables")


def table_filename(k: int, N: int) -> str:
    return f"k{k}-N{N}"


def resolve_table_path(k: int, N: int, directory=None) -> Path:
    return table_dir(directory) / table_filename(k, N)


def write_table(table: ReferenceTable, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock_path = path.with_name(path.name + ".lock")
    tmp = path.with_name(path.name + ".tmp")
    with open(lock_path, "w") as lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(f"{MAGIC} k={table.k} N={table.N} method={table.method}\n")
            if table.precision:
                fh.write(f"# precision: {table.precision}\n")
            comps = table.compositions()
            for row, p in zip(comps, table.values):
                fh.write(" ".join(str(int(v)) for v in row) + f" {p:.16e}\n")
        os.replace(tmp, path)
    lock_path.unlink(missing_ok=True)
    return path


def read_table(path) -> ReferenceTable:
    path = Path(path)
    if path.is_dir():
        raise TableFormatError(f"{path} is a directory; pass the table file")
    if not path.exists():
        m = re.match(r"k(\d)-N(\d+)$", path.name)
        hint = (f"ruinlab table gen --k {m.group(1)} --N {m.group(2)} --out {path.parent}"
                if m else "ruinlab table gen --k K --N N")
        raise TableMissing(f"no reference table at {path}; generate it with `{hint}`")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        m = _HEADER.match(header)
        if not m:
            raise TableFormatError(f"{path}: bad header {header.strip()!r}")
        k, N, method = int(m.group(1)), int(m.group(2)), m.group(3)
        precision = ""
        values = []
        comps = []
        for line in fh:
            if line.startswith("#"):
                if line.startswith("# precision:"):
                    precision = line.split(":", 1)[1].strip()
                continue
            parts = line.split()
            if not parts:
                continue
            if len(parts) != k + 1:
                raise TableFormatError(f"{path}: malformed line {line.strip()!r}")
            comps.append(parts[:k])
            values.append(float(parts[k]))
    table = ReferenceTable(k, N, method, np.array(values), precision)
    expected = table.compositions()
    if not np.array_equal(np.array(comps, dtype=np.int64).reshape(-1, k), expected):
        raise TableFormatError(f"{path}: compositions are not in lexicographic order")
    return table


def load_table(k: int, N: int, directory=None) -> ReferenceTable:
    return read_table(resolve_table_path(k, N, directory))
