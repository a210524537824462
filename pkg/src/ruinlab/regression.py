"""Regression-corrected ICM for three players.

On the sorted region ``1 <= A <= B <= C`` the ratio of gambler's-ruin to
ICM probability is smooth in ``x = A/N`` and ``y = B/N``. A bivariate
polynomial (sextic by default, 28 terms) is fitted to the ratio for the
orders 321, 312 and 213; the other three orders follow from the
optional-stopping identities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    OrderDistribution,
    all_orders,
    as_capitals,
    complete_by_identities,
    icm_probability,
    order_str,
    parse_order,
)
from .tables import ReferenceTable, lookup_full

FITTED_ORDERS = ((3, 2, 1), (3, 1, 2), (2, 1, 3))
_HEADER = re.compile(r"^ruinlab-regression v1 sigma=(\d{3}) N=(\d+) degree=(\d+)\s*$")


class RankDeficient(ValueError):
    pass


def exponents(degree: int = 6) -> list:
    """``(i, j)`` powers of ``x`` and ``y``: total degree ascending, then ``i`` descending."""
    return [(i, d - i) for d in range(degree + 1) for i in range(d, -1, -1)]


def design_matrix(x: np.ndarray, y: np.ndarray, degree: int = 6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.column_stack([x ** i * y ** j for i, j in exponents(degree)])


def sorted_region(N: int) -> np.ndarray:
    """All ``(A, B, C)`` with ``1 <= A <= B <= C`` summing to ``N``, lexicographic."""
    rows = [(a, b, N - a - b) for a in range(1, N // 3 + 1)
            for b in range(a, (N - a) // 2 + 1)]
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


@dataclass(frozen=True)
class RatioDataset:
    sigma: tuple
    N: int
    stacks: np.ndarray
    ratio: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.stacks[:, 0] / self.N

    @property
    def y(self) -> np.ndarray:
        return self.stacks[:, 1] / self.N

    def __len__(self):
        return len(self.ratio)


def build_ratio_dataset(table: ReferenceTable, sigma) -> RatioDataset:
    order = parse_order(sigma, 3)
    if order not in FITTED_ORDERS:
        raise ValueError(f"ratios are fitted for {[order_str(s) for s in FITTED_ORDERS]} only")
    if table.k != 3:
        raise ValueError("ratio dataset needs a three-player table")
    stacks = sorted_region(table.N)
    gr = np.array([lookup_full(table, s, order) for s in stacks])
    icm = np.array([icm_probability(s, order) for s in stacks])
    return RatioDataset(order, table.N, stacks, gr / icm)


@dataclass(frozen=True)
class RegressionModel:
    sigma: tuple
    coefficients: np.ndarray
    degree: int
    training_N: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(exponents(self.degree))
        if np.shape(self.coefficients) != (n,):
            raise ValueError(f"degree {self.degree} needs {n} coefficients")

    def beta(self, i: int, j: int) -> float:
        return float(self.coefficients[exponents(self.degree).index((i, j))])

    def __call__(self, x, y):
        return design_matrix(np.atleast_1d(x), np.atleast_1d(y), self.degree) @ self.coefficients


def normal_determinant(X: np.ndarray) -> float:
    """``det(X'X)``, reported for comparison only; the fit never forms ``X'X``."""
    sign, logdet = np.linalg.slogdet(X.T @ X)
    return float(sign * np.exp(logdet))


def fit_sextic(data: RatioDataset, degree: int = 6, rcond: float = 1e-13) -> RegressionModel:
    """Least squares through a Householder QR of the design matrix."""
    X = design_matrix(data.x, data.y, degree)
    if len(X) < X.shape[1]:
        raise RankDeficient(f"{len(X)} rows cannot determine {X.shape[1]} coefficients")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= rcond * diag.max():
        cond = np.linalg.cond(X)
        raise RankDeficient(f"design matrix is numerically rank deficient (condition ~{cond:.3g})")
    beta = np.linalg.solve(r, q.T @ data.ratio)
    resid = X @ beta - data.ratio
    diagnostics = {
        "rows": len(X),
        "max_residual": float(np.abs(resid).max()),
        "rms_residual": float(np.sqrt(np.mean(resid ** 2))),
        "normal_determinant": normal_determinant(X),
        "condition": float(np.linalg.cond(X)),
    }
    return RegressionModel(data.sigma, beta, degree, data.N, diagnostics)


def fit_all(table: ReferenceTable, degree: int = 6) -> dict:
    return {s: fit_sextic(build_ratio_dataset(table, s), degree) for s in FITTED_ORDERS}


def _sorted_view(capitals) -> tuple:
    """Stacks sorted ascending (stable) and each player's rank in that sort (1-based)."""
    cap = as_capitals(capitals).require_live()
    idx = sorted(range(3), key=lambda i: cap[i])
    rank = {idx[r] + 1: r + 1 for r in range(3)}
    return tuple(cap[i] for i in idx), rank


def _fitted_values(models: dict, stacks: tuple) -> dict:
    n = sum(stacks)
    x, y = stacks[0] / n, stacks[1] / n
    out = {}
    for s in FITTED_ORDERS:
        if s not in models:
            raise KeyError(f"no regression model for order {order_str(s)}")
        out[s] = icm_probability(stacks, s) * float(models[s](x, y)[0])
    return out


def predict_distribution(models: dict, capitals) -> OrderDistribution:
    """All six regression estimates; orders outside the fitted set come from the identities."""
    stacks, rank = _sorted_view(capitals)
    canonical = complete_by_identities(_fitted_values(models, stacks), stacks, tol=np.inf)
    entries = {}
    for s in all_orders(3):
        entries[s] = canonical.entries[tuple(rank[p] for p in s)]
    return OrderDistribution(3, entries, "regression",
                             {"sorted": stacks, "x": stacks[0] / sum(stacks),
                              "y": stacks[1] / sum(stacks)})


def predict(models: dict, capitals, sigma) -> float:
    order = parse_order(sigma, 3)
    return float(predict_distribution(models, capitals).entries[order])


def write_model(model: RegressionModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"ruinlab-regression v1 sigma={order_str(model.sigma)} "
                 f"N={model.training_N} degree={model.degree}\n")
        for key, value in model.diagnostics.items():
            fh.write(f"# {key}: {value!r}\n")
        for (i, j), b in zip(exponents(model.degree), model.coefficients):
            fh.write(f"{b:.16e}\n")
    return path


def read_model(path) -> RegressionModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        m = _HEADER.match(header)
        if not m:
            raise ValueError(f"{path}: bad header {header.strip()!r}")
        coefs = [float(line) for line in fh if line.strip() and not line.startswith("#")]
    return RegressionModel(parse_order(m.group(1), 3), np.array(coefs), int(m.group(3)),
                           int(m.group(2)))


def model_filename(sigma, N: int) -> str:
    return f"regression-{order_str(parse_order(sigma, 3))}-N{N}"


def save_models(models: dict, directory) -> list:
    return [write_model(m, Path(directory) / model_filename(s, m.training_N))
            for s, m in models.items()]


def load_models(directory, N: int = 300) -> dict:
    out = {}
    for s in FITTED_ORDERS:
        path = Path(directory) / model_filename(s, N)
        if not path.exists():
            raise FileNotFoundError(f"missing {path}; run `ruinlab regress fit --N {N}` first")
        out[s] = read_model(path)
    return out
