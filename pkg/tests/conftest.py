import os
from pathlib import Path

import pytest

from ruinlab import tables

REPO = Path(__file__).resolve().parents[1]

# how each reference table is produced when it is not on disk yet
RECIPES = {
    (3, 300): dict(engine="jacobi", max_iter=4 * 300 ** 2, tol=1e-15),
    (4, 100): dict(engine="jacobi", max_iter=4 * 100 ** 2, tol=1e-15),
    (3, 200): dict(engine="exact"),
}


def table_directory() -> Path:
    return Path(os.environ.get(tables.ENV_VAR, REPO / "tables"))


def reference_table(k, N):
    path = tables.resolve_table_path(k, N, table_directory())
    if not path.exists():
        tables.write_table(tables.generate_table(k, N, **RECIPES[(k, N)]), path)
    return tables.read_table(path)


@pytest.fixture(scope="session")
def table_k3_n300():
    return reference_table(3, 300)


@pytest.fixture(scope="session")
def table_k4_n100():
    return reference_table(4, 100)


@pytest.fixture(scope="session")
def table_k3_n200():
    return reference_table(3, 200)


@pytest.fixture(scope="session")
def small_table_k3():
    return tables.generate_table(3, 30, engine="exact")


@pytest.fixture(scope="session")
def small_table_k4():
    return tables.generate_table(4, 12, engine="exact")


ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str):
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
