"""Build the reference tables used by interpolation, regression and the acceptance suite.

    python scripts/generate_tables.py            # k=3 N=300, k=4 N=100, k=3 N=200
    python scripts/generate_tables.py --only k3-N300
"""

import argparse
import logging
import time

from ruinlab.tables import generate_table, resolve_table_path, write_table

# (k, N, engine, sweep cap as a multiple of N**2, tolerance)
PLAN = {
    "k3-N300": (3, 300, "jacobi", 4, 1e-15),
    "k4-N100": (4, 100, "jacobi", 4, 1e-15),
    "k3-N200": (3, 200, "exact", None, None),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=None, help="table directory (default $RUINLAB_TABLES or ./tables)")
    parser.add_argument("--only", action="append", choices=sorted(PLAN))
    parser.add_argument("--force", action="store_true", help="overwrite existing tables")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    for name in args.only or PLAN:
        k, N, engine, cap, tol = PLAN[name]
        path = resolve_table_path(k, N, args.out)
        if path.exists() and not args.force:
            logging.info("%s exists, skipping", path)
            continue
        start = time.perf_counter()
        table = generate_table(k, N, engine, max_iter=cap and cap * N * N, tol=tol)
        write_table(table, path)
        logging.info("%s: %d entries via %s in %.1fs (%s)", path, len(table), engine,
                     time.perf_counter() - start, table.precision)


if __name__ == "__main__":
    main()
