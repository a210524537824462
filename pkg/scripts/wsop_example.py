"""Three-handed final table: every engine side by side, then the prize split.

Stacks are in units of one fifth of a big blind, so that every stack is an integer.

    python scripts/wsop_example.py --stacks 169,301,817 --payouts 10000000,6000000,4000000
"""

import argparse

from ruinlab.chop import chip_proportional, chop
from ruinlab.core import all_orders, icm_distribution, order_str
from ruinlab.interp import interp_distribution
from ruinlab.montecarlo import estimate_orders
from ruinlab.regression import fit_all, predict_distribution
from ruinlab.tables import load_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--stacks", default="169,301,817")
    parser.add_argument("--payouts", default="10000000,6000000,4000000")
    parser.add_argument("--tables", default=None)
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    stacks = tuple(int(v) for v in args.stacks.split(","))
    payouts = [float(v) for v in args.payouts.split(",")]

    table = load_table(3, 300, args.tables)
    engines = {
        "icm": icm_distribution(stacks),
        "interp": interp_distribution(table, stacks),
        "regression": predict_distribution(fit_all(table), stacks),
        "mc": estimate_orders(stacks, args.samples, seed=args.seed).as_distribution(),
    }
    print("engine      " + "  ".join(f"{order_str(s):>8}" for s in all_orders(3)))
    for name, dist in engines.items():
        print(f"{name:<11} " + "  ".join(f"{float(dist[s]):8.6f}" for s in all_orders(3)))
    print()
    for name, dist in engines.items():
        split = chop(stacks, payouts, dist).as_floats()
        print(f"{name:<11} " + "  ".join(f"{v:14,.2f}" for v in split))
    naive = chip_proportional(stacks, payouts)
    print(f"{'chips':<11} " + "  ".join(f"{v:14,.2f}" for v in naive) + "   (proportional, for comparison)")


if __name__ == "__main__":
    main()
