"""Scaled starts P_{nA,nB,nC}(sigma), their successive differences, and the extrapolated limit.

    python scripts/scaling_study.py --stacks 2,3,5 --orders 213 --levels 1,2,4,8,16
    python scripts/scaling_study.py --stacks 1,1,2 --orders 312,321 --levels 25,50,75 --engine jacobi
"""

import argparse

from ruinlab.asymptotics import brownian_limit, richardson


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--stacks", default="2,3,5")
    parser.add_argument("--orders", default="213")
    parser.add_argument("--levels", default="1,2,4,8,16")
    parser.add_argument("--engine", choices=("exact", "jacobi"), default="exact")
    args = parser.parse_args()
    stacks = tuple(int(v) for v in args.stacks.split(","))
    levels = [int(v) for v in args.levels.split(",")]

    est = brownian_limit(stacks, args.orders.split(","), levels, engine=args.engine)
    prev = None
    print(f"{'N':>6}  {'value':>20}  {'difference':>12}  {'extrapolated':>20}")
    for i, (N, v) in enumerate(est.rows()):
        diff = "" if prev is None else f"{v - prev:12.3e}"
        extra = richardson(est.sizes[: i + 1], est.values[: i + 1])
        print(f"{N:>6}  {v:20.15f}  {diff:>12}  {extra:20.15f}")
        prev = v


if __name__ == "__main__":
    main()
