"""``ruinlab`` command line.

Stacks are comma-separated integers in units of the bet size. Fractional
big-blind counts must be rescaled first, e.g. multiply everything by 5 to
clear fifths.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import asymptotics, chop as chop_mod, core, exact, interp, jacobi, montecarlo, regression, tables


def _stacks(text: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"stacks must be comma-separated integers, got {text!r}")
    try:
        core.CapitalVector(values)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return values


def _live_stacks(text: str) -> tuple:
    values = _stacks(text)
    if min(values) < 1:
        raise argparse.ArgumentTypeError("every stack must be at least 1")
    return values


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _num(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return f"{float(x):.17g}"


class Report:
    """Collects rows and diagnostics, then prints them as text or csv."""

    def __init__(self, fmt: str, columns: list):
        self.fmt = fmt
        self.columns = columns
        self.rows = []
        self.notes = []

    def row(self, *values):
        self.rows.append(values)

    def note(self, key, value):
        self.notes.append((key, value))

    def emit(self, out=None):
        out = out or sys.stdout
        cells = [[v if isinstance(v, str) else _num(v) for v in r] for r in self.rows]
        if self.fmt == "csv":
            print(",".join(self.columns), file=out)
            for r in cells:
                print(",".join(r), file=out)
        else:
            widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(self.columns)]
            print("  ".join(c.ljust(w) for c, w in zip(self.columns, widths)), file=out)
            for r in cells:
                print("  ".join(v.ljust(w) for v, w in zip(r, widths)), file=out)
        for key, value in self.notes:
            print(f"# {key}: {value}", file=out)


def _distribution_report(args, dist: core.OrderDistribution, extra: dict | None = None) -> Report:
    rep = Report(args.format, ["order", "probability"] + list((extra or {}).keys()))
    for s in core.all_orders(dist.k):
        more = [extra[c][s] for c in (extra or {})]
        rep.row(core.order_str(s), dist.entries[s], *more)
    rep.note("engine", dist.provenance)
    for key, value in dist.diagnostics.items():
        if key == "lambdas":
            value = ", ".join(str(v) for v in value)
        rep.note(key, value)
    return rep


def _table_for(args, k: int, N: int) -> tables.ReferenceTable:
    if args.table and Path(args.table).is_file():
        table = tables.read_table(args.table)
        if table.k != k:
            raise ValueError(f"{args.table} is a {table.k}-player table; need k={k}")
        return table
    return tables.load_table(k, N, args.table)


def cmd_exact(args) -> Report:
    k = len(args.stacks)
    if k == 2:
        a, b = args.stacks
        p = Fraction(a, a + b) if args.rational else a / (a + b)
        dist = core.OrderDistribution(2, {(2, 1): p, (1, 2): 1 - p}, "exact")
    elif k == 3:
        dist = exact.exact_orders_3(args.stacks, exact=args.rational, max_N=args.max_N)
    elif args.rational:
        raise ValueError("rational output is available for up to three players")
    else:
        dist = exact.exact_orders_4(args.stacks, max_N=args.max_N)
    return _distribution_report(args, dist)


def cmd_jacobi(args) -> Report:
    k, N = len(args.stacks), sum(args.stacks)
    if k not in (3, 4):
        raise core.DimensionError("jacobi engine supports 3 or 4 players")
    kw = {"max_iter": args.max_iter, "method": args.method}
    if args.tol is not None:
        kw["tol"] = args.tol
    grid = jacobi.jacobi_solve(k, N, **kw)
    values, errors = {}, {}
    for s in core.all_orders(k):
        stacks, _ = core.canonicalize(args.stacks, s)
        values[s] = grid.value(stacks.stacks)
        errors[s] = grid.error(stacks.stacks)
    dist = core.OrderDistribution(k, values, "jacobi",
                                  {"sweeps": grid.iterations, "max gap": f"{grid.gap:.3e}",
                                   "certified": grid.certified})
    return _distribution_report(args, dist, {"half_gap": errors})


def cmd_icm(args) -> Report:
    return _distribution_report(args, core.icm_distribution(args.stacks, exact=args.rational))


def cmd_interp(args) -> Report:
    k = len(args.stacks)
    N_ref = args.N_ref or {3: 300, 4: 100}.get(k)
    if N_ref is None:
        raise core.DimensionError("interpolation supports 3 or 4 players")
    table = _table_for(args, k, N_ref)
    return _distribution_report(args, interp.interp_distribution(table, args.stacks))


def cmd_mc(args) -> Report:
    if args.variant == "standard":
        est = montecarlo.estimate_orders(args.stacks, args.samples, seed=args.seed,
                                         mode=args.mode, threads=args.threads)
    else:
        est = montecarlo.estimate_variant(args.stacks, args.variant, args.samples,
                                          seed=args.seed, threads=args.threads)
    rep = _distribution_report(args, est.as_distribution(), {"stderr": est.stderr})
    if est.mean_rounds is not None:
        rep.note("mean rounds", f"{est.mean_rounds:.17g}")
    return rep


def cmd_regress_fit(args) -> Report:
    table = _table_for(args, 3, args.N)
    models = regression.fit_all(table, degree=args.degree)
    paths = regression.save_models(models, args.out)
    rep = Report(args.format, ["order", "beta10", "beta01", "max_residual", "rms_residual"])
    for s, m in models.items():
        rep.row(core.order_str(s), m.beta(1, 0), m.beta(0, 1),
                m.diagnostics["max_residual"], m.diagnostics["rms_residual"])
    rep.note("normal-matrix determinant", f"{models[(3, 2, 1)].diagnostics['normal_determinant']:.6g}")
    rep.note("written", ", ".join(str(p) for p in paths))
    return rep


def cmd_regress_predict(args) -> Report:
    if len(args.stacks) != 3:
        raise core.DimensionError("the regression predictor is for three players")
    models = regression.load_models(args.models, args.N)
    return _distribution_report(args, regression.predict_distribution(models, args.stacks))


def cmd_asym(args) -> Report:
    if args.what == "tail":
        rep = Report(args.format, ["N", "P_1,1,N-2(321)", "N^3 P"])
        for N in args.N:
            p = exact.exact_orders_3((1, 1, N - 2), max_N=max(N, exact.DEFAULT_CAP_3)).entries[(3, 2, 1)]
            rep.row(str(N), p, N ** 3 * p)
        rep.note("limit constant", f"{asymptotics.tail_constant_three():.17g}")
        return rep
    if args.what == "decay":
        k = args.k
        rep = Report(args.format, ["N", "probability"])
        pts = []
        for N in args.N:
            stacks = (1,) * (k - 1) + (N - k + 1,)
            order = tuple(range(k, 0, -1))
            if k == 3:
                p = exact.exact_orders_3(stacks, max_N=max(N, exact.DEFAULT_CAP_3)).entries[order]
            else:
                p = jacobi.jacobi_solve_4(N, order, tol=1e-16, max_iter=4 * N * N).value(stacks)
            pts.append((N, p))
            rep.row(str(N), p)
        kappa, amp = asymptotics.decay_exponent(pts)
        rep.note("kappa", f"{kappa:.17g}")
        rep.note("amplitude", f"{amp:.17g}")
        return rep
    if args.what == "kernel":
        x1, x2, N = args.point
        rep = Report(args.format, ["y", "distance", "estimate"])
        for y in range(1, N):
            q = asymptotics.KernelQuery(x1, x2, y, N)
            rep.row(str(y), str(q.d), asymptotics.dhs_kernel_estimate(q))
        rep.note("sum", f"{asymptotics.kernel_sum(x1, x2, N):.17g}")
        return rep
    # brownian
    est = asymptotics.brownian_limit(args.stacks, args.orders.split(","), args.levels,
                                     engine=args.engine)
    rep = Report(args.format, ["N", "value"])
    for N, v in est.rows():
        rep.row(str(N), v)
    rep.note("orders", ",".join(core.order_str(s) for s in est.orders))
    rep.note("extrapolated limit", f"{est.limit:.17g}")
    return rep


def _probabilities(args) -> core.OrderDistribution:
    k = len(args.stacks)
    if args.engine == "icm":
        return core.icm_distribution(args.stacks)
    if args.engine == "exact":
        return exact.exact_orders_3(args.stacks) if k == 3 else exact.exact_orders_4(args.stacks)
    if args.engine == "interp":
        return interp.interp_distribution(_table_for(args, k, {3: 300, 4: 100}[k]), args.stacks)
    if args.engine == "regression":
        return regression.predict_distribution(regression.load_models(args.models), args.stacks)
    if args.engine == "mc":
        return montecarlo.estimate_orders(args.stacks, args.samples, seed=args.seed,
                                          threads=args.threads).as_distribution()
    raise ValueError(f"unknown engine {args.engine!r}")


def cmd_chop(args) -> Report:
    if len(args.payouts) != len(args.stacks):
        raise core.DimensionError("give one payout per remaining player")
    res = chop_mod.chop(args.stacks, args.payouts, _probabilities(args))
    rep = Report(args.format, ["player", "stack", "payout"])
    for i, (s, c) in enumerate(zip(args.stacks, res.cents), start=1):
        rep.row(str(i), str(s), f"{c / 100:.2f}")
    rep.note("engine", res.engine)
    if args.chip_proportional:
        naive = chop_mod.chip_proportional(args.stacks, args.payouts)
        rep.note("chip-proportional split (not a model)", ", ".join(f"{v:.2f}" for v in naive))
    return rep


def cmd_table_gen(args) -> Report:
    table = tables.generate_table(args.k, args.N, engine=args.engine,
                                  max_iter=args.max_iter, tol=args.tol)
    path = tables.write_table(table, tables.resolve_table_path(args.k, args.N, args.out))
    rep = Report(args.format, ["k", "N", "entries", "path"])
    rep.row(str(args.k), str(args.N), str(len(table.values)), str(path))
    rep.note("precision", table.precision)
    return rep


def _common(suppress: bool) -> argparse.ArgumentParser:
    """Global options, accepted before or after the subcommand."""
    c = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    c.add_argument("--format", choices=("text", "csv"), **({"default": "text"} | kw))
    c.add_argument("--threads", type=int, **({"default": 1} | kw))
    c.add_argument("-v", "--verbose", action="store_true", **kw)
    return c


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ruinlab", description=__doc__.splitlines()[0],
                                parents=[_common(False)])
    sub = p.add_subparsers(dest="command", required=True)
    leaf = _common(True)

    q = sub.add_parser("exact", help="exact probabilities from the absorbing chain", parents=[leaf])
    q.add_argument("--stacks", type=_live_stacks, required=True)
    q.add_argument("--rational", action="store_true", help="exact fractions (k <= 3, small N)")
    q.add_argument("--max-N", dest="max_N", type=int, default=None, help="raise the size cap")
    q.set_defaults(run=cmd_exact)

    q = sub.add_parser("jacobi", help="certified Jacobi bounds", parents=[leaf])
    q.add_argument("--stacks", type=_live_stacks, required=True)
    q.add_argument("--max-iter", type=int, default=None)
    q.add_argument("--tol", type=float, default=None)
    q.add_argument("--method", choices=("jacobi", "gauss-seidel"), default="jacobi")
    q.set_defaults(run=cmd_jacobi)

    q = sub.add_parser("icm", help="independent chip model", parents=[leaf])
    q.add_argument("--stacks", type=_stacks, required=True)
    q.add_argument("--rational", action="store_true")
    q.set_defaults(run=cmd_icm)

    q = sub.add_parser("interp", help="barycentric interpolation from a reference table", parents=[leaf])
    q.add_argument("--stacks", type=_stacks, required=True)
    q.add_argument("--table", default=None, help="table file or directory")
    q.add_argument("--N-ref", dest="N_ref", type=int, default=None)
    q.set_defaults(run=cmd_interp)

    q = sub.add_parser("mc", help="Monte Carlo estimates", parents=[leaf])
    q.add_argument("--stacks", type=_live_stacks, required=True)
    q.add_argument("--samples", type=int, default=100000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--mode", choices=montecarlo.MODES, default="consolidated")
    q.add_argument("--variant", choices=("standard",) + tuple(montecarlo.VARIANTS), default="standard")
    q.set_defaults(run=cmd_mc)

    q = sub.add_parser("regress", help="regression-corrected ICM", parents=[leaf])
    rsub = q.add_subparsers(dest="action", required=True)
    r = rsub.add_parser("fit", parents=[leaf])
    r.add_argument("--table", default=None)
    r.add_argument("--N", type=int, default=300)
    r.add_argument("--degree", type=int, default=6)
    r.add_argument("--out", default="models")
    r.set_defaults(run=cmd_regress_fit)
    r = rsub.add_parser("predict", parents=[leaf])
    r.add_argument("--stacks", type=_live_stacks, required=True)
    r.add_argument("--models", default="models")
    r.add_argument("--N", type=int, default=300, help="training N of the saved models")
    r.set_defaults(run=cmd_regress_predict)

    q = sub.add_parser("asym", help="asymptotic checks", parents=[leaf])
    asub = q.add_subparsers(dest="what", required=True)
    a = asub.add_parser("tail", help="N^3 P_{1,1,N-2}(321, parents=[leaf]) against its limit")
    a.add_argument("--N", type=_int_list, default=[50, 100, 200])
    a = asub.add_parser("decay", help="decay exponent of P_{1,..,1,N-k+1}(k..1, parents=[leaf])")
    a.add_argument("--k", type=int, choices=(3, 4), default=3)
    a.add_argument("--N", type=_int_list, default=[50, 100, 200])
    a = asub.add_parser("kernel", help="kernel estimate along the face", parents=[leaf])
    a.add_argument("--point", type=_int_list, required=True, help="x1,x2,N")
    a = asub.add_parser("brownian", help="extrapolate scaled probabilities", parents=[leaf])
    a.add_argument("--stacks", type=_live_stacks, required=True)
    a.add_argument("--orders", required=True, help="orders to sum, e.g. 312,321")
    a.add_argument("--levels", type=_int_list, required=True)
    a.add_argument("--engine", choices=("jacobi", "exact"), default="jacobi")
    q.set_defaults(run=cmd_asym)

    q = sub.add_parser("chop", help="expected-payout prize split", parents=[leaf])
    q.add_argument("--stacks", type=_live_stacks, required=True)
    q.add_argument("--payouts", type=_float_list, required=True, help="prizes, first place first")
    q.add_argument("--engine", choices=("icm", "exact", "interp", "regression", "mc"), default="icm")
    q.add_argument("--table", default=None)
    q.add_argument("--models", default="models")
    q.add_argument("--samples", type=int, default=100000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--chip-proportional", action="store_true")
    q.set_defaults(run=cmd_chop)

    q = sub.add_parser("table", help="reference tables", parents=[leaf])
    tsub = q.add_subparsers(dest="action", required=True)
    t = tsub.add_parser("gen", parents=[leaf])
    t.add_argument("--k", type=int, choices=(3, 4), required=True)
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--engine", choices=("exact", "jacobi"), default="jacobi")
    t.add_argument("--max-iter", type=int, default=None)
    t.add_argument("--tol", type=float, default=None)
    t.add_argument("--out", default=None)
    t.set_defaults(run=cmd_table_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads > 1:
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        report = args.run(args)
    except tables.TableMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except exact.CapExceeded as exc:
        print(f"error: {exc} (--max-N raises the cap)", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report.emit()
    return 0


if __name__ == "__main__":
    sys.exit(main())
