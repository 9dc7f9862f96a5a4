"""Command line: ``vauforge run ...`` and ``vauforge bench ...``.

Exit codes: 0 success, 1 program error, 2 usage error.
"""
import argparse
import logging
import sys

from .driver import MODES, RunConfig, run
from .interp import EvalError
from .peval import DEFAULT_STEP_BUDGET, PEBudgetExceeded
from .reader import ParseError
from .suite import BENCHMARKS, OracleMismatch, bench_suite, results_csv, speedup_report

ENGINES = ("host", "bytecode")


def _parser():
    p = argparse.ArgumentParser(prog="vauforge")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a program")
    r.add_argument("input")
    r.add_argument("--mode", choices=MODES, default="interp")
    r.add_argument("--prelude", help="prelude file (default: $KRAKEN_PRELUDE, else bundled)")
    r.add_argument("--counters", metavar="PATH")
    r.add_argument("--dump-residual", metavar="PATH")
    r.add_argument("--emit-bytecode", metavar="PATH")
    r.add_argument("--alloc-stats", metavar="PATH")
    r.add_argument("--arg", type=int, help="integer bound to main-arg")
    r.add_argument("--time", action="store_true", help="print stage timings to stderr")
    r.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)
    r.add_argument("--engine", choices=ENGINES, default="host")
    r.add_argument("--pe-stats", action="store_true", help="print specializer statistics to stderr")

    b = sub.add_parser("bench", help="run the benchmark suite")
    b.add_argument("--suite", nargs="*", metavar="NAME",
                   help="benchmarks to run (default: all)")
    b.add_argument("--sizes", nargs="*", default=[], metavar="NAME=N")
    b.add_argument("--modes", nargs="*", default=["interp", "compile"], choices=MODES)
    b.add_argument("--out", metavar="PATH")
    b.add_argument("--repeat", type=int, default=3, help="best of N (default 3)")
    b.add_argument("--engine", choices=ENGINES, default="host")
    b.add_argument("--prelude")
    b.add_argument("--speedup", action="store_true", help="print interp/compile ratios")
    return p


def _sizes(items):
    out = {}
    for item in items:
        for part in item.split(","):
            name, sep, n = part.partition("=")
            if not sep or name not in BENCHMARKS:
                raise ValueError("bad size %r (expected NAME=N with NAME in %s)"
                                 % (part, ", ".join(BENCHMARKS)))
            out[name] = int(n)
    return out


def cmd_run(a):
    try:
        cfg = RunConfig(mode=a.mode, input=a.input, prelude=a.prelude, counters=a.counters,
                        dump_residual=a.dump_residual, emit_bytecode=a.emit_bytecode,
                        alloc_stats=a.alloc_stats, arg=a.arg, time=a.time,
                        step_budget=a.step_budget, engine=a.engine)
        res = run(cfg)
    except OSError as e:
        print("vauforge: %s" % e, file=sys.stderr)
        return 2
    except (EvalError, ParseError, PEBudgetExceeded) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    print(res.printed())
    if a.time:
        print("time " + " ".join("%s=%.3fms" % (k, v * 1000) for k, v in res.timings.items()),
              file=sys.stderr)
    if a.pe_stats and res.pe_stats is not None:
        print(res.pe_stats, file=sys.stderr)
    return 0


def cmd_bench(a):
    try:
        sizes = _sizes(a.sizes)
    except ValueError as e:
        print("vauforge: %s" % e, file=sys.stderr)
        return 2
    names = a.suite or list(BENCHMARKS)
    for n in names:
        if n not in BENCHMARKS:
            print("vauforge: unknown benchmark %r" % n, file=sys.stderr)
            return 2

    def log(r):
        print("%-8s %-9s n=%-5d %10.2f ms  evals=%d" % (r.name, r.mode, r.size, r.wall_ms,
                                                         r.counters.evals), file=sys.stderr)

    try:
        results = bench_suite(sizes, a.modes, names, a.repeat, a.engine, a.prelude, log=log)
    except (EvalError, OracleMismatch, PEBudgetExceeded) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    text = results_csv(results)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if a.speedup:
        sys.stdout.write(speedup_report(results))
    return 0


def main(argv=None):
    try:
        a = _parser().parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if a.cmd == "run":
        return cmd_run(a)
    return cmd_bench(a)


if __name__ == "__main__":
    sys.exit(main())
