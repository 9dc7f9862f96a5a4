#!/usr/bin/env python3
"""Run the benchmark suite at default sizes and write results.

    python3 scripts/run_bench.py --out results.csv
    python3 scripts/run_bench.py --quick      # small sizes, one repetition
"""
import argparse
import sys

from vauforge.suite import BENCHMARKS, bench_suite, results_csv, speedup_report

QUICK = {"fib": 15, "rbtree": 30, "nqueens": 5, "deriv": 4, "cfold": 5}


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="bench_results.csv")
    p.add_argument("--modes", nargs="*", default=["interp", "pe-interp", "compile"])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--engine", default="host")
    p.add_argument("--quick", action="store_true")
    a = p.parse_args()

    sizes = QUICK if a.quick else None
    repeat = 1 if a.quick else a.repeat

    def log(r):
        print("%-8s %-9s n=%-5d %10.2f ms" % (r.name, r.mode, r.size, r.wall_ms), file=sys.stderr)

    results = bench_suite(sizes, a.modes, list(BENCHMARKS), repeat, a.engine, log=log)
    with open(a.out, "w", encoding="utf-8") as f:
        f.write(results_csv(results))
    sys.stdout.write(speedup_report(results))
    print("wrote %s" % a.out, file=sys.stderr)


if __name__ == "__main__":
    main()
