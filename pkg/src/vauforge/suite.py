"""The five-program benchmark suite: correctness against the Python
oracles, counters and best-of-N wall time per mode."""
import csv
import io
import time
from dataclasses import dataclass
from importlib import resources

from . import backend
from .interp import COUNTER_FIELDS, Counters
from .oracles import expected
from .peval import PartialEvaluator
from .program import load_pe_prelude, load_prelude, pe_program, run_deep, run_program, run_residual
from .reader import parse, print_term


@dataclass(frozen=True)
class Benchmark:
    name: str
    size: int
    interp_size: int = None     # smaller default for the naive interpreter
    per_unit: bool = False      # time scales ~linearly with size

    def default_size(self, mode):
        if mode == "interp" and self.interp_size is not None:
            return self.interp_size
        return self.size


BENCHMARKS = {
    "fib": Benchmark("fib", 25),
    "rbtree": Benchmark("rbtree", 1000, interp_size=100, per_unit=True),
    "nqueens": Benchmark("nqueens", 7),
    "deriv": Benchmark("deriv", 8),
    "cfold": Benchmark("cfold", 10),
}


def bench_source(name):
    return resources.files("vauforge").joinpath("bench", name + ".krk").read_text("utf-8")


@dataclass
class BenchResult:
    name: str
    size: int
    mode: str
    wall_ms: float
    value: str
    counters: Counters

    FIELDS = ("name", "size", "mode", "wall_ms", "value") + COUNTER_FIELDS

    def row(self):
        return [self.name, self.size, self.mode, "%.3f" % self.wall_ms, self.value] + \
            [getattr(self.counters, f) for f in COUNTER_FIELDS]


class OracleMismatch(Exception):
    pass


def _runner(name, size, mode, engine, prelude):
    """Prepare the program once; returns run(counters) -> value."""
    forms = parse(bench_source(name), name + ".krk")
    if mode == "interp":
        env = load_prelude(prelude)
        return lambda c: run_deep(run_program, forms, c, env, size)
    env, first = load_pe_prelude(prelude)
    pe = PartialEvaluator(first_id=first)
    residuals = pe_program(forms, pe, env)
    if mode == "pe-interp":
        return lambda c: run_residual(residuals, env, c, size)
    prog = backend.compile_program(residuals, pe, env)
    return lambda c: backend.vm_run(prog, c, size, engine)


def run_benchmark(name, size, mode, repeat=3, engine="host", prelude=None, check=True):
    run = _runner(name, size, mode, engine, prelude)
    counters = Counters()
    t0 = time.perf_counter()
    value = print_term(run(counters))
    best = time.perf_counter() - t0
    if check:
        want = expected(name, size)
        if value != want:
            raise OracleMismatch("%s(%d) in %s mode gave %s, oracle says %s"
                                 % (name, size, mode, value[:200], want[:200]))
    for _ in range(repeat - 1):
        t0 = time.perf_counter()
        run(Counters())
        best = min(best, time.perf_counter() - t0)
    return BenchResult(name, size, mode, best * 1000.0, value, counters)


def bench_suite(sizes=None, modes=("interp", "compile"), names=None, repeat=3,
                engine="host", prelude=None, check=True, log=None):
    """Run every (benchmark, mode) pair sequentially.  ``sizes`` maps a
    benchmark name to a size used in every mode; otherwise each mode gets
    the benchmark's default size."""
    sizes = sizes or {}
    out = []
    for name in names or BENCHMARKS:
        b = BENCHMARKS[name]
        for mode in modes:
            n = sizes.get(name, b.default_size(mode))
            r = run_benchmark(name, n, mode, repeat, engine, prelude, check)
            if log:
                log(r)
            out.append(r)
    return out


def results_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BenchResult.FIELDS)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def speedup(interp, compiled):
    """interp/compiled wall-time ratio, per unit of size for benchmarks
    whose cost is linear in the size."""
    a, b = interp.wall_ms, compiled.wall_ms
    if interp.size != compiled.size and BENCHMARKS[interp.name].per_unit:
        a, b = a / interp.size, b / compiled.size
    return a / b if b > 0 else float("inf")


def speedup_report(results):
    by = {}
    for r in results:
        by.setdefault(r.name, {})[r.mode] = r
    lines = ["benchmark,interp_size,compile_size,ratio"]
    for name, modes in by.items():
        i, c = modes.get("interp"), modes.get("compile")
        if i is None or c is None:
            continue
        note = ""
        if i.size != c.size and not BENCHMARKS[name].per_unit:
            note = " (sizes differ)"
        lines.append("%s,%d,%d,%.1f%s" % (name, i.size, c.size, speedup(i, c), note))
    return "\n".join(lines) + "\n"
