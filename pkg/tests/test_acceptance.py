"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a PASS/FAIL line (collected into the terminal summary
by conftest) before asserting, so a failure still reports its numbers.
"""
import time
from contextlib import contextmanager

import pytest

from conftest import ACCEPTANCE, PROGRAMS
from harness import agree, all_outcomes, compile_src, specialize
from progen import programs
from vauforge import oracles
from vauforge.analysis import census
from vauforge.backend import alloc_stats
from vauforge.driver import residual_text
from vauforge.interp import Counters
from vauforge.program import run_residual
from vauforge.suite import BENCHMARKS, run_benchmark, speedup

pytestmark = pytest.mark.slow


@contextmanager
def criterion(n, title):
    """Yields a dict the test fills with ``ok`` and ``detail``."""
    rec = {"ok": False, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield rec
    except Exception as e:
        rec["ok"] = False
        rec["detail"] = rec["detail"] or "%s: %s" % (type(e).__name__, e)
        raise
    finally:
        line = (n, bool(rec["ok"]), title, "%s; %.1fs" % (rec["detail"], time.perf_counter() - t0))
        ACCEPTANCE.append(line)
        print("criterion %d %s: %s (%s)" % (line[0], "PASS" if line[1] else "FAIL", title, line[3]))


def timed(fn, *a):
    t0 = time.perf_counter()
    v = fn(*a)
    return v, time.perf_counter() - t0


@pytest.fixture(scope="module")
def interpreted():
    """One naive-interpreter run of each benchmark at its interpreter size."""
    out = {}
    for name, b in BENCHMARKS.items():
        out[name] = run_benchmark(name, b.default_size("interp"), "interp", repeat=1)
    return out


# 1 --------------------------------------------------------------------------

GOLDENS = [
    ("add.krk", "3"),
    ("constant.krk", "(vau#1/0 (x) (+/0 3 x@1))"),
    ("double.krk", "(vau#1/0 (x) (+/0 (+/0 3 x@1) (+/0 3 x@1)))"),
]


def test_criterion_1_golden_examples():
    with criterion(1, "worked examples specialize to their goldens") as r:
        got, times = [], []
        for f, _ in GOLDENS:
            res, dt = timed(lambda: residual_text(specialize((PROGRAMS / f).read_text())[2]).strip())
            got.append(res)
            times.append(dt)
        hand = residual_text(specialize("(vau (x) (+ (+ 3 x) (+ 3 x)))")[2]).strip()
        want = [g for _, g in GOLDENS]
        r["detail"] = "max %.3fs" % max(times)
        r["ok"] = got == want and hand == want[2] and max(times) < 1.0
        assert got == want
        assert hand == want[2]
        assert max(times) < 1.0


# 2 --------------------------------------------------------------------------

def test_criterion_2_compiled_counters():
    with criterion(2, "compiled benchmarks run without eval or operative dispatch") as r:
        t0 = time.perf_counter()
        rows, bad = [], []
        for name, b in BENCHMARKS.items():
            res = run_benchmark(name, b.size, "compile", repeat=1)
            c = res.counters
            rows.append("%s w1=%d" % (name, c.comp_dyn_w1_calls))
            if c.evals or c.eval_w1_calls or c.eval_w0_calls or c.comp_dyn_w0_calls:
                bad.append(name)
            w1 = c.comp_dyn_w1_calls
            if name in ("fib", "nqueens", "cfold") and w1 != 0:
                bad.append(name)
            if name in ("rbtree", "deriv") and not 0 < w1 < 100:
                bad.append(name)
        total = time.perf_counter() - t0
        r["detail"] = ", ".join(rows)
        r["ok"] = not bad and total < 60
        assert not bad, bad
        assert total < 60


# 3 --------------------------------------------------------------------------

def test_criterion_3_interpreted_counters(interpreted):
    with criterion(3, "interpreted benchmarks show eval-heavy counters") as r:
        total = sum(x.wall_ms for x in interpreted.values()) / 1000
        bad = []
        for name, x in interpreted.items():
            c = x.counters
            if not (c.evals > 10_000 and c.eval_w0_calls > 0 and c.comp_dyn_w1_calls == 1
                    and c.comp_dyn_w0_calls == 0):
                bad.append(name)
        r["detail"] = ", ".join("%s evals=%d" % (n, x.counters.evals) for n, x in interpreted.items())
        r["detail"] += "; interpreter total %.0fs" % total
        r["ok"] = not bad and total < 600
        assert not bad, bad
        assert total < 600


# 4 --------------------------------------------------------------------------

def test_criterion_4_random_equivalence():
    with criterion(4, "500 random programs agree in all modes") as r:
        t0 = time.perf_counter()
        diverged = []
        for i, src in enumerate(programs(500, seed=0, max_depth=5)):
            out = all_outcomes(src, i % 13)
            if not agree(out):
                diverged.append((src, out))
        total = time.perf_counter() - t0
        r["detail"] = "%d divergences" % len(diverged)
        r["ok"] = not diverged and total < 300
        assert not diverged, diverged[:3]
        assert total < 300


# 5 --------------------------------------------------------------------------

def test_criterion_5_macro_elimination():
    with criterion(5, "macro-like operatives leave no operative calls or vevals") as r:
        t0 = time.perf_counter()
        corpus = sorted((PROGRAMS / "macros").glob("*.krk"))
        bad = []
        for path in corpus:
            _, env, res = specialize(path.read_text(), 1)
            if not all(census(x, env).macro_free for x in res):
                bad.append(path.stem)
        total = time.perf_counter() - t0
        r["detail"] = "%d programs, %d with residue" % (len(corpus), len(bad))
        r["ok"] = len(corpus) >= 10 and not bad and total < 30
        assert len(corpus) >= 10
        assert not bad, bad
        assert total < 30


# 6 --------------------------------------------------------------------------

def test_criterion_6_speedup(interpreted):
    with criterion(6, "compiled code beats the naive interpreter") as r:
        fib_c = run_benchmark("fib", 25, "compile", repeat=3)
        rb_c = run_benchmark("rbtree", 1000, "compile", repeat=3)
        s_fib = speedup(interpreted["fib"], fib_c)
        s_rb = speedup(interpreted["rbtree"], rb_c)
        slowest = max(interpreted["fib"].wall_ms, interpreted["rbtree"].wall_ms) / 1000
        r["detail"] = "fib %.0fx, rbtree %.0fx per insert" % (s_fib, s_rb)
        r["ok"] = s_fib >= 100 and s_rb >= 10 and slowest < 120
        assert s_fib >= 100
        assert s_rb >= 10
        assert slowest < 120


# 7 --------------------------------------------------------------------------

FACT = "((rec-lambda fact (n) (if0 (= n 0) 1 (* n (fact (- n 1))))) main-arg)"
FIB = "((rec-lambda fib (n) (if0 (< n 2) n (+ (fib (- n 1)) (fib (- n 2))))) main-arg)"


def test_criterion_7_recursive_specialization_terminates():
    with criterion(7, "rec-lambda with unknown input specializes and runs") as r:
        got = []
        for src, n in ((FACT, 5), (FIB, 10)):
            pe, env, res = specialize(src, n)
            got.append(run_residual(res, env, Counters(), n))
        r["detail"] = "fact 5=%s, fib 10=%s" % tuple(got)
        r["ok"] = got == [120, 55]
        assert got == [120, 55]


# 8 --------------------------------------------------------------------------

def test_criterion_8_tail_calls():
    with criterion(8, "compiled tail-recursive sum is a loop") as r:
        p = compile_src((PROGRAMS / "sum.krk").read_text(), 1)
        v, a = alloc_stats(p, 1_000_000)
        _, small = alloc_stats(p, 1000)
        r["detail"] = "sum=%d depth=%d closures=%d" % (v, a.max_stack_depth, a.closures_allocated)
        r["ok"] = (v == 500000500000 and a.max_stack_depth < 100
                   and a.closures_allocated == small.closures_allocated == 0)
        assert v == 500000500000
        assert a.max_stack_depth < 100
        assert a.closures_allocated == small.closures_allocated == 0


# 9 --------------------------------------------------------------------------

def test_criterion_9_oracles():
    with criterion(9, "benchmark outputs match independent oracles") as r:
        assert oracles.nqueens(6) == 4 and oracles.nqueens(7) == 40
        runs = [("nqueens", 6), ("nqueens", 7), ("rbtree", 1000), ("deriv", 8), ("cfold", 10)]
        bad = []
        for name, n in runs:
            # run_benchmark raises OracleMismatch itself; compare again explicitly
            res = run_benchmark(name, n, "compile", repeat=1, check=False)
            if res.value != oracles.expected(name, n):
                bad.append(name)
        # the interpreter is the reference semantics; check it too at small size
        for name, n in (("nqueens", 6), ("deriv", 4), ("cfold", 5)):
            if run_benchmark(name, n, "interp", repeat=1, check=False).value != oracles.expected(name, n):
                bad.append(name + "/interp")
        r["detail"] = "%d mismatches" % len(bad)
        r["ok"] = not bad
        assert not bad, bad
