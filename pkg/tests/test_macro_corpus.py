"""User-written macro-like operatives must vanish under specialization."""
import pytest

from conftest import PROGRAMS
from harness import agree, all_outcomes, compile_src, specialize
from vauforge.analysis import census
from vauforge.backend import vm_run
from vauforge.interp import Counters

CORPUS = sorted((PROGRAMS / "macros").glob("*.krk"))


def test_corpus_size():
    assert len(CORPUS) >= 10


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_residual_has_no_operatives(path):
    _, env, res = specialize(path.read_text(), 4)
    for r in res:
        c = census(r, env)
        assert c.macro_free and c.dynamic_heads == 0, c


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_compiled_runs_without_eval(path):
    src = path.read_text()
    p = compile_src(src, 4)
    for arg in (0, 4, 12):
        c = Counters()
        vm_run(p, c, arg)
        assert c.evals == 0 and c.comp_dyn_w0_calls == 0
        assert agree(all_outcomes(src, arg))


def test_census_sees_an_unexpanded_operative():
    # the operand depends on a runtime choice of combiner, so it survives
    src = "(let (f (if0 (< main-arg 5) (vau (x) x) (lambda (x) x))) (f (+ 1 2)))"
    _, env, (r,) = specialize(src, 1)
    assert census(r, env).dynamic_heads > 0


def test_census_counts_eval():
    # code built from static pieces folds away
    _, env, (r,) = specialize("(+ main-arg (eval (array + 2 1) ((vau de () de))))", 1)
    assert census(r, env).macro_free
    # code that is only known at runtime keeps its eval
    _, env, (r,) = specialize("(eval (array + main-arg 1) ((vau de () de)))", 1)
    assert not census(r, env).macro_free
