import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import PROGRAMS
from harness import agree, interpret, pe_interpret, specialize
from progen import ProgramGen
from vauforge.analysis import census
from vauforge.driver import residual_text
from vauforge.interp import Counters
from vauforge.peval import PEBudgetExceeded
from vauforge.program import run_residual
from vauforge.progress import TOP, id_in, nfp, nfp_infinite, nfp_upper, return_ok, takes_de
from vauforge.reader import print_term
from vauforge.terms import ATT, FRESH, Arr, Comb, Env, FormKey, Prim, Sym, unval


def residual(src, arg=None):
    return residual_text(specialize(src, arg)[2]).strip()


# -- worked examples ---------------------------------------------------------

def test_constant_folds():
    assert residual("(+ 1 2)") == "3"


def test_combiner_body_specializes():
    assert residual("(vau (x) (+ 1 2 x))") == "(vau#1/0 (x) (+/0 3 x@1))"


def test_macro_like_operative_disappears():
    src = (PROGRAMS / "double.krk").read_text()
    assert residual(src) == "(vau#1/0 (x) (+/0 (+/0 3 x@1) (+/0 3 x@1)))"


def test_double_matches_hand_written_body():
    by_macro = residual((PROGRAMS / "double.krk").read_text())
    by_hand = residual("(vau (x) (+ (+ 3 x) (+ 3 x)))")
    assert by_macro == by_hand


def test_pair_and_flat_let_agree():
    a = residual("(let ((d (vau de (x) (eval (array + x x) de)))) (vau (x) (d (+ 1 2 x))))")
    b = residual("(let (d (vau de (x) (eval (array + x x) de))) (vau (x) (d (+ 1 2 x))))")
    assert a == b


def test_guard_leaves_finished_residual_alone():
    pe, env, (r,) = specialize("(vau (x) (+ 1 2 x))")
    body = r.body
    assert pe.pe(body, env) is body


def test_static_program_folds_completely():
    src = "((rec-lambda f (n) (if0 (= n 0) 1 (* n (f (- n 1))))) 5)"
    assert residual(src) == "120"


# -- recursion with unknown arguments --------------------------------------

FACT = "((rec-lambda fact (n) (if0 (= n 0) 1 (* n (fact (- n 1))))) main-arg)"
FIB = "((rec-lambda fib (n) (if0 (< n 2) n (+ (fib (- n 1)) (fib (- n 2))))) main-arg)"


@pytest.mark.parametrize("src, n, want", [(FACT, 5, 120), (FIB, 10, 55), (FACT, 0, 1), (FIB, 1, 1)])
def test_rec_lambda_terminates_and_runs(src, n, want):
    pe, env, res = specialize(src, n, step_budget=200_000)
    assert pe.stats.steps < 200_000
    assert run_residual(res, env, Counters(), n) == want


def test_recursive_residual_is_fenced():
    pe, _, _ = specialize(FIB, 3)
    assert pe.stats.loops_fenced + pe.stats.calls_residualized > 0


def test_step_budget_is_enforced():
    with pytest.raises(PEBudgetExceeded):
        specialize(FIB, 3, step_budget=50)


# -- progress sets and return safety ---------------------------------------

def test_nfp_rules():
    assert nfp(7) == frozenset()
    assert nfp(Sym("x", 7)) == {7}
    assert nfp(Sym("x")) == frozenset()
    assert nfp(Arr((Sym("f", True),), FRESH)) == {TOP}
    att = Arr((Prim("+", 0), Sym("x", 4)), ATT, needed=9)
    assert nfp(att) == {4, 9}
    real = Env(2, True, {})
    c = Comb(5, 0, None, real, ("x",), None, Sym("x", 5))
    assert nfp(c) == frozenset()


def test_nfp_upper_rules():
    real = Env(2, True, {"a": 1})
    assert nfp_upper(3) == frozenset()
    assert nfp_upper(real) == frozenset()
    fake = Env(4, False, {}, real)
    top = Env(6, True, {}, fake)
    assert nfp_upper(top) == {6, 4}


def test_nfp_infinite_rules():
    key = FormKey(Sym("n", True), Env(1, True, {}))
    att = Arr((Sym("f", 3), Arr((Prim("-", 0), 1), ATT, loop=key)), ATT)
    assert nfp_infinite(att) == {key}
    assert nfp_infinite(5) == frozenset()
    assert nfp_infinite(Comb(5, 0, None, Env(1, True, {}), (), None, 0)) == frozenset()


def test_id_in():
    assert id_in(Sym("x", 7), 7)
    assert not id_in(9, 9)
    c = Comb(7, 0, None, Env(1, True, {}), ("x",), None, Sym("x", 7))
    assert not id_in(c, 7)


def test_takes_de():
    assert not takes_de(Prim("+", 1))
    assert takes_de(Prim("vau", 0))
    assert takes_de(Sym("f", 3))
    real = Env(1, True, {})
    assert takes_de(Comb(3, 0, "de", real, (), None, 0))
    assert not takes_de(Comb(3, 0, None, real, (), None, 0))


def test_return_ok():
    assert return_ok(3, 7)
    assert not return_ok(Arr((Prim("+", 0), Sym("x", 7), 1), ATT), 7)
    assert return_ok(Arr((Prim("+", 0), Sym("x", 6), 1), ATT), 7)
    assert not return_ok(Arr((Prim("+", 0), 1), ATT, needed=7), 7)
    assert not return_ok(Arr((Sym("f", True),), FRESH), 7)


ids = st.integers(1, 6)
marks = st.one_of(st.none(), st.just(True), ids)
flat = st.one_of(st.integers(-3, 3), st.builds(Sym, st.sampled_from("xyz"), marks))
terms = st.recursive(
    flat,
    lambda k: st.builds(lambda xs, kind, need: Arr([Prim("+", 0)] + xs, kind,
                                                   need if kind == ATT else None),
                        st.lists(k, max_size=3), st.sampled_from([ATT, FRESH]), st.none() | ids),
    max_leaves=10)


@given(terms, ids)
def test_return_ok_implies_no_reference(t, i):
    # a term that may leave frame i never needs frame i
    if return_ok(t, i):
        assert i not in nfp(t)


@given(terms)
def test_top_iff_unevaluated_position(t):
    def has_unevaluated(x):
        if type(x) is Sym:
            return x.mark is True
        if type(x) is Arr:
            return x.kind == FRESH or any(has_unevaluated(y) for y in x.items)
        return False
    # FRESH calls hide their contents but are themselves unevaluated
    assert (TOP in nfp(t)) == has_unevaluated(t)


# -- soundness ---------------------------------------------------------------

@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10_000), st.sampled_from([0, 3, 11]))
def test_specialization_preserves_meaning(seed, arg):
    src = ProgramGen(seed, max_depth=4).program()
    out = {"interp": interpret(src, arg), "pe": pe_interpret(src, arg)}
    assert agree(out), (src, out)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_static_programs_fold(seed):
    # with no runtime input, the residual of a program that succeeds with
    # first-order data is already its value
    src = ProgramGen(seed, max_depth=3).program().replace("main-arg", "4")
    want = interpret(src)
    if want[0] != "ok" or want[1].startswith("<"):
        return
    _, env, res = specialize(src)
    assert print_term(res[0]) == want[1]
    assert print_term(run_residual(res, env)) == want[1]


def test_prelude_macros_leave_no_operatives():
    src = "(vau (x) (let (y (+ x 1)) (cond (< y 3) (and y true) true (or y false))))"
    _, env, (r,) = specialize(src)
    c = census(r, env)
    assert c.macro_free, c


def test_unval_of_residual_value_is_identity_for_ints():
    assert unval(7) == 7
