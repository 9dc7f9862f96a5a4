"""Prelude loading, program entry and the deep-recursion runner."""
import logging
import os
import sys
import threading
from importlib import resources

from .interp import Counters, EvalError, Interpreter
from .prims import root_bindings
from .reader import ParseError, parse
from .terms import Arr, Env, Sym, is_value, unval

log = logging.getLogger(__name__)

ROOT_ID = 0
PRELUDE_ID = 1
# frame holding main-arg; Fake during specialization, Real at runtime
MAIN_ID = 2
MAIN_ARG = "main-arg"

RECURSION_LIMIT = 1_000_000
STACK_BYTES = 1 << 30


def prelude_source(path=None):
    """Prelude text: explicit path, else $KRAKEN_PRELUDE, else the bundled one."""
    path = path or os.environ.get("KRAKEN_PRELUDE")
    if path:
        with open(path, encoding="utf-8") as f:
            return f.read(), path
    return resources.files("vauforge").joinpath("prelude.krk").read_text("utf-8"), "prelude.krk"


def parse_definitions(source, file="prelude.krk"):
    defs = []
    for form in parse(source, file):
        if (type(form) is not Arr or len(form.items) != 2
                or type(form.items[0]) is not Sym):
            raise ParseError("prelude forms must be (NAME EXPR)")
        defs.append((form.items[0].name, form.items[1]))
    return defs


def root_env():
    return Env(ROOT_ID, True, root_bindings())


def interp_prelude_env(defs, interp=None):
    """Evaluate prelude definitions one by one with the interpreter."""
    interp = interp or Interpreter()
    root = root_env()
    bindings = {}
    env = Env(PRELUDE_ID, True, bindings, root)
    for name, expr in defs:
        v = interp.eval_data(expr, env)
        bindings = dict(bindings)
        bindings[name] = v
        env = Env(PRELUDE_ID, True, bindings, root)
    return env


_prelude_cache = {}


def load_prelude(path=None):
    """Interpreter prelude env, cached per prelude text."""
    src, file = prelude_source(path)
    env = _prelude_cache.get(src)
    if env is None:
        env = run_deep(interp_prelude_env, parse_definitions(src, file))
        _prelude_cache[src] = env
    return env


def with_main_arg(env, arg):
    if arg is None:
        return env
    return Env(env.id, True, dict(env.bindings, **{MAIN_ARG: arg}), env.parent)


def run_program(forms, counters=None, env=None, arg=None):
    """Interpret ``forms`` left to right in the prelude env; return the last value.

    The whole program counts as a single dynamic applicative entry call.
    """
    counters = counters if counters is not None else Counters()
    env = with_main_arg(env if env is not None else load_prelude(), arg)
    interp = Interpreter(counters)
    counters.comp_dyn_w1_calls += 1
    result = None
    for f in forms:
        result = interp.eval_data(f, env)
    return result


def run_deep(fn, *args, **kw):
    """Call ``fn`` on a thread with a large stack and recursion limit.

    Python recursion overflow surfaces as a stack-depth EvalError.
    """
    box = {}

    def target():
        try:
            box["value"] = fn(*args, **kw)
        except RecursionError:
            box["error"] = EvalError("stack-depth", "evaluation exceeded the recursion limit")
        except BaseException as e:
            box["error"] = e

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
    threading.stack_size(STACK_BYTES)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box["value"]


def pe_prelude_env(defs, pe):
    """Specialize prelude definitions one by one in a growing Real frame."""
    root = root_env()
    bindings = {}
    env = Env(PRELUDE_ID, True, bindings, root)
    for name, expr in defs:
        v = pe.pe(unval(expr), env)
        if not is_value(v):
            log.warning("prelude definition %s did not specialize to a value", name)
        bindings = dict(bindings)
        bindings[name] = v
        env = Env(PRELUDE_ID, True, bindings, root)
    return env


_pe_prelude_cache = {}


def load_pe_prelude(path=None):
    """(specialized prelude env, first free id), cached per prelude text.

    Later sessions must start their id counter at the returned id so they
    never reuse a prelude combiner id.
    """
    from .peval import PartialEvaluator
    src, file = prelude_source(path)
    hit = _pe_prelude_cache.get(src)
    if hit is None:
        pe = PartialEvaluator(first_id=MAIN_ID + 1)
        env = run_deep(pe_prelude_env, parse_definitions(src, file), pe)
        hit = _pe_prelude_cache[src] = (env, pe.fresh_id())
    return hit


def main_frame(prelude, arg=None, real=False):
    """The frame binding main-arg above the prelude.

    At specialization time the argument is unknown: the frame is Fake and
    main-arg is a placeholder.  At runtime it is Real with the value.
    """
    if real:
        b = {} if arg is None else {MAIN_ARG: arg}
        return Env(MAIN_ID, True, b, prelude)
    b = {} if arg is None else {MAIN_ARG: Sym(MAIN_ARG, MAIN_ID)}
    return Env(MAIN_ID, False, b, prelude)


def pe_program(forms, pe, prelude, dynamic_arg=True):
    """Specialize each top-level form; returns the residual code terms."""
    env = main_frame(prelude, 0 if dynamic_arg else None)
    return [run_deep(pe.pe, unval(f), env) for f in forms]


def run_residual(residuals, prelude, counters=None, arg=None):
    """Execute residual code with the interpreter in the Real main frame."""
    counters = counters if counters is not None else Counters()
    interp = Interpreter(counters)
    env = main_frame(prelude, arg, real=True)
    counters.comp_dyn_w1_calls += 1
    result = None
    for r in residuals:
        result = run_deep(interp.run, r, env)
    return result
