"""Runtime support shared by the bytecode VM and the host-code engine.

Frames are plain lists ``[info, parent_frame, env_cache, slot0, slot1, ...]``
built only for scopes that are captured or reified.  ``frame_env`` turns a
frame into an Env the first time an environment value is needed, and
caches it in the frame (at most one materialization per frame).
"""
from dataclasses import dataclass

from .interp import EvalError, Interpreter, materialize
from .prims import DATA_PRIMS, PrimError, is_combiner
from .terms import FRESH, VAL, Arr, Comb, Env, Prim, has_fake, unval

FRAME_BASE = 3


class FrameInfo:
    """Static description of a scope's runtime frame."""
    __slots__ = ("id", "names", "dslot", "dsym", "const_env", "const_fake")

    def __init__(self, scope):
        self.id = scope.id
        names = list(scope.names)
        self.dslot = None
        if scope.dsym is not None and names and names[-1] == scope.dsym:
            self.dslot = len(names) - 1
            names.pop()
        self.names = tuple(names)
        self.dsym = scope.dsym
        self.const_env = scope.const_env
        self.const_fake = scope.const_env is not None and has_fake(scope.const_env)


@dataclass
class AllocStats:
    envs_materialized: int = 0
    closures_allocated: int = 0
    max_stack_depth: int = 0

    @staticmethod
    def header():
        return "name,envs_materialized,closures_allocated,max_stack_depth"

    def row(self, name):
        return "%s,%d,%d,%d" % (name, self.envs_materialized,
                                self.closures_allocated, self.max_stack_depth)


class Closure:
    """Compiled combiner value.  ``wrap`` and ``de`` are the tag bits of
    the source combiner; ``fn`` is the (eta-resolved) function."""
    __slots__ = ("fn", "parent", "wrap", "de", "rt")

    def __init__(self, fn, parent, wrap, de, rt):
        self.fn = fn
        self.parent = parent
        self.wrap = wrap
        self.de = de
        self.rt = rt

    def with_wrap(self, w):
        return Closure(self.fn, self.parent, w, self.de, self.rt)

    def invoke(self, interp, args, env):
        return self.rt.call_closure(self, list(args), env)

    def __repr__(self):
        return "<compiled %s/%d>" % (self.fn.name, self.wrap)


def _pe(e):
    return EvalError(e.kind, str(e))


class Runtime:
    """Per-run state: counters, the reference evaluator used for
    legitimate runtime eval, allocation statistics, and function entries
    (callables ``entry(parent_frame, *args)``)."""

    def __init__(self, program, counters, prelude):
        self.program = program
        self.counters = counters
        self.prelude = prelude
        self.interp = Interpreter(counters)
        self.alloc = AllocStats()
        self.entries = {}
        self.depth = [0, 0]

    # -- frames -------------------------------------------------------------

    def frame_env(self, fr):
        e = fr[2]
        if e is not None:
            return e
        info = fr[0]
        up = fr[1]
        penv = self.frame_env(up) if up is not None else None
        ce = info.const_env
        if ce is not None:
            if info.const_fake:
                parent = materialize(ce, None, find=lambda i: self.find_env(up, i))
            else:
                parent = ce
        else:
            parent = penv
        if info.id is None:
            # pseudo-scope for code evaluated in a known Real env
            e = parent
        else:
            vals = fr[FRAME_BASE:]
            b = dict(zip(info.names, vals))
            dval = vals[info.dslot] if info.dslot is not None else None
            e = Env(info.id, True, b, parent, info.dsym, dval)
            self.alloc.envs_materialized += 1
        fr[2] = e
        return e

    def find_env(self, fr, env_id):
        """Env of the nearest frame with ``env_id`` on the frame chain."""
        while fr is not None:
            if fr[0].id == env_id:
                return self.frame_env(fr)
            fr = fr[1]
        return None

    # -- calls --------------------------------------------------------------

    def call_closure(self, clo, args, denv):
        fn = clo.fn
        k = fn.nparams
        n = len(args)
        if fn.rest:
            if n < k:
                raise EvalError("arity", "combiner expects at least %d argument(s), got %d" % (k, n))
            args = list(args[:k]) + [Arr(args[k:], VAL)]
        elif n != k:
            raise EvalError("arity", "combiner expects %d argument(s), got %d" % (k, n))
        if fn.de:
            args = list(args) + [denv]
        return self.entries[fn.index](clo.parent, *args)

    def call_list(self, fn, parent, args, denv):
        clo = Closure(fn, parent, 0, fn.de, self)
        return self.call_closure(clo, args, denv)

    def wrap_of(self, f):
        tf = type(f)
        if tf is Closure or tf is Comb or tf is Prim:
            return f.wrap
        if is_combiner(f):
            return f.wrap
        raise EvalError("not-a-combiner", "cannot call %s" % _show(f))

    def dispatch(self, f, args, env_frame):
        """Call runtime combiner ``f`` on final arguments."""
        if type(f) is Closure:
            denv = self.frame_env(env_frame) if f.fn.de else None
            return self.call_closure(f, args, denv)
        env = self.frame_env(env_frame)
        if type(f) is Prim:
            fn = DATA_PRIMS.get(f.op)
            if fn is not None:
                try:
                    return fn(list(args))
                except PrimError as e:
                    raise _pe(e)
        return self.interp.run(Arr((f.with_wrap(0),) + tuple(args), FRESH), env)

    def count_dyn(self, w):
        if w > 0:
            self.counters.comp_dyn_w1_calls += 1
        else:
            self.counters.comp_dyn_w0_calls += 1

    def rounds(self, vals, n, env_frame):
        env = env_frame if type(env_frame) is Env else self.frame_env(env_frame)
        return self.interp._rounds(n, list(vals), env)

    def apply(self, f, arr, denv):
        """lapply from compiled code."""
        if type(arr) is not Arr:
            raise EvalError("type", "lapply: argument list must be an array")
        if type(denv) is not Env:
            raise EvalError("type", "lapply: expected environment")
        w = self.wrap_of(f)
        self.count_dyn(w)
        if w > 0:
            f = f.with_wrap(w - 1)
            w -= 1
        args = list(arr.items)
        if w > 0:
            args = self.interp._rounds(w, args, denv)
        if type(f) is Closure:
            return self.call_closure(f, args, denv)
        if type(f) is Prim:
            fn = DATA_PRIMS.get(f.op)
            if fn is not None:
                try:
                    return fn(args)
                except PrimError as e:
                    raise _pe(e)
        return self.interp.run(Arr((f.with_wrap(0),) + tuple(args), FRESH), denv)

    # -- evaluator escapes --------------------------------------------------

    def run_code(self, term, env):
        if type(env) is not Env:
            raise EvalError("type", "eval: expected environment")
        return self.interp.run(term, env)

    def eval_value(self, x, env):
        if type(env) is not Env:
            raise EvalError("type", "eval: second argument must be an environment")
        return self.interp.run(unval(x), env)

    def materialize(self, term, fr):
        return materialize(term, None, find=lambda i: self.find_env(fr, i))


def _show(v):
    from .reader import print_term
    return print_term(v)


# -- primitive helpers used by both engines -------------------------------

def prim_call(op, args):
    try:
        return DATA_PRIMS[op](args)
    except PrimError as e:
        raise _pe(e)


def cond_value(c):
    if type(c) is not int:
        raise EvalError("type", "if0: condition must be an integer")
    return c


def trap(kind, message):
    raise EvalError(kind, message)
