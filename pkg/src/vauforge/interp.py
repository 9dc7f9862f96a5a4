"""Reference evaluator and residual-code executor.

``eval_data`` is the base-language evaluator: it takes a term in data form
(everything value-marked) and evaluates it.  ``run`` executes code form,
which is what ``unval`` produces and what the partial evaluator emits:
suspended symbols are looked up, value-marked terms are constants, and
fresh/attempted arrays are calls.  ``eval_data(t) == run(unval(t))``, so a
single loop serves both the naive interpreter and residual programs.
"""
from dataclasses import dataclass, fields

from .prims import DATA_PRIMS, PrimError, bind_args, is_combiner, vau_parts
from .terms import ATT, FRESH, VAL, Arr, Comb, Env, Prim, Sym, has_fake, unval

COUNTER_FIELDS = ("evals", "eval_w1_calls", "eval_w0_calls",
                  "comp_dyn_w1_calls", "comp_dyn_w0_calls")


@dataclass
class Counters:
    evals: int = 0
    eval_w1_calls: int = 0
    eval_w0_calls: int = 0
    comp_dyn_w1_calls: int = 0
    comp_dyn_w0_calls: int = 0

    @staticmethod
    def header():
        return "name," + ",".join(COUNTER_FIELDS)

    def row(self, name):
        return name + "," + ",".join(str(getattr(self, f)) for f in COUNTER_FIELDS)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class EvalError(Exception):
    KINDS = ("unbound-symbol", "not-a-combiner", "arity", "type", "overflow",
             "index-out-of-bounds", "stack-depth", "user-error")

    def __init__(self, kind, message, span=None):
        super().__init__("%s: %s" % (kind, message))
        self.kind = kind
        self.message = message
        self.span = span


def _err(e):
    return EvalError(e.kind, str(e))


class Interpreter:
    """Evaluator state: counters plus the id source for new combiners.

    Combiners created at runtime get negative ids so they never collide
    with the ids the partial evaluator hands out.
    """

    def __init__(self, counters=None):
        self.counters = counters if counters is not None else Counters()
        self._next_id = -1

    def new_id(self):
        i = self._next_id
        self._next_id -= 1
        return i

    # -- entry points -------------------------------------------------------

    def eval_data(self, t, env):
        return self.run(unval(t), env)

    def lookup(self, s, env):
        m = s.mark
        if type(m) is int:
            fr = env.frame(m)
            v = (fr if fr is not None else env).find(s.name)
        else:
            v = env.find(s.name)
        if v is None:
            raise EvalError("unbound-symbol", "unbound symbol %s" % s.name)
        return v

    def _arg(self, a, env):
        """Evaluate one data-form argument."""
        ta = type(a)
        if ta is int:
            self.counters.evals += 1
            return a
        if ta is Sym and a.mark is None:
            self.counters.evals += 1
            v = env.find(a.name)
            if v is None:
                raise EvalError("unbound-symbol", "unbound symbol %s" % a.name)
            return v
        return self.run(unval(a), env)

    def _rounds(self, w, args, env):
        """Evaluate data-form arguments ``w`` times."""
        arg = self._arg
        for _ in range(w):
            args = [arg(a, env) for a in args]
        return args

    def run(self, t, env):
        counters = self.counters
        while True:
            counters.evals += 1
            tt = type(t)
            if tt is int:
                return t
            if tt is Sym:
                if t.mark is None:
                    return t
                return self.lookup(t, env)
            if tt is not Arr or t.kind == VAL:
                return materialize(t, env)
            items = t.items
            f = self.run(items[0], env)
            args = items[1:]
            tf = type(f)
            if tf is Comb or tf is Prim:
                w = f.wrap
            elif is_combiner(f):
                w = f.wrap
            else:
                raise EvalError("not-a-combiner", "cannot call %s" % _show(f))
            # a suspended call's arguments are code: run them once, then
            # apply the head's remaining evaluation rounds
            if w >= 0 and t.kind == ATT:
                run = self.run
                args = [run(a, env) for a in args]
            if w > 0:
                args = self._rounds(w, args, env)
            if tf is Comb:
                if w > 0:
                    counters.eval_w1_calls += 1
                else:
                    counters.eval_w0_calls += 1
                try:
                    b = bind_args(f, args)
                except PrimError as e:
                    raise _err(e)
                env = Env(f.id, True, b, f.static, f.de, env if f.de else None)
                t = f.body
                continue
            if tf is not Prim:
                return f.invoke(self, args, env)
            op = f.op
            # control primitives continue the loop in tail position
            if op == "if0":
                if len(args) != 3:
                    raise EvalError("arity", "if0: expected 3 arguments")
                c = self._arg(args[0], env) if w == 0 else args[0]
                if type(c) is not int:
                    raise EvalError("type", "if0: condition must be an integer")
                t = unval(args[1] if c == 0 else args[2])
                continue
            if op == "vif0":
                c = self.run(args[0], env)
                if type(c) is not int:
                    raise EvalError("type", "if0: condition must be an integer")
                t = args[1] if c == 0 else args[2]
                continue
            if op == "eval":
                t, env = self._eval_args(args, env)
                continue
            if op == "veval":
                t = args[0]
                env = self.run(args[1], env)
                if type(env) is not Env:
                    raise EvalError("type", "eval: expected environment")
                continue
            if op == "lapply":
                return self.apply(args, env)
            return self.apply_primitive(op, args, env)

    def _eval_args(self, args, env):
        if len(args) == 1:
            return unval(args[0]), env
        if len(args) != 2:
            raise EvalError("arity", "eval: expected 1 or 2 arguments")
        if type(args[1]) is not Env:
            raise EvalError("type", "eval: second argument must be an environment")
        return unval(args[0]), args[1]

    def apply(self, args, env):
        """``(lapply c args [env])``: call ``c`` on an already-evaluated
        argument array, so an applicative sees the elements as they are."""
        if len(args) not in (2, 3):
            raise EvalError("arity", "lapply: expected 2 or 3 arguments")
        c, arr = args[0], args[1]
        denv = args[2] if len(args) == 3 else env
        if type(arr) is not Arr:
            raise EvalError("type", "lapply: argument list must be an array")
        if type(denv) is not Env:
            raise EvalError("type", "lapply: expected environment")
        if not is_combiner(c):
            raise EvalError("not-a-combiner", "cannot call %s" % _show(c))
        if c.wrap > 0:
            c = c.with_wrap(c.wrap - 1)
        return self.run(Arr((c,) + arr.items, FRESH), denv)

    def apply_primitive(self, op, args, env):
        if op == "vau":
            try:
                de, params, rest, body = vau_parts(args)
            except PrimError as e:
                raise _err(e)
            return Comb(self.new_id(), 0, de, env, params, rest, unval(body))
        if op in ("eval", "if0", "vif0", "veval", "lapply"):
            return self.run(Arr((Prim(op, 0),) + tuple(args), FRESH), env)
        fn = DATA_PRIMS.get(op)
        if fn is None:
            raise EvalError("not-a-combiner", "unknown primitive %s" % op)
        try:
            return fn(args)
        except PrimError as e:
            raise _err(e)


def _show(v):
    from .reader import print_term
    return print_term(v)


def materialize(t, env, memo=None, find=None):
    """Instantiate a residual constant at runtime: fake environments (and
    combiners closing over them) are replaced by the live frame with the
    same id, found on ``env``'s chain or through ``find``."""
    if not has_fake(t):
        return t
    if memo is None:
        memo = {}
    k = id(t)
    r = memo.get(k)
    if r is not None:
        return r
    tt = type(t)
    if tt is Arr:
        r = Arr([materialize(x, env, memo, find) for x in t.items], t.kind,
                t.needed, t.loop)
    elif tt is Comb:
        r = Comb(t.id, t.wrap, t.de, materialize(t.static, env, memo, find),
                 t.params, t.rest, t.body, t.src)
    elif tt is Env:
        if not t.real:
            r = find(t.id) if find is not None else env.frame(t.id)
            if r is None:
                raise EvalError("unbound-symbol",
                                "no live frame for environment %s" % t.id)
        else:
            r = Env(t.id, True,
                    {k2: materialize(v, env, memo, find) for k2, v in t.bindings.items()},
                    None if t.parent is None else materialize(t.parent, env, memo, find),
                    t.dsym,
                    None if t.dval is None else materialize(t.dval, env, memo, find))
    else:
        r = t
    memo[k] = r
    return r
