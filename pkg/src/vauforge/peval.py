"""Online partial evaluator over marked terms.

Conventions for residual code (shared with the interpreter and backend):

* A fresh call's arguments are data.  A suspended (attempted) call's
  arguments are code: they are partially evaluated once more whenever the
  call is revisited, then evaluated ``head.wrap`` further rounds.  Data is
  valid code for itself, so a call whose head could not be resolved keeps
  its original data arguments.
* ``veval`` and ``vif0`` (wrap level -1) receive raw code and handle their
  own arguments.

The environment stack holds only real frames, keyed by id; the innermost
frame for an id wins.
"""
import logging
from dataclasses import dataclass, field

from .prims import DATA_PRIMS, PrimError, bind_args, vau_parts
from .progress import TOP, nfp, nfp_infinite, return_ok, takes_de
from .terms import (ATT, FRESH, VAL, Arr, Comb, Env, FormKey, Prim, Sym,
                    check_int, is_value, unval)

log = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 50_000_000

# primitives folded only when every argument is fully static
_STATIC_ONLY = frozenset(("=", "<=", "<", "+", "-", "*", "int-to-symbol"))
_TYPE_TESTS = frozenset(("array?", "int?", "symbol?", "env?", "combiner?"))


class PEBudgetExceeded(Exception):
    pass


@dataclass
class PEStats:
    steps: int = 0
    calls_inlined: int = 0
    calls_residualized: int = 0
    loops_fenced: int = 0
    vevals_dropped: int = 0
    bodies_unspecialized: int = 0
    warnings: list = field(default_factory=list)


class PartialEvaluator:
    """One specialization session: id source, stacks and statistics."""

    def __init__(self, step_budget=DEFAULT_STEP_BUDGET, first_id=3):
        self.step_budget = step_budget
        self.stats = PEStats()
        self._next_id = first_id
        self._ids = {}
        self.es = {}
        self.fs = {}
        self._fences = []

    # -- session state ------------------------------------------------------

    def gen_id(self, key):
        """Combiner ids are memoized on (vau arguments, defining env) so
        re-specializing a body reproduces structurally identical combiners."""
        i = self._ids.get(key)
        if i is None:
            i = self._ids[key] = self._next_id
            self._next_id += 1
        return i

    def fresh_id(self):
        i = self._next_id
        self._next_id += 1
        return i

    def _push_env(self, e):
        self.es.setdefault(e.id, []).append(e)

    def _pop_env(self, e):
        st = self.es[e.id]
        st.pop()
        if not st:
            del self.es[e.id]

    def _real(self, i):
        st = self.es.get(i)
        return st[-1] if st else None

    def _push_form(self, k):
        self.fs[k] = self.fs.get(k, 0) + 1

    def _pop_form(self, k):
        n = self.fs[k] - 1
        if n:
            self.fs[k] = n
        else:
            del self.fs[k]

    def warn(self, msg):
        self.stats.warnings.append(msg)
        log.debug("pe warning: %s", msg)

    # -- guard --------------------------------------------------------------

    def progress(self, x):
        n = nfp(x)
        if TOP in n:
            return True
        es = self.es
        for i in n:
            if i in es:
                return True
        inf = nfp_infinite(x)
        if inf:
            fs = self.fs
            for k in inf:
                if k not in fs:
                    return True
        return False

    # -- main entry ---------------------------------------------------------

    def pe(self, x, env):
        st = self.stats
        st.steps += 1
        if st.steps > self.step_budget:
            raise PEBudgetExceeded("partial evaluation exceeded %d steps" % self.step_budget)
        tt = type(x)
        if tt is int or tt is Prim:
            return x
        if not self.progress(x):
            return x
        if tt is Sym:
            return self.lookup(x, env)
        if tt is Env:
            return self.pe_env(x, env)
        if tt is Comb:
            return self.pe_comb(x, env)
        if x.kind == VAL:
            items = [self.pe(a, env) for a in x.items]
            if all(a is b for a, b in zip(items, x.items)):
                return x
            return Arr(items, VAL)
        return self.pe_call(x, env)

    def lookup(self, s, env):
        m = s.mark
        if type(m) is int:
            # the lexical chain is authoritative; the stack only serves
            # marks from frames that are not on it
            fr = env.frame(m)
            if fr is None:
                fr = self._real(m)
            if fr is None:
                return s
        else:
            fr = env
        v = fr.find(s.name)
        if v is None:
            # unbound: leave a suspended lookup so the error happens at runtime
            self.warn("unbound symbol %s" % s.name)
            return Sym(s.name, True) if m is None else s
        return v

    def pe_env(self, e, env):
        if e.real:
            return e
        r = env.frame(e.id)
        if r is None or not r.real:
            r = self._real(e.id) or r
        return r if r is not None else e

    def pe_comb(self, c, env):
        st = c.static
        if st.real:
            return c
        ns = self.pe_env(st, env)
        if ns is st:
            return c
        return self.pe_body(c, ns)

    def pe_body(self, c, static, live=()):
        """Specialize the source body of ``c`` against a fake frame.

        ``live`` names fake frames that will exist wherever the result runs
        (the backend passes its enclosing scopes)."""
        fid = c.id
        b = {p: Sym(p, fid) for p in c.params}
        if c.rest is not None:
            b[c.rest] = Sym(c.rest, fid)
        fake = Env(fid, False, b, static, c.de,
                   Sym(c.de, fid) if c.de is not None else None)
        body = self.pe(c.src, fake)
        # a residual body may only mention frames in its own scope; values
        # closed over some other in-flight fake frame keep the source body
        for i in nfp(body):
            if i is not TOP and fake.frame(i) is None and i not in live:
                self.stats.bodies_unspecialized += 1
                body = c.src
                break
        return Comb(fid, c.wrap, c.de, static, c.params, c.rest, body, c.src)

    # -- calls --------------------------------------------------------------

    def pe_call(self, form, env):
        items = form.items
        c = self.pe(items[0], env)
        args = items[1:]
        tc = type(c)
        if tc is Prim or tc is Comb:
            w = c.wrap
        else:
            if is_value(c):
                self.warn("call of non-combiner %r" % (c,))
            # suspended head (or a value that is not a combiner, which
            # fails at runtime): keep the arguments exactly as they were
            return Arr((c,) + args, ATT)
        if w < 0:
            return self.drop_rv(self.pe_prim(c, list(args), env), env)
        if form.kind == ATT:
            args = [self.pe(a, env) for a in args]
            if not all(is_value(a) for a in args):
                return self._stuck(c, args)
        while w > 0:
            args = [self.pe(unval(a), env) for a in args]
            w -= 1
            if not all(is_value(a) for a in args):
                return self._stuck(c.with_wrap(w), args)
        if tc is Prim:
            return self.drop_rv(self.pe_prim(c.with_wrap(0), args, env), env)
        return self.pe_apply(c.with_wrap(0), args, env)

    def _stuck(self, c, args):
        self.stats.calls_residualized += 1
        if type(c) is Prim and c.op in ("+", "*"):
            args = _fold_ints(c.op, args)
        return Arr((c,) + tuple(args), ATT)

    def pe_apply(self, c, args, env):
        """Specialize a call of derived combiner ``c`` (wrap 0) on values."""
        try:
            b = bind_args(c, args)
        except PrimError as e:
            self.warn(str(e))
            return Arr((c,) + tuple(args), ATT)
        if self._fences:
            self.stats.loops_fenced += 1
            return Arr((c,) + tuple(args), ATT, loop=self._fences[-1])
        inner = Env(c.id, True, b, c.static, c.de, env if c.de is not None else None)
        # calls re-specialize the source body: the stored residual may hold
        # closures built while this frame was still fake
        key = FormKey(c.src, inner)
        if key in self.fs:
            self.stats.loops_fenced += 1
            return Arr((c,) + tuple(args), ATT, loop=key)
        self._push_env(inner)
        self._push_form(key)
        try:
            result = self.pe(c.src, inner)
        finally:
            self._pop_form(key)
            self._pop_env(inner)
        if return_ok(result, c.id):
            self.stats.calls_inlined += 1
            return self.drop_rv(result, env)
        self.stats.calls_residualized += 1
        return Arr((c,) + tuple(args), ATT,
                   needed=env.id if c.de is not None else None)

    # -- dropRV -------------------------------------------------------------

    def drop_rv(self, z, env):
        if type(z) is not Arr or z.kind != ATT:
            return z
        head = z.items[0]
        th = type(head)
        if th is Prim and head.op == "veval":
            e = z.items[2]
            if type(e) is Env and e.id == env.id:
                self.stats.vevals_dropped += 1
                return self.drop_rv(z.items[1], env)
            return z
        if (th is Prim and head.wrap >= 0) or (th is Comb and head.static.real):
            args = z.items[1:]
            new = [self.drop_rv(a, env) for a in args]
            if any(a is not b for a, b in zip(new, args)):
                return self.pe_call(Arr((head,) + tuple(new), ATT), env)
        return z

    # -- primitives ---------------------------------------------------------

    def pe_prim(self, c, args, env):
        op = c.op
        if op == "vau":
            return self.prim_vau(c, args, env)
        if op == "if0":
            return self.prim_if0(c, args, env)
        if op == "vif0":
            return self.prim_vif0(c, args, env)
        if op == "eval":
            return self.prim_eval(c, args, env)
        if op == "veval":
            return self.prim_veval(c, args, env)
        if op == "lapply":
            return self.prim_lapply(c, args, env)
        return self.prim_data(c, args)

    def _residual(self, c, args, why=None):
        if why:
            self.warn(why)
        self.stats.calls_residualized += 1
        return Arr((c,) + tuple(args), ATT)

    def prim_vau(self, c, args, env):
        try:
            de, params, rest, body = vau_parts(args)
        except PrimError as e:
            return self._residual(c, args, str(e))
        i = self.gen_id((de, params, rest, FormKey(body, env)))
        src = unval(body)
        comb = Comb(i, 0, de, env, params, rest, src, src)
        return self.pe_body(comb, env)

    def prim_if0(self, c, args, env):
        if len(args) != 3:
            return self._residual(c, args, "if0: expected 3 arguments")
        vc, vt, ve = args
        key = FormKey(Arr((c,) + tuple(args)), None)
        cond = self.pe(unval(vc), env)
        if type(cond) is int:
            return self.pe(unval(vt if cond == 0 else ve), env)
        if is_value(cond):
            self.warn("if0: non-integer condition")
        if key in self.fs:
            t, e = unval(vt), unval(ve)
        else:
            self._push_form(key)
            try:
                t = self.pe(unval(vt), env)
                e = self.pe(unval(ve), env)
            finally:
                self._pop_form(key)
        self.stats.calls_residualized += 1
        return Arr((Prim("vif0", -1), cond, t, e), ATT)

    def prim_vif0(self, c, args, env):
        if len(args) != 3:
            return self._residual(c, args, "vif0: expected 3 arguments")
        vc, vt, ve = args
        cond = self.pe(vc, env)
        if type(cond) is int:
            return self.pe(vt if cond == 0 else ve, env)
        # same fence as if0: a dynamic branch nested in itself stays as is
        key = FormKey(Arr((c,) + tuple(args)), None)
        fenced = key in self.fs
        if fenced:
            # revisiting a dynamic branch from inside itself: refresh the
            # branches but leave every derived call suspended on this form
            self._fences.append(key)
        else:
            self._push_form(key)
        try:
            t = self.pe(vt, env)
            e = self.pe(ve, env)
        finally:
            if fenced:
                self._fences.pop()
            else:
                self._pop_form(key)
        if cond is vc and t is vt and e is ve:
            return Arr((c, vc, vt, ve), ATT)
        return Arr((c, cond, t, e), ATT)

    def prim_eval(self, c, args, env):
        if len(args) == 1:
            target = env
        elif len(args) == 2:
            target = args[1]
        else:
            return self._residual(c, args, "eval: expected 1 or 2 arguments")
        if type(target) is not Env:
            return self._residual(c, args, "eval: second argument is not an environment")
        return self.veval(unval(args[0]), target, env)

    def prim_veval(self, c, args, env):
        code, e = args
        e2 = self.pe(e, env)
        if type(e2) is not Env:
            if e2 is e:
                return Arr((c, code, e), ATT)
            return Arr((c, code, e2), ATT)
        return self.veval(code, e2, env)

    def veval(self, code, target, env):
        pushed = target.real
        if pushed:
            self._push_env(target)
        try:
            v = self.pe(code, target)
        finally:
            if pushed:
                self._pop_env(target)
        if return_ok(v, target.id):
            return self.drop_rv(v, env)
        return Arr((Prim("veval", -1), v, target), ATT)

    def prim_lapply(self, c, args, env):
        if len(args) not in (2, 3):
            return self._residual(c, args, "lapply: expected 2 or 3 arguments")
        f, arr = args[0], args[1]
        denv = args[2] if len(args) == 3 else env
        if (type(arr) is not Arr or type(denv) is not Env
                or type(f) not in (Prim, Comb)):
            return self._residual(c, args)
        if takes_de(f) and denv.id != env.id:
            return self._residual(c, args)
        g = f.with_wrap(f.wrap - 1) if f.wrap > 0 else f
        return self.pe_call(Arr((g,) + arr.items, FRESH), env)

    def prim_data(self, c, args):
        op = c.op
        fn = DATA_PRIMS.get(op)
        if fn is None:
            return self._residual(c, args, "unknown primitive %s" % op)
        if op == "error":
            return self._residual(c, args)
        if op in _STATIC_ONLY or op in ("=",):
            if any(nfp(a) for a in args):
                return self._residual(c, args)
        if op in ("len", "idx", "concat") and any(
                type(a) is Arr and a.kind != VAL for a in args):
            return self._residual(c, args)
        try:
            return fn(args)
        except PrimError as e:
            return self._residual(c, args, "%s (deferred to runtime)" % e)


def _fold_ints(op, args):
    """Combine the integer arguments of + or * into one leading constant."""
    ints = [a for a in args if type(a) is int]
    if len(ints) < 2:
        return args
    acc = 0 if op == "+" else 1
    for n in ints:
        acc = acc + n if op == "+" else acc * n
    try:
        check_int(acc)
    except OverflowError:
        return args
    out = []
    placed = False
    for a in args:
        if type(a) is int:
            if not placed:
                out.append(acc)
                placed = True
        else:
            out.append(a)
    return out
