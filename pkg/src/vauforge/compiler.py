"""Closure conversion of residual code into a function table (IR).

Resolution follows the residual-code convention of the interpreter:
marked symbols find their frame on the lexical chain, value-marked terms
are constants, fresh/attempted arrays are calls.  What cannot be decided
statically becomes a runtime check or a call into the reference evaluator.
"""
import logging
from dataclasses import dataclass

from . import ir
from .prims import DATA_PRIMS, PrimError, vau_parts
from .program import MAIN_ARG, MAIN_ID
from .terms import ATT, FRESH, VAL, Arr, Comb, Env, FormKey, Prim, Sym, has_fake, unval

log = logging.getLogger(__name__)

MAX_INLINE_DEPTH = 24


class CompileError(Exception):
    pass


@dataclass
class CompileStats:
    functions: int = 0
    respecialized: int = 0
    eta_converted: int = 0
    inlined: int = 0
    dynamic_sites: int = 0
    fallbacks: int = 0


class CompiledProgram:
    """Function table plus entry.  ``constants`` is filled by the bytecode
    emitter; engines are built from it on demand."""

    def __init__(self, functions, entry, stats, arg_names):
        self.functions = functions
        self.entry = entry
        self.stats = stats
        self.arg_names = arg_names
        self.constants = None
        self.code = None

    def live_functions(self):
        return [f for f in self.functions if f.alias is None]


class Compiler:
    def __init__(self, pe, inline=True, eta=True, respecialize=True):
        self.pe = pe
        self.functions = []
        self.memo = {}
        self.stats = CompileStats()
        self.inline = inline
        self.eta = eta
        self.respecialize = respecialize
        self._uid = 0
        self._sites = 0
        self._inlining = []

    # -- program ------------------------------------------------------------

    def compile_program(self, residuals, prelude, with_arg=True):
        names = (MAIN_ARG,) if with_arg else ()
        fn = self._new_function("main", MAIN_ID, len(names), False, False, 1)
        scope = self._scope(MAIN_ID, names, None, fn, None, prelude)
        fn.scope = scope
        body = [self.code(r, scope, 0) for r in residuals]
        fn.body = body[0] if len(body) == 1 else ir.Seq(body)
        fn.compiled = True
        mark_tail(fn)
        return CompiledProgram(self.functions, fn, self.stats, names)

    def _new_function(self, name, comb_id, nparams, rest, de, wrap):
        fn = ir.Function(len(self.functions), name, comb_id, nparams, rest, de, wrap)
        self.functions.append(fn)
        self.stats.functions += 1
        return fn

    def _scope(self, env_id, names, dsym, fn, parent, const_env):
        self._uid += 1
        return ir.Scope(self._uid, env_id, names, dsym, fn, parent, const_env)

    def _site(self):
        self._sites += 1
        self.stats.dynamic_sites += 1
        return self._sites

    # -- scopes and lookup --------------------------------------------------

    @staticmethod
    def find_scope(env_id, scope):
        s = scope
        while s is not None:
            if s.id == env_id and s.names is not None:
                return s
            s = s.parent
        return None

    def static_link(self, env, scope):
        """(const_env, parent scope) for a combiner whose static env is
        ``env``.  The parent is the innermost live scope the environment
        refers to (through its chain or through closures bound in it), None
        when it refers to none, or False when a referenced frame has no
        live scope."""
        const = env if env.real else None
        ids = fake_ids(env)
        if not ids:
            return const, None
        s = scope
        while s is not None and s.id not in ids:
            s = s.parent
        if s is None:
            return const, False
        seen = set()
        c = s
        while c is not None:
            seen.add(c.id)
            c = c.parent
        if not ids <= seen:
            return const, False
        return const, s

    def _lookup_from(self, name, s, e):
        """Search from scope ``s`` (or from Real env ``e`` inside its const
        chain).  Returns an IR node, a ('v', value) pair, or None."""
        first = e is None
        while s is not None:
            if first:
                i = s.slot(name)
                if i is not None:
                    return ir.Var(s, i)
                e = s.const_env
            while e is not None and e.real:
                v = e.bindings.get(name)
                if v is not None:
                    return ("v", v)
                if e.dsym == name and e.dval is not None:
                    return ("v", e.dval)
                e = e.parent
            s = s.parent
            first = True
        return None

    def _locate(self, env_id, scope):
        s = scope
        while s is not None:
            if s.id == env_id:
                return s, None
            e = s.const_env
            while e is not None and e.real:
                if e.id == env_id:
                    return s, e
                e = e.parent
            s = s.parent
        return None

    def resolve(self, sym, scope):
        m = sym.mark
        r = None
        if type(m) is int:
            pos = self._locate(m, scope)
            if pos is not None:
                r = self._lookup_from(sym.name, pos[0], pos[1])
        if r is None:
            r = self._lookup_from(sym.name, scope, None)
        return r

    # -- code ---------------------------------------------------------------

    def code(self, t, scope, depth):
        tt = type(t)
        if tt is int:
            return ir.Const(t)
        if tt is Sym:
            if t.mark is None:
                return ir.Const(t)
            r = self.resolve(t, scope)
            if r is None:
                return ir.Trap("unbound-symbol", "unbound symbol %s" % t.name)
            if type(r) is tuple:
                return self.value(r[1], scope)
            return r
        if tt is Arr and t.kind != VAL:
            return self.call(t, scope, depth)
        return self.value(t, scope)

    def value(self, v, scope):
        tv = type(v)
        if tv is Comb:
            n = self.closure(v, scope)
            if n is not None:
                return n
        elif not has_fake(v):
            return ir.Const(v)
        elif tv is Env and not v.real:
            s = self.find_scope(v.id, scope)
            if s is not None:
                return self.make_env(s)
        return self.materialize(v, scope)

    def materialize(self, v, scope):
        if not has_fake(v):
            return ir.Const(v)
        self.stats.fallbacks += 1
        return ir.Materialize(v, self.frame_ref(scope))

    def make_env(self, s):
        box(s)
        return ir.MakeEnv(s)

    def frame_ref(self, s):
        box(s)
        return ir.FrameRef(s)

    def closure(self, c, scope):
        const, parent = self.static_link(c.static, scope)
        if parent is False:
            return None
        fn = self.function_for(c, const, parent)
        return ir.MakeClosure(fn, None if parent is None else self.frame_ref(parent), c.wrap)

    # -- functions ----------------------------------------------------------

    def function_for(self, c, const, parent):
        key = ("F", None if parent is None else parent.uid, c.id, c.de, c.params,
               c.rest, FormKey(c.src, c.static))
        fn = self.memo.get(key)
        if fn is not None:
            return fn
        fn = self._new_function("comb%s" % c.id, c.id, len(c.params),
                                c.rest is not None, c.de is not None, c.wrap)
        # memoize before specializing the body: self references found while
        # compiling it resolve to this index (Y elimination)
        self.memo[key] = fn
        names = c.params + ((c.rest,) if c.rest else ()) + ((c.de,) if c.de else ())
        scope = self._scope(c.id, names, c.de, fn, parent, const)
        fn.scope = scope
        fn.has_parent = parent is not None
        body = c.body
        if self.respecialize:
            self.stats.respecialized += 1
            body = self.pe.pe_body(c, c.static, live_ids(parent)).body
            target = self.eta_target(c, body, scope) if self.eta else None
            if target is not None:
                self.stats.eta_converted += 1
                fn.alias = target
                return fn
        fn.body = self.code(body, scope, 0)
        fn.compiled = True
        mark_tail(fn)
        return fn

    def eta_target(self, c, body, scope):
        """``(lapply C y [de])`` where y is the only (rest) parameter and C a
        constant applicative of wrap 1: calls of c are calls of C."""
        if c.params or c.rest is None:
            return None
        if type(body) is not Arr or body.kind != ATT:
            return None
        it = body.items
        h = it[0]
        if type(h) is not Prim or h.op != "lapply" or h.wrap != 0 or len(it) not in (3, 4):
            return None
        f, y = it[1], it[2]
        if type(f) is not Comb or f.wrap != 1:
            return None
        if type(y) is not Sym or y.mark != c.id or y.name != c.rest:
            return None
        if f.de is not None:
            if len(it) != 4:
                return None
            d = it[3]
            if type(d) is not Sym or d.mark != c.id or d.name != c.de:
                return None
        const, parent = self.static_link(f.static, scope)
        if parent is False or (parent is not None and parent is not scope.parent):
            return None
        return self.function_for(f, const, parent)

    # -- calls --------------------------------------------------------------

    def call(self, t, scope, depth):
        items = t.items
        h = items[0]
        args = list(items[1:])
        f = self.static_head(h, scope)
        if f is None:
            return self.dyn_call(t, scope, depth)
        w = f.wrap
        if type(f) is Prim and w < 0:
            return self.internal(f, args, scope, depth)
        if t.kind == FRESH:
            if w == 0:
                nodes = [self.value(a, scope) for a in args]
            else:
                nodes = [self.code(unval(a), scope, depth) for a in args]
                w -= 1
        else:
            nodes = [self.code(a, scope, depth) for a in args]
        # further evaluation rounds over constants happen now; over runtime
        # values they need the evaluator
        while w > 0 and all(type(n) is ir.Const for n in nodes):
            nodes = [self.code(unval(n.value), scope, depth) for n in nodes]
            w -= 1
        if w > 0:
            self.stats.fallbacks += 1
            return self.apply_rounds(f, nodes, w, scope, depth)
        if type(f) is Prim:
            return self.prim(f, nodes, t, scope, depth)
        return self.comb_call(f, nodes, scope, depth)

    def static_head(self, h, scope):
        th = type(h)
        if th is Prim or th is Comb:
            return h
        if th is Sym and h.mark is not None:
            r = self.resolve(h, scope)
            if type(r) is tuple and type(r[1]) in (Prim, Comb):
                return r[1]
        return None

    def apply_rounds(self, f, nodes, w, scope, depth):
        env = self.make_env(scope)
        lst = ir.Rounds(nodes, w, env)
        if type(f) is Prim:
            return ir.Apply(self._site(), [ir.Const(f.with_wrap(0)), lst], env)
        const, parent = self.static_link(f.static, scope)
        if parent is False:
            return ir.Apply(self._site(), [self.materialize(f.with_wrap(0), scope), lst], env)
        fn = self.function_for(f, const, parent)
        pref = None if parent is None else self.frame_ref(parent)
        return ir.CallWith(fn, pref, lst, env if f.de is not None else None)

    def comb_call(self, f, nodes, scope, depth):
        const, parent = self.static_link(f.static, scope)
        if parent is False:
            head = self.materialize(f.with_wrap(0), scope)
            return ir.Apply(self._site(), [head, ir.PrimOp("array", nodes)], self.make_env(scope))
        n = len(nodes)
        ok = n == len(f.params) or (f.rest is not None and n >= len(f.params))
        if (self.inline and ok and const is None and parent is not None
                and parent.fn is scope.fn and depth < MAX_INLINE_DEPTH
                and f.id not in self._inlining):
            return self.inline_call(f, nodes, const, parent, scope, depth)
        fn = self.function_for(f, const, parent)
        pref = None if parent is None else self.frame_ref(parent)
        return ir.Call(fn, pref, nodes, self.make_env(scope) if f.de is not None else None)

    def inline_call(self, f, nodes, const, parent, scope, depth):
        self.stats.inlined += 1
        k = len(f.params)
        args = nodes[:k]
        names = f.params
        if f.rest is not None:
            args.append(ir.PrimOp("array", nodes[k:]))
            names = names + (f.rest,)
        if f.de is not None:
            args.append(self.make_env(scope))
            names = names + (f.de,)
        s = self._scope(f.id, names, f.de, scope.fn, parent, const)
        body = f.body
        if self.respecialize:
            body = self.pe.pe_body(f, f.static, live_ids(parent)).body
        self._inlining.append(f.id)
        try:
            body = self.code(body, s, depth + 1)
        finally:
            self._inlining.pop()
        return ir.Inline(s, args, body)

    def dyn_call(self, t, scope, depth):
        items = t.items
        head = self.code(items[0], scope, depth)
        args = items[1:]
        site = self._site()
        env = self.frame_ref(scope)
        if t.kind == ATT and not all(is_const_code(a) for a in args):
            # genuine code operands: evaluated once, further rounds at runtime
            vals = [self.code(a, scope, depth) for a in args]
            return ir.DynCall(site, head, vals, None, env)
        data = [self.value(a, scope) for a in args]
        code = [self.code(unval(a), scope, depth) for a in args]
        return ir.DynCall(site, head, data, code, env)

    # -- primitives ---------------------------------------------------------

    def internal(self, f, args, scope, depth):
        op = f.op
        if op == "vif0" and len(args) == 3:
            return ir.If(self.code(args[0], scope, depth),
                         self.code(args[1], scope, depth),
                         self.code(args[2], scope, depth))
        if op == "veval" and len(args) == 2:
            code, e = args
            s = self.env_scope(e, scope)
            if s is not None:
                return self.code(code, s, depth)
            return ir.Interp(code, self.code(e, scope, depth))
        return self.fallback(Arr((f,) + tuple(args), ATT), scope)

    def env_scope(self, e, scope):
        """Scope to compile code evaluated in the statically known env ``e``."""
        if type(e) is not Env:
            return None
        if not e.real:
            return self.find_scope(e.id, scope)
        const, parent = self.static_link(e, scope)
        if parent is False:
            return None
        return self._scope(None, (), None, scope.fn, parent, const)

    def fallback(self, t, scope):
        self.stats.fallbacks += 1
        return ir.Interp(t, self.make_env(scope))

    def prim(self, f, nodes, t, scope, depth):
        op = f.op
        if op in DATA_PRIMS:
            return ir.PrimOp(op, nodes)
        if op == "if0":
            if len(nodes) == 3 and all(type(n) is ir.Const for n in nodes):
                c, a, b = (unval(n.value) for n in nodes)
                return ir.If(self.code(c, scope, depth),
                             self.code(a, scope, depth), self.code(b, scope, depth))
            return self.fallback(t, scope)
        if op == "eval":
            if len(nodes) in (1, 2) and type(nodes[0]) is ir.Const:
                if len(nodes) == 1:
                    s = scope
                else:
                    s = self._env_node_scope(nodes[1], scope)
                if s is not None:
                    return self.code(unval(nodes[0].value), s, depth)
            env = nodes[1] if len(nodes) == 2 else self.make_env(scope)
            if len(nodes) not in (1, 2):
                return ir.Trap("arity", "eval: expected 1 or 2 arguments")
            return ir.RuntimeEval(nodes[0], env)
        if op == "vau":
            if all(type(n) is ir.Const for n in nodes):
                try:
                    de, params, rest, body = vau_parts([n.value for n in nodes])
                except PrimError as e:
                    return ir.Trap(e.kind, str(e))
                return self.runtime_vau(de, params, rest, unval(body), scope)
            return self.fallback(t, scope)
        if op == "lapply":
            if len(nodes) not in (2, 3):
                return ir.Trap("arity", "lapply: expected 2 or 3 arguments")
            env = nodes[2] if len(nodes) == 3 else self.make_env(scope)
            return ir.Apply(self._site(), nodes[:2], env)
        return self.fallback(t, scope)

    def _env_node_scope(self, n, scope):
        if type(n) is ir.MakeEnv:
            return n.scope
        if type(n) is ir.Const and type(n.value) is Env:
            return self.env_scope(n.value, scope)
        return None

    def runtime_vau(self, de, params, rest, body, scope):
        """A vau evaluated by compiled code: a closure over the current
        frame whose body is the (unspecialized) source."""
        self._uid += 1
        cid = -self._uid
        fn = self._new_function("vau%d" % self._uid, cid, len(params),
                                rest is not None, de is not None, 0)
        names = params + ((rest,) if rest else ()) + ((de,) if de else ())
        s = self._scope(cid, names, de, fn, scope, None)
        fn.scope = s
        fn.has_parent = True
        fn.body = self.code(body, s, 0)
        fn.compiled = True
        mark_tail(fn)
        return ir.MakeClosure(fn, self.frame_ref(scope), 0)


def fake_ids(t, out=None, seen=None):
    """Ids of the Fake frames reachable from ``t``."""
    if out is None:
        out, seen = set(), set()
    if not has_fake(t) or id(t) in seen:
        return out
    seen.add(id(t))
    tt = type(t)
    if tt is Arr:
        for x in t.items:
            fake_ids(x, out, seen)
    elif tt is Comb:
        fake_ids(t.static, out, seen)
    elif tt is Env:
        if not t.real:
            out.add(t.id)
        for v in t.bindings.values():
            fake_ids(v, out, seen)
        if t.dval is not None:
            fake_ids(t.dval, out, seen)
        if t.parent is not None:
            fake_ids(t.parent, out, seen)
    return out


def live_ids(s):
    out = set()
    while s is not None:
        if s.id is not None:
            out.add(s.id)
        s = s.parent
    return frozenset(out)


def is_const_code(a):
    """Does running ``a`` as code just produce ``a``?"""
    ta = type(a)
    if ta is Sym:
        return a.mark is None
    if ta is Arr:
        return a.kind == VAL
    return True


def box(s):
    """Mark ``s`` (and every same-function scope its frame links to) as
    needing a runtime frame."""
    while s is not None and not s.boxed:
        s.boxed = True
        p = s.parent
        if p is None or p.fn is not s.fn:
            # outer function scopes are boxed by whoever captured them
            if p is not None:
                box(p)
            return
        s = p


def mark_tail(fn):
    """Flag tail-position static self-calls for loop conversion."""
    def walk(n):
        t = type(n)
        if t is ir.If:
            walk(n.then)
            walk(n.other)
        elif t is ir.Inline:
            walk(n.body)
        elif t is ir.Seq:
            if n.items:
                walk(n.items[-1])
        elif t is ir.Call:
            n.tail = True
    if fn.body is not None:
        walk(fn.body)


def compile_residual(residuals, prelude, pe, with_arg=True, **kw):
    from .program import run_deep
    c = Compiler(pe, **kw)
    return run_deep(c.compile_program, residuals, prelude, with_arg)
