"""Host-code engine: each compiled function becomes a Python function.

The translation is mechanical: locals for scope slots, frames built lazily
with the walrus operator, tail self-calls as ``while True`` loops, and
dynamic call sites that branch on the callee's wrap bits.  A function the
translator cannot express (nesting too deep for the host parser) runs on
the bytecode VM instead; both engines share frames, closures and runtime.
"""
import logging

from . import ir
from .interp import EvalError
from .runtime import FRAME_BASE, Closure, FrameInfo, cond_value, prim_call, trap
from .terms import INT_MAX, INT_MIN, VAL, Arr, Env, Sym, data_equal

log = logging.getLogger(__name__)

MAX_INDENT = 60
HOIST_LEN = 160

_TYPE_TESTS = {"int?": "type(%s) is int", "array?": "type(%s) is _Arr",
               "symbol?": "type(%s) is _Sym", "env?": "type(%s) is _Env"}


class TooDeep(Exception):
    pass


def _eq(a, b):
    return a is b or data_equal(a, b)


def _ovf(n):
    raise EvalError("overflow", "integer overflow: %d" % n)


def _ckint(a):
    if type(a) is not int:
        raise EvalError("type", "expected integer, got %s" % type(a).__name__)
    return a


class HostEngine:
    def __init__(self, program, rt, instrument=False, fallback=None):
        self.program = program
        self.rt = rt
        self.instrument = instrument
        self.fallback = fallback
        self.ns = {
            "RT": rt, "_Arr": Arr, "_VAL": VAL, "_Sym": Sym, "_Env": Env,
            "_Clo": Closure, "_eq": _eq, "_ovf": _ovf, "_ckint": _ckint,
            "_cond": cond_value, "_prim": prim_call, "_trap": trap,
            "_D": rt.depth, "_A": rt.alloc,
            "MAXI": INT_MAX, "MINI": INT_MIN,
        }
        self._consts = {}
        self.sources = {}
        self.on_vm = []

    def const(self, v):
        k = id(v)
        hit = self._consts.get(k)
        if hit is None:
            hit = "K%d" % len(self._consts)
            self._consts[k] = hit
            self.ns[hit] = v
        return hit

    def closure_const(self, fn):
        r = fn.resolve()
        name = "C%d_%d" % (fn.index, fn.wrap)
        if name not in self.ns:
            self.ns[name] = Closure(r, None, fn.wrap, fn.de, self.rt)
        return name

    def fn_object(self, fn):
        name = "FN%d" % fn.index
        self.ns[name] = fn
        return name

    def frame_info(self, s):
        name = "I%d" % s.uid
        if name not in self.ns:
            self.ns[name] = FrameInfo(s)
        return name

    def build(self):
        for fn in self.program.live_functions():
            try:
                src = FnGen(self, fn).generate()
                code = compile(src, "<compiled fn %d>" % fn.index, "exec")
                exec(code, self.ns)
                self.sources[fn.index] = src
            except (TooDeep, RecursionError, SyntaxError, MemoryError) as e:
                if self.fallback is None:
                    raise
                log.debug("function %d runs on the bytecode VM: %s", fn.index, e)
                self.on_vm.append(fn.index)
                self.ns["f%d" % fn.index] = self.fallback(fn)
            self.rt.entries[fn.index] = self.ns["f%d" % fn.index]
        return self

    def source(self):
        return "\n".join(self.sources[i] for i in sorted(self.sources))


class FnGen:
    def __init__(self, eng, fn):
        self.eng = eng
        self.fn = fn
        self.lines = []
        self.ind = 2
        self.ntmp = 0
        self.frames = {}
        self.loop = False

    # -- helpers ------------------------------------------------------------

    def emit(self, line):
        if self.ind > MAX_INDENT:
            raise TooDeep("nesting too deep")
        self.lines.append("    " * self.ind + line)

    def tmp(self):
        self.ntmp += 1
        return "t%d" % self.ntmp

    def local(self, s, i):
        return "v%d_%d" % (s.uid, i)

    def outer(self, s):
        """Expression for the frame of outer-function scope ``s``."""
        e = "P"
        c = self.fn.scope.parent
        while c is not None and c is not s:
            e += "[1]"
            c = c.parent
        if c is None:
            raise TooDeep("scope %r not reachable from function %d" % (s, self.fn.index))
        return e

    def frame(self, s):
        if s.fn is not self.fn:
            return self.outer(s)
        self.frames[s.uid] = s
        if s.parent is None:
            up = "None"
        else:
            up = self.frame(s.parent)
        slots = "".join(", " + self.local(s, i) for i in range(len(s.names)))
        f = "F%d" % s.uid
        return "(%s if %s is not None else (%s := [%s, %s, None%s]))" % (
            f, f, f, self.eng.frame_info(s), up, slots)

    # -- entry --------------------------------------------------------------

    def generate(self):
        fn = self.fn
        s = fn.scope
        params = ["P"] + [self.local(s, i) for i in range(len(s.names))]
        self.loop = self._has_self_tail(fn.body)
        self.ret(fn.body)
        body = self.lines
        head = ["def f%d(%s):" % (fn.index, ", ".join(params))]
        resets = ["F%d = None" % u for u in sorted(self.frames)]
        pre = []
        if self.eng.instrument:
            pre = ["    _D[0] += 1", "    if _D[0] > _D[1]: _D[1] = _D[0]", "    try:"]
        inner = "        "
        out = head + pre
        if self.loop:
            out.append(inner + "while True:")
            out += [inner + "    " + r for r in resets]
            out += ["    " + b for b in body]
        else:
            out += [inner + r for r in resets]
            out += body
        if self.eng.instrument:
            out += ["    finally:", "        _D[0] -= 1"]
        else:
            # without the try block, dedent one level
            out = [out[0]] + [l[4:] for l in out[1:]]
        return "\n".join(out) + "\n"

    def _has_self_tail(self, n):
        t = type(n)
        if t is ir.If:
            return self._has_self_tail(n.then) or self._has_self_tail(n.other)
        if t is ir.Inline:
            return self._has_self_tail(n.body)
        if t is ir.Seq:
            return bool(n.items) and self._has_self_tail(n.items[-1])
        return t is ir.Call and self.is_self_tail(n)

    def is_self_tail(self, c):
        return ir.is_self_tail(self.fn, c)

    # -- statements ---------------------------------------------------------

    def ret(self, n):
        t = type(n)
        if t is ir.If:
            self.branch(n, self.ret)
        elif t is ir.Inline:
            self.bind_inline(n)
            self.ret(n.body)
        elif t is ir.Seq:
            for x in n.items[:-1]:
                self.emit(self.ex(x))
            self.ret(n.items[-1])
        elif t is ir.Call and self.loop and self.is_self_tail(n):
            self.self_call(n)
        else:
            self.emit("return " + self.ex(n))

    def branch(self, n, k):
        test = self.test(n.cond)
        self.emit("if %s:" % test)
        self.ind += 1
        k(n.then)
        self.ind -= 1
        self.emit("else:")
        self.ind += 1
        k(n.other)
        self.ind -= 1

    def bind_inline(self, n):
        s = n.scope
        vals = self.exs(n.args)
        for i, v in enumerate(vals):
            self.emit("%s = %s" % (self.local(s, i), v))
        if s.boxed:
            self.frames[s.uid] = s
            self.emit("F%d = None" % s.uid)

    def self_call(self, c):
        fn = self.fn
        vals = self.call_args(fn, c.args, c.denv)
        tmps = []
        for v in vals:
            if v.isidentifier() and not v.startswith("v"):
                tmps.append(v)
            else:
                t = self.tmp()
                self.emit("%s = %s" % (t, v))
                tmps.append(t)
        s = fn.scope
        for i, t in enumerate(tmps):
            self.emit("%s = %s" % (self.local(s, i), t))
        # frame caches are reset at the loop head
        self.emit("continue")

    # -- expressions --------------------------------------------------------

    def exs(self, nodes):
        """Expressions for ``nodes`` evaluated left to right."""
        out = []
        for n in nodes:
            mark = len(self.lines)
            e = self.ex(n)
            if len(self.lines) > mark:
                # statements were emitted: earlier impure values go first
                pre = []
                for j, (prev, node) in enumerate(zip(out, nodes)):
                    if not _pure(node) and not _is_name(prev):
                        t = self.tmp()
                        pre.append("    " * self.ind + "%s = %s" % (t, prev))
                        out[j] = t
                self.lines[mark:mark] = pre
            out.append(e)
        return out

    def hoist(self, e):
        if len(e) > HOIST_LEN:
            t = self.tmp()
            self.emit("%s = %s" % (t, e))
            return t
        return e

    def ex(self, n):
        m = getattr(self, "x_" + type(n).__name__)
        return self.hoist(m(n))

    def x_Const(self, n):
        v = n.value
        if type(v) is int:
            return repr(v) if v >= 0 else "(%d)" % v
        return self.eng.const(v)

    def x_Var(self, n):
        s = n.scope
        if s.fn is self.fn:
            return self.local(s, n.slot)
        return "%s[%d]" % (self.outer(s), FRAME_BASE + n.slot)

    def x_FrameRef(self, n):
        return self.frame(n.scope)

    def x_MakeEnv(self, n):
        return "RT.frame_env(%s)" % self.frame(n.scope)

    def x_If(self, n):
        t = self.tmp()

        def assign(x):
            self.emit("%s = %s" % (t, self.ex(x)))
        self.branch(n, assign)
        return t

    def x_Inline(self, n):
        self.bind_inline(n)
        return self.ex(n.body)

    def x_Seq(self, n):
        for x in n.items[:-1]:
            self.emit(self.ex(x))
        return self.ex(n.items[-1])

    def call_args(self, r, nodes, denv):
        vals = self.exs(list(nodes) + ([denv] if (r.de and denv is not None) else []))
        if r.de and denv is not None:
            d = vals.pop()
        else:
            d = "None"
        k = r.nparams
        if r.rest:
            rest = vals[k:]
            vals = vals[:k] + ["_Arr((%s), _VAL)" % "".join(x + ", " for x in rest)]
        if r.de:
            vals.append(d)
        return vals

    def x_Call(self, n):
        r = n.fn.resolve()
        if not r.accepts(len(n.args)):
            for x in self.exs(n.args):
                self.emit(x)
            return "_trap('arity', %r)" % ("combiner expects %d argument(s), got %d"
                                           % (r.nparams, len(n.args)))
        parent = "None" if n.parent is None else self.ex(n.parent)
        vals = self.call_args(r, n.args, n.denv)
        return "f%d(%s)" % (r.index, ", ".join([parent] + vals))

    def x_CallWith(self, n):
        r = n.fn.resolve()
        parent = "None" if n.parent is None else self.ex(n.parent)
        lst = self.ex(n.arglist)
        denv = "None" if n.denv is None else self.ex(n.denv)
        return "RT.call_list(%s, %s, %s, %s)" % (self.eng.fn_object(r), parent, lst, denv)

    def x_MakeClosure(self, n):
        if n.parent is None:
            return self.eng.closure_const(n.fn)
        r = n.fn.resolve()
        p = self.ex(n.parent)
        if self.eng.instrument:
            self.emit("_A.closures_allocated += 1")
        return "_Clo(%s, %s, %d, %s, RT)" % (self.eng.fn_object(r), p, n.wrap, bool(n.fn.de))

    def x_Materialize(self, n):
        return "RT.materialize(%s, %s)" % (self.eng.const(n.term), self.ex(n.env))

    def x_Interp(self, n):
        return "RT.run_code(%s, %s)" % (self.eng.const(n.term), self.ex(n.env))

    def x_RuntimeEval(self, n):
        a, b = self.exs([n.code, n.env])
        return "RT.eval_value(%s, %s)" % (a, b)

    def x_Apply(self, n):
        vals = self.exs(list(n.args) + [n.env])
        return "RT.apply(%s)" % ", ".join(vals)

    def x_Rounds(self, n):
        vals = self.exs(list(n.args) + [n.env])
        env = vals.pop()
        return "RT.rounds([%s], %d, %s)" % (", ".join(vals), n.n, env)

    def x_Trap(self, n):
        return "_trap(%r, %r)" % (n.kind, n.message)

    def x_DynCall(self, n):
        head = self.ex(n.head)
        th = self.tmp()
        tw = self.tmp()
        ta = self.tmp()
        self.emit("%s = %s" % (th, head))
        self.emit("%s = RT.wrap_of(%s)" % (tw, th))
        frame = self.frame(n.env.scope)
        if n.code is not None:
            self.emit("if %s == 0:" % tw)
            self.ind += 1
            self.emit("RT.counters.comp_dyn_w0_calls += 1")
            self.emit("%s = [%s]" % (ta, ", ".join(self.exs(n.data))))
            self.ind -= 1
            self.emit("else:")
            self.ind += 1
            self.emit("RT.counters.comp_dyn_w1_calls += 1")
            self.emit("%s = [%s]" % (ta, ", ".join(self.exs(n.code))))
            self.emit("if %s > 1:" % tw)
            self.emit("    %s = RT.rounds(%s, %s - 1, RT.frame_env(%s))" % (ta, ta, tw, frame))
            self.ind -= 1
        else:
            self.emit("%s = [%s]" % (ta, ", ".join(self.exs(n.data))))
            self.emit("RT.count_dyn(%s)" % tw)
            self.emit("if %s > 0:" % tw)
            self.emit("    %s = RT.rounds(%s, %s, RT.frame_env(%s))" % (ta, ta, tw, frame))
        return "RT.dispatch(%s, %s, %s)" % (th, ta, frame)

    # -- primitives ---------------------------------------------------------

    def test(self, c):
        """Python condition that holds when ``c`` evaluates to 0."""
        if type(c) is ir.PrimOp:
            op = c.op
            if op in ("<", "<=") and len(c.args) >= 2:
                return (" %s " % op).join(self.exs(c.args))
            if op == "=" and len(c.args) == 2:
                a, b = self.exs(c.args)
                if c.args[0].is_int and c.args[1].is_int:
                    return "%s == %s" % (a, b)
                return "_eq(%s, %s)" % (a, b)
            if op in _TYPE_TESTS and len(c.args) == 1:
                return _TYPE_TESTS[op] % self.ex(c.args[0])
        e = self.ex(c)
        if c.is_int:
            return "%s == 0" % e
        return "_cond(%s) == 0" % e

    def x_PrimOp(self, n):
        op = n.op
        args = self.exs(n.args)
        k = len(args)
        if op in ("+", "-", "*"):
            if k == 0:
                if op == "-":
                    return "_prim('-', [])"
                return "0" if op == "+" else "1"
            if k == 1:
                if op == "-":
                    e = "-_ckint(%s)" % args[0]
                else:
                    return "_ckint(%s)" % args[0]
            else:
                e = (" %s " % op).join(args)
            t = self.tmp()
            self.emit("%s = %s" % (t, e))
            self.emit("if %s > MAXI or %s < MINI: _ovf(%s)" % (t, t, t))
            return t
        if op in ("<", "<="):
            if k >= 2:
                return "(0 if %s else 1)" % (" %s " % op).join(args)
            return "_prim(%r, [%s])" % (op, ", ".join(args))
        if op == "=":
            if k == 2:
                a, b = args
                if n.args[0].is_int and n.args[1].is_int:
                    return "(0 if %s == %s else 1)" % (a, b)
                return "(0 if _eq(%s, %s) else 1)" % (a, b)
            return "_prim('=', [%s])" % ", ".join(args)
        if op in _TYPE_TESTS and k == 1:
            return "(0 if %s else 1)" % (_TYPE_TESTS[op] % args[0])
        if op == "array":
            return "_Arr((%s), _VAL)" % "".join(a + ", " for a in args)
        return "_prim(%r, [%s])" % (op, ", ".join(args))


def _pure(n):
    t = type(n)
    return t is ir.Const or t is ir.Var or t is ir.FrameRef or (
        t is ir.MakeClosure and n.parent is None)


def _is_name(e):
    return e.isidentifier()
