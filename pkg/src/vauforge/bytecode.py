"""Stack bytecode for compiled functions, its disassembly, and the VM.

Each function gets a register file (scope slots plus lazily built frame
caches) and a flat instruction list.  Operand data (terms passed to
operatives, code for the evaluator) lives in a program-wide constant pool.
"""
from . import ir
from .interp import EvalError
from .reader import print_term
from .runtime import FRAME_BASE, Closure, FrameInfo, cond_value, prim_call
from .terms import INT_MAX, INT_MIN, VAL, Arr, data_equal

OPS = ("CONST", "INT", "NONE", "LOAD", "STORE", "OUTER", "FRAME", "ENV",
       "RESET", "JUMP", "JUMPNZ", "PRIM", "CALL", "TAILSELF", "CLOSURE",
       "CLOSURE0", "DYNW", "DYNDATA", "DYNCODE", "DYNVALS", "DISPATCH",
       "LIST", "APPLY", "ROUNDS", "CALLLIST", "INTERP", "EVAL", "MATER",
       "TRAP", "POP", "RETURN")
for _i, _n in enumerate(OPS):
    globals()[_n] = _i


class FnCode:
    """Bytecode of one function."""

    def __init__(self, fn):
        self.fn = fn
        self.code = []
        self.nregs = 0
        self.regs = {}        # (scope uid, slot) -> register
        self.frames = {}      # scope uid -> (cache reg, FrameInfo, slot regs, parent spec)
        self.params = []

    def disasm(self, pool_index):
        fn = self.fn
        out = ["function %d %s params=%d rest=%d de=%d wrap=%d closure=%d regs=%d" % (
            fn.index, fn.name, fn.nparams, int(fn.rest), int(fn.de), fn.wrap,
            int(fn.has_parent), self.nregs)]
        for pc, ins in enumerate(self.code):
            op = OPS[ins[0]]
            args = " ".join(_operand(x) for x in ins[1:])
            out.append("  %04d %-9s %s" % (pc, op, args) if args else "  %04d %s" % (pc, op))
        return "\n".join(out)


def _operand(x):
    if isinstance(x, str):
        return repr(x)
    if isinstance(x, tuple):
        return "(" + ",".join(_operand(y) for y in x) + ")"
    return str(x)


class Emitter:
    """IR -> bytecode for every live function of a program."""

    def __init__(self, program):
        self.program = program
        self.pool = []
        self._pool_ids = {}

    def const(self, v):
        k = id(v)
        i = self._pool_ids.get(k)
        if i is None:
            i = self._pool_ids[k] = len(self.pool)
            self.pool.append(v)
        return i

    def emit_all(self):
        code = {}
        for fn in self.program.live_functions():
            code[fn.index] = FnEmitter(self, fn).run()
        self.program.constants = self.pool
        self.program.code = code
        return code


class FnEmitter:
    def __init__(self, em, fn):
        self.em = em
        self.fn = fn
        self.fc = FnCode(fn)
        self.code = self.fc.code

    def reg(self, s, i):
        k = (s.uid, i)
        r = self.fc.regs.get(k)
        if r is None:
            r = self.fc.regs[k] = self.fc.nregs
            self.fc.nregs += 1
        return r

    def frame_spec(self, s):
        """Register the lazily built frame of same-function scope ``s``."""
        hit = self.fc.frames.get(s.uid)
        if hit is not None:
            return hit
        cache = self.fc.nregs
        self.fc.nregs += 1
        slots = tuple(self.reg(s, i) for i in range(len(s.names)))
        if s.parent is None:
            up = None
        elif s.parent.fn is self.fn:
            self.frame_spec(s.parent)
            up = ("local", s.parent.uid)
        else:
            up = ("outer", self.hops(s.parent))
        spec = (cache, FrameInfo(s), slots, up)
        self.fc.frames[s.uid] = spec
        return spec

    def hops(self, s):
        n = 0
        c = self.fn.scope.parent
        while c is not None and c is not s:
            n += 1
            c = c.parent
        if c is None:
            raise EvalError("type", "scope not reachable from function %d" % self.fn.index)
        return n

    def label(self):
        return [None]

    def here(self, lab):
        lab[0] = len(self.code)

    def put(self, *ins):
        self.code.append(list(ins))
        return self.code[-1]

    def run(self):
        s = self.fn.scope
        self.fc.params = [self.reg(s, i) for i in range(len(s.names))]
        self.tail(self.fn.body)
        # resolve labels
        for ins in self.code:
            for j, x in enumerate(ins):
                if type(x) is list:
                    ins[j] = x[0]
        self.fc.code = [tuple(i) for i in self.code]
        return self.fc

    # -- statements ---------------------------------------------------------

    def tail(self, n):
        t = type(n)
        if t is ir.If:
            self.branch(n, self.tail)
        elif t is ir.Inline:
            self.bind(n)
            self.tail(n.body)
        elif t is ir.Seq:
            for x in n.items[:-1]:
                self.ex(x)
                self.put(POP)
            self.tail(n.items[-1])
        elif ir.is_self_tail(self.fn, n):
            self.call_args(self.fn, n.args, n.denv)
            self.put(TAILSELF, len(self.fc.params))
        else:
            self.ex(n)
            self.put(RETURN)

    def branch(self, n, k):
        other = self.label()
        self.ex(n.cond)
        self.put(JUMPNZ, other)
        if k is self.tail:
            k(n.then)
            self.here(other)
            k(n.other)
            return
        end = self.label()
        k(n.then)
        self.put(JUMP, end)
        self.here(other)
        k(n.other)
        self.here(end)

    def bind(self, n):
        s = n.scope
        for a in n.args:
            self.ex(a)
        for i in reversed(range(len(n.args))):
            self.put(STORE, self.reg(s, i))
        if s.boxed:
            self.put(RESET, self.frame_spec(s)[0])

    def call_args(self, r, nodes, denv):
        for a in nodes:
            self.ex(a)
        k = r.nparams
        if r.rest:
            self.put(PRIM, "array", len(nodes) - k)
        if r.de:
            if denv is None:
                self.put(NONE)
            else:
                self.ex(denv)

    # -- expressions --------------------------------------------------------

    def ex(self, n):
        getattr(self, "x_" + type(n).__name__)(n)

    def x_Const(self, n):
        v = n.value
        if type(v) is int:
            self.put(INT, v)
        else:
            self.put(CONST, self.em.const(v))

    def x_Var(self, n):
        s = n.scope
        if s.fn is self.fn:
            self.put(LOAD, self.reg(s, n.slot))
        else:
            self.put(OUTER, self.hops(s), n.slot)

    def frame(self, s):
        if s.fn is self.fn:
            self.frame_spec(s)
            self.put(FRAME, s.uid)
        else:
            self.put(OUTER, self.hops(s), -1)

    def x_FrameRef(self, n):
        self.frame(n.scope)

    def x_MakeEnv(self, n):
        self.frame(n.scope)
        self.put(ENV)

    def x_If(self, n):
        self.branch(n, self.ex)

    def x_Inline(self, n):
        self.bind(n)
        self.ex(n.body)

    def x_Seq(self, n):
        for x in n.items[:-1]:
            self.ex(x)
            self.put(POP)
        self.ex(n.items[-1])

    def x_PrimOp(self, n):
        for a in n.args:
            self.ex(a)
        self.put(PRIM, n.op, len(n.args))

    def x_Call(self, n):
        r = n.fn.resolve()
        if not r.accepts(len(n.args)):
            for a in n.args:
                self.ex(a)
                self.put(POP)
            self.put(TRAP, "arity", "combiner expects %d argument(s), got %d"
                     % (r.nparams, len(n.args)))
            return
        if n.parent is None:
            self.put(NONE)
        else:
            self.ex(n.parent)
        self.call_args(r, n.args, n.denv)
        self.put(CALL, r.index, r.nparams + int(r.rest) + int(r.de))

    def x_CallWith(self, n):
        r = n.fn.resolve()
        if n.parent is None:
            self.put(NONE)
        else:
            self.ex(n.parent)
        self.ex(n.arglist)
        if n.denv is None:
            self.put(NONE)
        else:
            self.ex(n.denv)
        self.put(CALLLIST, r.index)

    def x_MakeClosure(self, n):
        r = n.fn.resolve()
        if n.parent is None:
            self.put(CLOSURE0, r.index, n.wrap, int(n.fn.de))
        else:
            self.ex(n.parent)
            self.put(CLOSURE, r.index, n.wrap, int(n.fn.de))

    def x_Materialize(self, n):
        self.ex(n.env)
        self.put(MATER, self.em.const(n.term))

    def x_Interp(self, n):
        self.ex(n.env)
        self.put(INTERP, self.em.const(n.term))

    def x_RuntimeEval(self, n):
        self.ex(n.code)
        self.ex(n.env)
        self.put(EVAL)

    def x_Apply(self, n):
        for a in n.args:
            self.ex(a)
        self.ex(n.env)
        self.put(APPLY)

    def x_Rounds(self, n):
        for a in n.args:
            self.ex(a)
        self.put(LIST, len(n.args))
        self.ex(n.env)
        self.put(ROUNDS, n.n)

    def x_Trap(self, n):
        self.put(TRAP, n.kind, n.message)

    def x_DynCall(self, n):
        self.ex(n.head)
        self.put(DYNW)
        if n.code is not None:
            w1 = self.label()
            call = self.label()
            self.put(JUMPNZ, w1)
            for a in n.data:
                self.ex(a)
            self.put(DYNDATA, len(n.data))
            self.put(JUMP, call)
            self.here(w1)
            for a in n.code:
                self.ex(a)
            self.frame(n.env.scope)
            self.put(DYNCODE, len(n.code))
            self.here(call)
        else:
            self.put(POP)
            for a in n.data:
                self.ex(a)
            self.frame(n.env.scope)
            self.put(DYNVALS, len(n.data))
        self.frame(n.env.scope)
        self.put(DISPATCH, n.site)


def disassemble(program):
    """Deterministic listing: constant pool, then functions by index."""
    if program.code is None:
        Emitter(program).emit_all()
    out = ["; entry %d" % program.entry.index, "; constants %d" % len(program.constants)]
    for i, c in enumerate(program.constants):
        out.append("const %d %s" % (i, print_term(c, show_marks=True)))
    for idx in sorted(program.code):
        out.append("")
        out.append(program.code[idx].disasm(None))
    return "\n".join(out) + "\n"


# -- VM ---------------------------------------------------------------------

class VM:
    """Executes bytecode; calls go through ``rt.entries`` so functions may
    be hosted by either engine."""

    def __init__(self, program, rt, instrument=False):
        if program.code is None:
            Emitter(program).emit_all()
        self.program = program
        self.rt = rt
        self.instrument = instrument
        self.pool = program.constants

    def entry(self, fn):
        fc = self.program.code[fn.index]
        run = self.execute

        def enter(P, *args):
            return run(fc, P, args)
        return enter

    def install(self):
        for fn in self.program.live_functions():
            self.rt.entries[fn.index] = self.entry(fn)
        return self

    def _frame(self, fc, regs, P, uid):
        cache, info, slots, up = fc.frames[uid]
        fr = regs[cache]
        if fr is None:
            if up is None:
                pf = None
            elif up[0] == "local":
                pf = self._frame(fc, regs, P, up[1])
            else:
                pf = P
                for _ in range(up[1]):
                    pf = pf[1]
            fr = [info, pf, None] + [regs[r] for r in slots]
            regs[cache] = fr
        return fr

    def execute(self, fc, P, args):
        rt = self.rt
        depth = rt.depth
        if self.instrument:
            depth[0] += 1
            if depth[0] > depth[1]:
                depth[1] = depth[0]
        try:
            return self._exec(fc, P, args)
        finally:
            if self.instrument:
                depth[0] -= 1

    def _exec(self, fc, P, args):
        rt = self.rt
        pool = self.pool
        regs = [None] * fc.nregs
        params = fc.params
        for r, v in zip(params, args):
            regs[r] = v
        code = fc.code
        stack = []
        push = stack.append
        pop = stack.pop
        pc = 0
        while True:
            ins = code[pc]
            op = ins[0]
            pc += 1
            if op == LOAD:
                push(regs[ins[1]])
            elif op == INT:
                push(ins[1])
            elif op == CONST:
                push(pool[ins[1]])
            elif op == PRIM:
                k = ins[2]
                if k:
                    a = stack[-k:]
                    del stack[-k:]
                else:
                    a = []
                push(_prim(ins[1], a))
            elif op == JUMPNZ:
                if cond_value(pop()) != 0:
                    pc = ins[1]
            elif op == JUMP:
                pc = ins[1]
            elif op == RETURN:
                return pop()
            elif op == CALL:
                k = ins[2]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                parent = pop()
                push(rt.entries[ins[1]](parent, *a))
            elif op == TAILSELF:
                k = ins[1]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                regs = [None] * fc.nregs
                for r, v in zip(params, a):
                    regs[r] = v
                stack.clear()
                pc = 0
            elif op == STORE:
                regs[ins[1]] = pop()
            elif op == NONE:
                push(None)
            elif op == OUTER:
                fr = P
                for _ in range(ins[1]):
                    fr = fr[1]
                push(fr if ins[2] < 0 else fr[FRAME_BASE + ins[2]])
            elif op == FRAME:
                push(self._frame(fc, regs, P, ins[1]))
            elif op == ENV:
                push(rt.frame_env(pop()))
            elif op == RESET:
                regs[ins[1]] = None
            elif op == CLOSURE:
                if self.instrument:
                    rt.alloc.closures_allocated += 1
                push(Closure(self.program.functions[ins[1]], pop(), ins[2], bool(ins[3]), rt))
            elif op == CLOSURE0:
                push(Closure(self.program.functions[ins[1]], None, ins[2], bool(ins[3]), rt))
            elif op == DYNW:
                push(rt.wrap_of(stack[-1]))
            elif op == DYNDATA:
                k = ins[1]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                rt.counters.comp_dyn_w0_calls += 1
                push(a)
            elif op == DYNCODE:
                fr = pop()
                k = ins[1]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                rt.counters.comp_dyn_w1_calls += 1
                w = rt.wrap_of(stack[-1])
                if w > 1:
                    a = rt.rounds(a, w - 1, rt.frame_env(fr))
                push(a)
            elif op == DYNVALS:
                fr = pop()
                k = ins[1]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                w = rt.wrap_of(stack[-1])
                rt.count_dyn(w)
                if w > 0:
                    a = rt.rounds(a, w, rt.frame_env(fr))
                push(a)
            elif op == DISPATCH:
                fr = pop()
                a = pop()
                f = pop()
                push(rt.dispatch(f, a, fr))
            elif op == LIST:
                k = ins[1]
                a = stack[-k:] if k else []
                if k:
                    del stack[-k:]
                push(a)
            elif op == APPLY:
                env = pop()
                arr = pop()
                f = pop()
                push(rt.apply(f, arr, env))
            elif op == ROUNDS:
                env = pop()
                push(rt.rounds(pop(), ins[1], env))
            elif op == CALLLIST:
                denv = pop()
                lst = pop()
                parent = pop()
                push(rt.call_list(self.program.functions[ins[1]], parent, lst, denv))
            elif op == INTERP:
                push(rt.run_code(pool[ins[1]], pop()))
            elif op == EVAL:
                env = pop()
                push(rt.eval_value(pop(), env))
            elif op == MATER:
                push(rt.materialize(pool[ins[1]], pop()))
            elif op == TRAP:
                raise EvalError(ins[1], ins[2])
            elif op == POP:
                pop()
            else:
                raise EvalError("type", "bad opcode %r" % (ins,))


def _prim(op, a):
    """Data primitive with the inline fast paths of the host engine."""
    if op == "+" and len(a) == 2:
        x, y = a
        if type(x) is int and type(y) is int:
            r = x + y
            if r > INT_MAX or r < INT_MIN:
                raise EvalError("overflow", "integer overflow: %d" % r)
            return r
    elif op == "-" and len(a) == 2:
        x, y = a
        if type(x) is int and type(y) is int:
            r = x - y
            if r > INT_MAX or r < INT_MIN:
                raise EvalError("overflow", "integer overflow: %d" % r)
            return r
    elif op == "<" and len(a) == 2:
        x, y = a
        if type(x) is int and type(y) is int:
            return 0 if x < y else 1
    elif op == "=" and len(a) == 2:
        x, y = a
        return 0 if (x is y or data_equal(x, y)) else 1
    elif op == "array":
        return Arr(a, VAL)
    return prim_call(op, a)

