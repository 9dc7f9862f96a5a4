"""Closure-converted intermediate form shared by the bytecode emitter and
the host-code translator.

Scopes are compile-time frames.  Each one is owned by a Function (its own
parameter frame, or an inlined immediately-called combiner).  Runtime
frames exist only for scopes that are *boxed*: captured by a closure, or
reified as an environment value.  Everything else lives in locals.
"""


class Scope:
    __slots__ = ("uid", "id", "names", "dsym", "fn", "parent", "const_env",
                 "boxed", "_index")

    def __init__(self, uid, env_id, names, dsym, fn, parent, const_env):
        self.uid = uid
        self.id = env_id
        self.names = tuple(names)   # slot order: params, rest, de
        self.dsym = dsym
        self.fn = fn
        # next runtime scope up the chain (or None)
        self.parent = parent
        # the Real environment between this scope and ``parent``, if any
        self.const_env = const_env
        self.boxed = False
        self._index = {n: i for i, n in enumerate(self.names)}

    def slot(self, name):
        return self._index.get(name)

    def __repr__(self):
        return "Scope(%d, env %s)" % (self.uid, self.id)


class Function:
    __slots__ = ("index", "name", "comb_id", "nparams", "rest", "de", "wrap",
                 "scope", "body", "alias", "has_parent", "self_tail",
                 "compiled")

    def __init__(self, index, name, comb_id, nparams, rest, de, wrap):
        self.index = index
        self.name = name
        self.comb_id = comb_id
        self.nparams = nparams
        self.rest = rest            # bool
        self.de = de                # bool
        self.wrap = wrap
        self.scope = None
        self.body = None
        self.alias = None           # eta-converted: calls go to this Function
        self.has_parent = False     # closure over a runtime frame
        self.self_tail = False
        self.compiled = False

    def resolve(self):
        f = self
        seen = 0
        while f.alias is not None and seen < 64:
            f = f.alias
            seen += 1
        return f

    def accepts(self, n):
        return n == self.nparams or (self.rest and n >= self.nparams)

    def __repr__(self):
        return "Function(%d %s)" % (self.index, self.name)


# -- expression nodes ------------------------------------------------------

class Node:
    __slots__ = ()
    is_int = False


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    @property
    def is_int(self):
        return type(self.value) is int


class Var(Node):
    __slots__ = ("scope", "slot")

    def __init__(self, scope, slot):
        self.scope = scope
        self.slot = slot


class If(Node):
    __slots__ = ("cond", "then", "other")

    def __init__(self, cond, then, other):
        self.cond = cond
        self.then = then
        self.other = other


class PrimOp(Node):
    """Inline data primitive."""
    __slots__ = ("op", "args")
    INT_RESULT = frozenset(("+", "-", "*", "<", "<=", "=", "len", "array?",
                            "int?", "symbol?", "env?", "combiner?"))

    def __init__(self, op, args):
        self.op = op
        self.args = args

    @property
    def is_int(self):
        return self.op in self.INT_RESULT


class Call(Node):
    """Static call of a known function.  ``parent`` evaluates to the
    captured frame for closures, else None.  ``denv`` is the caller's
    environment for combiners that take it."""
    __slots__ = ("fn", "parent", "args", "denv", "tail")

    def __init__(self, fn, parent, args, denv=None):
        self.fn = fn
        self.parent = parent
        self.args = args
        self.denv = denv
        self.tail = False


class Inline(Node):
    """Immediately-called combiner whose body is compiled in place: bind
    the new scope's slots, then evaluate the body."""
    __slots__ = ("scope", "args", "body")

    def __init__(self, scope, args, body):
        self.scope = scope
        self.args = args
        self.body = body


class DynCall(Node):
    """Call through a runtime combiner value, dispatching on its tag bits.

    ``data`` are the operand terms as written (passed to wrap-0 callees);
    ``code`` are the same operands compiled for evaluation (wrap >= 1)."""
    __slots__ = ("site", "head", "data", "code", "env")

    def __init__(self, site, head, data, code, env):
        self.site = site
        self.head = head
        self.data = data
        self.code = code
        self.env = env


class MakeClosure(Node):
    __slots__ = ("fn", "parent", "wrap")

    def __init__(self, fn, parent, wrap):
        self.fn = fn
        self.parent = parent
        self.wrap = wrap


class FrameRef(Node):
    """The runtime frame of a boxed scope."""
    __slots__ = ("scope",)

    def __init__(self, scope):
        self.scope = scope


class MakeEnv(Node):
    """Environment value for a scope, materialized at most once per frame."""
    __slots__ = ("scope",)

    def __init__(self, scope):
        self.scope = scope


class Materialize(Node):
    """A constant that mentions Fake frames, rebuilt against live frames."""
    __slots__ = ("term", "env")

    def __init__(self, term, env):
        self.term = term
        self.env = env


class Apply(Node):
    """lapply on runtime values."""
    __slots__ = ("site", "args", "env")

    def __init__(self, site, args, env):
        self.site = site
        self.args = args
        self.env = env


class Rounds(Node):
    """Evaluate already-computed operand values ``n`` more times with the
    runtime evaluator; yields the list used by the enclosing call."""
    __slots__ = ("args", "n", "env")

    def __init__(self, args, n, env):
        self.args = args
        self.n = n
        self.env = env


class Interp(Node):
    """Run a residual code term with the reference evaluator."""
    __slots__ = ("term", "env")

    def __init__(self, term, env):
        self.term = term
        self.env = env


class RuntimeEval(Node):
    """eval of a runtime value (code as data) in a runtime environment."""
    __slots__ = ("code", "env")

    def __init__(self, code, env):
        self.code = code
        self.env = env


class CallWith(Node):
    """Call a known function on an argument list computed at runtime
    (used after runtime evaluation rounds)."""
    __slots__ = ("fn", "parent", "arglist", "denv")

    def __init__(self, fn, parent, arglist, denv=None):
        self.fn = fn
        self.parent = parent
        self.arglist = arglist
        self.denv = denv


class Trap(Node):
    __slots__ = ("kind", "message")

    def __init__(self, kind, message):
        self.kind = kind
        self.message = message


class Seq(Node):
    __slots__ = ("items",)

    def __init__(self, items):
        self.items = items


def children(n):
    t = type(n)
    if t is If:
        return (n.cond, n.then, n.other)
    if t is PrimOp:
        return tuple(n.args)
    if t is Call:
        out = list(n.args)
        if n.parent is not None:
            out.append(n.parent)
        if n.denv is not None:
            out.append(n.denv)
        return tuple(out)
    if t is Inline:
        return tuple(n.args) + (n.body,)
    if t is DynCall:
        return (n.head,) + tuple(n.code) + (n.env,)
    if t is MakeClosure:
        return () if n.parent is None else (n.parent,)
    if t in (Materialize, Interp):
        return (n.env,)
    if t is Apply:
        return tuple(n.args) + (n.env,)
    if t is Rounds:
        return tuple(n.args) + (n.env,)
    if t is RuntimeEval:
        return (n.code, n.env)
    if t is CallWith:
        out = [n.arglist]
        if n.parent is not None:
            out.append(n.parent)
        if n.denv is not None:
            out.append(n.denv)
        return tuple(out)
    if t is Seq:
        return tuple(n.items)
    return ()


def is_self_tail(fn, c):
    """Is ``c`` a tail call of ``fn`` to itself through the same frame?"""
    if type(c) is not Call or not c.tail or c.fn.resolve() is not fn:
        return False
    if not fn.accepts(len(c.args)):
        return False
    if c.parent is None:
        return fn.scope.parent is None
    return type(c.parent) is FrameRef and c.parent.scope is fn.scope.parent
