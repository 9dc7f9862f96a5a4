"""Term language shared by the interpreter, partial evaluator and backend.

Integers are plain Python ints.  Every other node is one of the classes
below.  Nodes are treated as immutable once built; the underscore slots
are lazily filled caches (structural hash, progress sets).

Marks:

* ``Sym.mark`` is ``None`` for a symbol that is a value, ``True`` for a
  suspended lookup that has not been partially evaluated yet, and an int
  env id for a lookup known to resolve in that environment.
* ``Arr.kind`` is ``VAL`` (data), ``FRESH`` (call never partially
  evaluated, arguments still in data form) or ``ATT`` (suspended call,
  arguments already in code form).
"""
import sys

VAL, FRESH, ATT = 0, 1, 2
KIND_NAMES = {VAL: "val", FRESH: "fresh", ATT: "att"}

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

REST = sys.intern("&")


class TermError(Exception):
    pass


class Sym:
    __slots__ = ("name", "mark", "_h", "_nfp", "_up", "_inf")

    def __init__(self, name, mark=None):
        self.name = sys.intern(name)
        self.mark = mark
        self._h = None
        self._nfp = None
        self._up = None
        self._inf = None

    def __repr__(self):
        return "Sym(%r, %r)" % (self.name, self.mark)


class Arr:
    """Array node.  ``needed`` and ``loop`` are only meaningful on
    attempted calls: the dynamic-env id the call is waiting on and the
    (body, env) form that fenced it off as a recursive loop."""

    __slots__ = ("items", "kind", "needed", "loop",
                 "_h", "_nfp", "_up", "_inf", "_fk")

    def __init__(self, items, kind=VAL, needed=None, loop=None):
        self.items = tuple(items)
        self.kind = kind
        self.needed = needed
        self.loop = loop
        self._h = None
        self._nfp = None
        self._up = None
        self._inf = None
        self._fk = None

    def __repr__(self):
        return "Arr(%s, %r)" % (KIND_NAMES[self.kind], list(self.items))


class Prim:
    __slots__ = ("op", "wrap", "_h")

    def __init__(self, op, wrap):
        self.op = op
        self.wrap = wrap
        self._h = None

    def with_wrap(self, wrap):
        return Prim(self.op, wrap)

    def __repr__(self):
        return "Prim(%s/%d)" % (self.op, self.wrap)


class Comb:
    """Derived combiner.  ``body`` is always in code form.

    ``src`` is the body as written (unval'd); ``body`` may be a residual
    specialized against a fake frame.  Both are valid code for the body.
    """

    __slots__ = ("id", "wrap", "de", "static", "params", "rest", "body",
                 "src", "_h", "_nfp", "_up", "_inf", "_fk")

    def __init__(self, id, wrap, de, static, params, rest, body, src=None):
        self.id = id
        self.wrap = wrap
        self.de = de
        self.static = static
        self.params = params
        self.rest = rest
        self.body = body
        self.src = body if src is None else src
        self._h = None
        self._nfp = None
        self._up = None
        self._inf = None
        self._fk = None

    def with_wrap(self, wrap):
        return Comb(self.id, wrap, self.de, self.static, self.params,
                    self.rest, self.body, self.src)

    def __repr__(self):
        return "Comb(#%s/%d)" % (self.id, self.wrap)


class Env:
    """One environment frame, chained through ``parent``.

    ``real`` frames hold values; fake frames describe a frame that will
    only exist at runtime and map each parameter to a placeholder symbol
    marked with the frame's own id.
    """

    __slots__ = ("id", "real", "bindings", "dsym", "dval", "parent",
                 "_h", "_nfp", "_up", "_inf", "_fk")

    def __init__(self, id, real, bindings, parent=None, dsym=None, dval=None):
        self.id = id
        self.real = real
        self.bindings = bindings
        self.parent = parent
        self.dsym = dsym
        self.dval = dval
        self._h = None
        self._nfp = None
        self._up = None
        self._inf = None
        self._fk = None

    def find(self, name):
        e = self
        while e is not None:
            v = e.bindings.get(name)
            if v is not None:
                return v
            if e.dsym is name:
                return e.dval
            e = e.parent
        return None

    def frame(self, id):
        e = self
        while e is not None:
            if e.id == id:
                return e
            e = e.parent
        return None

    def __repr__(self):
        return "Env(#%s%s, %s)" % (self.id, "r" if self.real else "f",
                                   sorted(self.bindings))


class FormKey:
    """A (body, environment) pair used to fence recursive specialisation."""

    __slots__ = ("body", "env", "_h")

    def __init__(self, body, env):
        self.body = body
        self.env = env
        self._h = hash((thash(body), thash(env)))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return (isinstance(other, FormKey) and self._h == other._h
                and term_equal(self.body, other.body)
                and term_equal(self.env, other.env))

    def __repr__(self):
        return "FormKey(%x)" % (self._h & 0xFFFFFFFF)


def is_value(t):
    """True for terms that need no further evaluation."""
    tt = type(t)
    if tt is Sym:
        return t.mark is None
    if tt is Arr:
        return t.kind == VAL
    return True


def check_int(n):
    if n < INT_MIN or n > INT_MAX:
        raise OverflowError("integer overflow: %d" % n)
    return n


# -- mark / unval -----------------------------------------------------------

def mark(t):
    """Attach value marks to a surface term."""
    tt = type(t)
    if tt is int:
        return t
    if tt is Sym:
        return Sym(t.name, None)
    if tt is Arr:
        return Arr([mark(x) for x in t.items], VAL)
    raise TermError("mark: not a surface term: %r" % (t,))


def strip(t):
    """Surface copy of ``t`` with every mark reset to its value form."""
    tt = type(t)
    if tt is int:
        return t
    if tt is Sym:
        return Sym(t.name, None) if t.mark is not None else t
    if tt is Arr:
        return Arr([strip(x) for x in t.items], VAL)
    raise TermError("strip: not a surface term: %r" % (t,))


def unval(t):
    tt = type(t)
    if tt is Sym:
        if t.mark is None:
            return Sym(t.name, True)
        return t
    if tt is Arr:
        if t.kind == VAL and t.items:
            return Arr((unval(t.items[0]),) + t.items[1:], FRESH)
        return t
    return t


def reval(t):
    """Inverse of :func:`unval` on not-yet-evaluated code."""
    tt = type(t)
    if tt is Sym:
        return Sym(t.name, None) if t.mark is True else t
    if tt is Arr and t.kind == FRESH:
        return Arr((reval(t.items[0]),) + t.items[1:], VAL)
    return t


def has_fake(t):
    """Does ``t`` reach a fake environment (through arrays, combiner static
    envs, or env frames)?  Such constants must be instantiated at runtime."""
    tt = type(t)
    if tt is not Arr and tt is not Comb and tt is not Env:
        return False
    r = t._fk
    if r is None:
        if tt is Arr:
            r = any(has_fake(x) for x in t.items)
        elif tt is Comb:
            r = has_fake(t.static)
        else:
            r = (not t.real or any(has_fake(v) for v in t.bindings.values())
                 or (t.dval is not None and has_fake(t.dval))
                 or (t.parent is not None and has_fake(t.parent)))
        t._fk = r
    return r


# -- structural hash / equality --------------------------------------------

def thash(t):
    tt = type(t)
    if tt is int or t is None:
        return hash(t)
    h = t._h
    if h is not None:
        return h
    if tt is Sym:
        h = hash(("s", t.name, t.mark))
    elif tt is Arr:
        h = hash(("a", t.kind, t.needed, t.loop._h if t.loop else None,
                  tuple(thash(x) for x in t.items)))
    elif tt is Prim:
        h = hash(("p", t.op, t.wrap))
    elif tt is Comb:
        h = hash(("c", t.id, t.wrap, t.de, t.params, t.rest,
                  thash(t.static), thash(t.body)))
    elif tt is Env:
        h = hash(("e", t.id, t.real, t.dsym,
                  tuple(sorted((k, thash(v)) for k, v in t.bindings.items())),
                  thash(t.dval) if t.dval is not None else None,
                  thash(t.parent) if t.parent is not None else None))
    else:
        h = hash(t)
    t._h = h
    return h


def term_equal(a, b):
    if a is b:
        return True
    ta = type(a)
    if ta is not type(b):
        return False
    if ta is int:
        return a == b
    if ta in (Sym, Arr, Comb, Env, Prim) and thash(a) != thash(b):
        return False
    if ta is Sym:
        return a.name is b.name and a.mark == b.mark
    if ta is Arr:
        if (a.kind != b.kind or a.needed != b.needed or a.loop != b.loop
                or len(a.items) != len(b.items)):
            return False
        return all(term_equal(x, y) for x, y in zip(a.items, b.items))
    if ta is Prim:
        return a.op == b.op and a.wrap == b.wrap
    if ta is Comb:
        return (a.id == b.id and a.wrap == b.wrap and a.de is b.de
                and a.params == b.params and a.rest is b.rest
                and term_equal(a.static, b.static)
                and term_equal(a.body, b.body))
    if ta is Env:
        if (a.id != b.id or a.real != b.real or a.dsym is not b.dsym
                or a.bindings.keys() != b.bindings.keys()):
            return False
        if not all(term_equal(v, b.bindings[k]) for k, v in a.bindings.items()):
            return False
        if (a.dval is None) != (b.dval is None):
            return False
        if a.dval is not None and not term_equal(a.dval, b.dval):
            return False
        if (a.parent is None) != (b.parent is None):
            return False
        return a.parent is None or term_equal(a.parent, b.parent)
    return a == b


def data_equal(a, b):
    """Equality used by the ``=`` primitive: structural on data, identity
    on combiners and environments."""
    if a is b:
        return True
    ta = type(a)
    if ta is not type(b):
        return False
    if ta is int:
        return a == b
    if ta is Sym:
        return a.name is b.name
    if ta is Arr:
        return (len(a.items) == len(b.items)
                and all(data_equal(x, y) for x, y in zip(a.items, b.items)))
    if ta is Prim:
        return a.op == b.op and a.wrap == b.wrap
    if ta is Comb:
        return term_equal(a, b)
    return False
