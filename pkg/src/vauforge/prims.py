"""Data primitives shared by the interpreter, partial evaluator and VM.

Control primitives (eval, vau, if0, vif0, veval, lapply) depend on the
engine and live there; everything here is a pure function of already
evaluated arguments.
"""
from .terms import VAL, Arr, Comb, Env, Prim, Sym, check_int, data_equal


class PrimError(Exception):
    """Raised with ``kind`` in {"type", "arity", "index-out-of-bounds",
    "overflow", "user-error"}."""

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


def is_combiner(v):
    return type(v) in (Prim, Comb) or hasattr(v, "invoke")


def _ints(op, args):
    for a in args:
        if type(a) is not int:
            raise PrimError("type", "%s: expected integer, got %s" % (op, _show(a)))


def _show(v):
    from .reader import print_term
    return print_term(v)


def _arity(op, args, n):
    if len(args) != n:
        raise PrimError("arity", "%s: expected %d argument(s), got %d" % (op, n, len(args)))


def _array(op, a):
    if type(a) is not Arr:
        raise PrimError("type", "%s: expected array, got %s" % (op, _show(a)))
    return a.items


def p_add(args):
    _ints("+", args)
    try:
        return check_int(sum(args))
    except OverflowError as e:
        raise PrimError("overflow", str(e))


def p_sub(args):
    _ints("-", args)
    if not args:
        raise PrimError("arity", "-: expected at least one argument")
    r = -args[0] if len(args) == 1 else args[0] - sum(args[1:])
    try:
        return check_int(r)
    except OverflowError as e:
        raise PrimError("overflow", str(e))


def p_mul(args):
    _ints("*", args)
    r = 1
    for a in args:
        r *= a
    try:
        return check_int(r)
    except OverflowError as e:
        raise PrimError("overflow", str(e))


def _chain(op, args, rel):
    _ints(op, args)
    for a, b in zip(args, args[1:]):
        if not rel(a, b):
            return 1
    return 0


def p_le(args):
    return _chain("<=", args, lambda a, b: a <= b)


def p_lt(args):
    return _chain("<", args, lambda a, b: a < b)


def p_eq(args):
    for a, b in zip(args, args[1:]):
        if not data_equal(a, b):
            return 1
    return 0


def p_len(args):
    _arity("len", args, 1)
    return len(_array("len", args[0]))


def p_idx(args):
    _arity("idx", args, 2)
    items = _array("idx", args[0])
    if type(args[1]) is not int:
        raise PrimError("type", "idx: expected integer index")
    n = args[1]
    if not 0 <= n < len(items):
        raise PrimError("index-out-of-bounds", "idx: %d not in [0, %d)" % (n, len(items)))
    return items[n]


def p_concat(args):
    out = []
    for a in args:
        out.extend(_array("concat", a))
    return Arr(out, VAL)


def p_array(args):
    return Arr(args, VAL)


def _typetest(kind):
    def test(args):
        _arity(kind.__name__, args, 1)
        return 0 if kind(args[0]) else 1
    return test


def _is_array(v):
    return type(v) is Arr


def _is_int(v):
    return type(v) is int


def _is_symbol(v):
    return type(v) is Sym


def _is_env(v):
    return type(v) is Env


def p_int_to_symbol(args):
    _arity("int-to-symbol", args, 1)
    _ints("int-to-symbol", args)
    return Sym("s%d" % args[0])


def p_wrap(args):
    _arity("wrap", args, 1)
    c = args[0]
    if type(c) is Prim or type(c) is Comb:
        return c.with_wrap(c.wrap + 1)
    if hasattr(c, "with_wrap"):
        return c.with_wrap(c.wrap + 1)
    raise PrimError("type", "wrap: expected combiner, got %s" % _show(c))


def p_unwrap(args):
    _arity("unwrap", args, 1)
    c = args[0]
    if not is_combiner(c):
        raise PrimError("type", "unwrap: expected combiner, got %s" % _show(c))
    if c.wrap <= 0:
        raise PrimError("type", "unwrap: combiner already has wrap level %d" % c.wrap)
    return c.with_wrap(c.wrap - 1)


def p_error(args):
    raise PrimError("user-error", "error: " + " ".join(_show(a) for a in args))


DATA_PRIMS = {
    "+": p_add, "-": p_sub, "*": p_mul, "<=": p_le, "<": p_lt, "=": p_eq,
    "len": p_len, "idx": p_idx, "concat": p_concat, "array": p_array,
    "array?": _typetest(_is_array), "int?": _typetest(_is_int),
    "symbol?": _typetest(_is_symbol), "env?": _typetest(_is_env),
    "combiner?": _typetest(is_combiner),
    "int-to-symbol": p_int_to_symbol, "wrap": p_wrap, "unwrap": p_unwrap,
    "error": p_error,
}

CONTROL_PRIMS = ("eval", "vau", "if0", "lapply")
# Internal primitives that never appear in the user-visible root env.
INTERNAL_PRIMS = ("vif0", "veval")


def root_bindings():
    from .reader import DEFAULT_WRAP
    names = list(DATA_PRIMS) + list(CONTROL_PRIMS)
    return {n: Prim(n, DEFAULT_WRAP[n]) for n in names}


def parse_params(p):
    """Split a parameter array into (names, rest_name)."""
    if type(p) is not Arr:
        raise PrimError("type", "vau: parameter list must be an array")
    names = []
    rest = None
    items = p.items
    i = 0
    while i < len(items):
        s = items[i]
        if type(s) is not Sym:
            raise PrimError("type", "vau: parameters must be symbols")
        if s.name == "&":
            if i + 2 != len(items) or type(items[i + 1]) is not Sym:
                raise PrimError("type", "vau: '&' must be followed by one symbol")
            rest = items[i + 1].name
            break
        names.append(s.name)
        i += 1
    return tuple(names), rest


def vau_parts(args):
    """Decode vau's arguments into (de_name, params, rest, body)."""
    if len(args) == 3:
        de, p, body = args
        if type(de) is not Sym:
            raise PrimError("type", "vau: dynamic-environment name must be a symbol")
        de = de.name
    elif len(args) == 2:
        de = None
        p, body = args
    else:
        raise PrimError("arity", "vau: expected 2 or 3 arguments, got %d" % len(args))
    params, rest = parse_params(p)
    return de, params, rest, body


def bind_args(c, args):
    """Parameter bindings for calling derived combiner ``c`` with ``args``."""
    params = c.params
    n = len(params)
    if c.rest is None:
        if len(args) != n:
            raise PrimError("arity", "combiner expects %d argument(s), got %d" % (n, len(args)))
        return dict(zip(params, args))
    if len(args) < n:
        raise PrimError("arity", "combiner expects at least %d argument(s), got %d" % (n, len(args)))
    b = dict(zip(params, args))
    b[c.rest] = Arr(args[n:], VAL)
    return b
