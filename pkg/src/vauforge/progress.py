"""Needed-for-progress sets and the return-safety predicates built on them.

All three set functions are memoised on the term node, which is safe
because nodes are never mutated after construction.
"""
from .terms import ATT, FRESH, Arr, Comb, Env, Prim, Sym

TOP = "TOP"
EMPTY = frozenset()
TOPSET = frozenset((TOP,))

TAKES_DE_PRIMS = frozenset(("vau", "if0", "vif0"))


def nfp(t):
    tt = type(t)
    if tt is int or tt is Prim:
        return EMPTY
    r = t._nfp
    if r is not None:
        return r
    if tt is Sym:
        m = t.mark
        r = EMPTY if m is None else (TOPSET if m is True else frozenset((m,)))
    elif tt is Arr:
        if t.kind == FRESH:
            r = TOPSET
        else:
            r = EMPTY
            for x in t.items:
                s = nfp(x)
                if s:
                    r = r | s
            if t.kind == ATT and t.needed is not None:
                r = r | {t.needed}
    elif tt is Comb:
        r = (nfp(t.static) | nfp(t.body)) - {t.id}
    elif tt is Env:
        r = EMPTY if t.real else frozenset((t.id,))
        for v in t.bindings.values():
            s = nfp(v)
            if s:
                r = r | s
        if t.dval is not None:
            r = r | nfp(t.dval)
        if t.parent is not None:
            r = r | nfp(t.parent)
    else:
        r = EMPTY
    t._nfp = r
    return r


def nfp_upper(t):
    tt = type(t)
    if tt is Arr:
        r = t._up
        if r is None:
            r = EMPTY
            for x in t.items:
                r = r | nfp_upper(x)
            t._up = r
        return r
    if tt is Env:
        r = t._up
        if r is None:
            if not nfp(t):
                r = EMPTY
            else:
                r = frozenset((t.id,))
                for v in t.bindings.values():
                    r = r | nfp_upper(v)
                if t.dval is not None:
                    r = r | nfp_upper(t.dval)
                if t.parent is not None:
                    r = r | nfp_upper(t.parent)
            t._up = r
        return r
    return EMPTY


def nfp_infinite(t):
    if type(t) is not Arr:
        return EMPTY
    r = t._inf
    if r is None:
        r = EMPTY
        for x in t.items:
            r = r | nfp_infinite(x)
        if t.kind == ATT and t.loop is not None:
            r = r | {t.loop}
        t._inf = r
    return r


def id_in(t, i):
    return i in nfp(t) or i in nfp_upper(t)


def takes_de(t):
    tt = type(t)
    if tt is Prim:
        return t.op in TAKES_DE_PRIMS
    if tt is Comb:
        return t.de is not None
    return True


def return_ok(t, i):
    """May the partial-evaluation result ``t`` leave the frame with id ``i``?"""
    tt = type(t)
    if tt is int or tt is Prim:
        return True
    if tt is Sym:
        if t.mark is None:
            return True
        return t.mark is not True and t.mark != i
    if tt is Arr:
        if t.kind != ATT:
            return t.kind != FRESH
        head = t.items[0]
        if type(head) is Prim and head.op == "veval":
            return return_ok(t.items[2], i)
        if t.needed == i:
            return False
        if takes_de(head) and not (type(head) is Prim and head.op == "vif0"):
            return False
        if not return_ok(head, i):
            return False
        return all(return_ok(a, i) for a in t.items[1:])
    return not id_in(t, i)
