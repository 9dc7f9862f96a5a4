"""Structural census of residual code.

Macro-like operatives leave three kinds of trace when they are not
expanded away: ``veval`` nodes, calls of ``eval``, and call sites whose
operands still reach a derived operative unevaluated.  The latter show
up either as calls the specializer never entered (fresh calls whose head
resolves, through the enclosing static environment, to a wrap-0 derived
combiner) or as suspended calls waiting on the caller's environment
(``needed``).  Calls whose head is only known at runtime are counted
separately as ``dynamic_heads``.
"""
from dataclasses import dataclass

from .terms import FRESH, VAL, Arr, Comb, Env, Prim, Sym


@dataclass
class Census:
    calls: int = 0
    operative_calls: int = 0
    vevals: int = 0
    evals: int = 0
    combiners: int = 0
    dynamic_heads: int = 0

    @property
    def macro_free(self):
        return self.operative_calls == 0 and self.vevals == 0 and self.evals == 0


def census(term, env=None):
    """``env`` is the environment the residual runs in (for resolving
    heads of unspecialized calls)."""
    c = Census()
    _code(term, c, set(), env)
    return c


def _value(t, c, seen):
    tt = type(t)
    if tt is Comb:
        if id(t) in seen:
            return
        seen.add(id(t))
        c.combiners += 1
        _code(t.body, c, seen, t.static)
    elif tt is Arr:
        for x in t.items:
            _value(x, c, seen)
    elif tt is Env:
        # closures reachable through captured frames are part of the
        # program; the root and prelude frames are not
        if id(t) in seen or (t.id is not None and t.id <= 1):
            return
        seen.add(id(t))
        for v in t.bindings.values():
            _value(v, c, seen)


def _head(h, env):
    if type(h) is Sym and h.mark is not None:
        if env is None:
            return None
        if type(h.mark) is int:
            fr = env.frame(h.mark)
            if fr is None or not fr.real:
                return None
            env = fr
        v = env.find(h.name)
        if v is None or not env.real:
            # unbound, or only known through a fake frame
            return None
        return v
    return h


def _code(t, c, seen, env):
    tt = type(t)
    if tt is not Arr:
        _value(t, c, seen)
        return
    if t.kind == VAL:
        _value(t, c, seen)
        return
    head = t.items[0]
    c.calls += 1
    if type(head) is Prim:
        if head.op == "veval":
            c.vevals += 1
        elif head.op == "eval":
            c.evals += 1
    if t.kind == FRESH:
        h = _head(head, env)
        if h is None:
            c.dynamic_heads += 1
        elif type(h) is Comb and h.wrap == 0:
            c.operative_calls += 1
        elif type(h) is Prim and h.op == "eval":
            c.evals += 1
        _code(head, c, seen, env)
        for a in t.items[1:]:
            _value(a, c, seen)
        return
    if t.needed is not None:
        c.operative_calls += 1
    if type(head) is Arr or (type(head) is Sym and head.mark is not None):
        c.dynamic_heads += 1
    for x in t.items:
        _code(x, c, seen, env)
