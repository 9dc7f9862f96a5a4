"""S-expression reader and printer."""
import re
from dataclasses import dataclass

from .terms import FRESH, VAL, Arr, Comb, Env, Prim, Sym

DEFAULT_WRAP = {
    "eval": 1, "vau": 0, "wrap": 1, "unwrap": 1, "if0": 0, "vif0": 0,
    "veval": -1, "int-to-symbol": 1, "array": 1, "array?": 1,
    "combiner?": 1, "int?": 1, "symbol?": 1, "env?": 1, "len": 1,
    "idx": 1, "concat": 1, "+": 1, "<=": 1, "-": 1, "*": 1, "=": 1,
    "<": 1, "lapply": 1, "error": 1,
}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start: int
    end: int
    line: int
    col: int

    def __str__(self):
        return "%s:%d:%d" % (self.file, self.line, self.col)


class ParseError(Exception):
    def __init__(self, message, span=None):
        super().__init__("%s: %s" % (span, message) if span else message)
        self.span = span


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_INT = re.compile(r"[+-]?[0-9]+\Z")


def _position(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse(source, file="<input>", spans=None):
    """Parse source text into a list of surface terms.

    If ``spans`` is a dict it receives ``id(term) -> SourceSpan`` for
    every node built.
    """
    def span(a, b):
        return SourceSpan(file, a, b, *_position(source, a))

    stack = []
    top = []
    for m in _TOKEN.finditer(source):
        tok = m.group()
        c = tok[0]
        if c.isspace() or c == ";":
            continue
        if tok == "(":
            stack.append((m.start(), []))
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", span(m.start(), m.end()))
            start, items = stack.pop()
            node = Arr(items)
            if spans is not None:
                spans[id(node)] = span(start, m.end())
            (stack[-1][1] if stack else top).append(node)
        else:
            if _INT.match(tok):
                node = int(tok)
                if not -(1 << 63) <= node < (1 << 63):
                    raise ParseError("invalid integer %s" % tok,
                                     span(m.start(), m.end()))
            elif tok[0].isdigit() or (tok[0] in "+-" and tok[1:2].isdigit()):
                raise ParseError("invalid integer %s" % tok,
                                 span(m.start(), m.end()))
            else:
                node = Sym(tok)
                if spans is not None:
                    spans[id(node)] = span(m.start(), m.end())
            (stack[-1][1] if stack else top).append(node)
    if stack:
        raise ParseError("unbalanced '('", span(stack[-1][0], stack[-1][0] + 1))
    if not top:
        raise ParseError("empty input", span(0, 0))
    return top


def parse_one(source):
    forms = parse(source)
    if len(forms) != 1:
        raise ParseError("expected exactly one form, got %d" % len(forms))
    return forms[0]


class _Printer:
    def __init__(self, show_marks, canonical_ids):
        self.show_marks = show_marks
        self.canonical = canonical_ids
        self.ids = {}

    def id(self, i):
        if not self.canonical or i is None:
            return i
        if i not in self.ids:
            self.ids[i] = len(self.ids) + 1
        return self.ids[i]

    def out(self, t, parts):
        tt = type(t)
        if tt is int:
            parts.append(str(t))
        elif tt is Sym:
            parts.append(t.name)
            if self.show_marks and t.mark is not None:
                parts.append("@t" if t.mark is True else "@%s" % self.id(t.mark))
        elif tt is Arr:
            parts.append("(")
            for n, x in enumerate(t.items):
                if n:
                    parts.append(" ")
                self.out(x, parts)
            parts.append(")")
            if self.show_marks:
                if t.kind == VAL:
                    parts.append("#val")
                elif t.kind == FRESH:
                    parts.append("#fresh")
                elif t.needed is not None or t.loop is not None:
                    parts.append("#att[%s%s]" % (
                        "" if t.needed is None else self.id(t.needed),
                        "" if t.loop is None else ",loop"))
        elif tt is Prim:
            parts.append(t.op)
            if self.show_marks and DEFAULT_WRAP.get(t.op) != t.wrap:
                parts.append("/%d" % t.wrap)
        elif tt is Comb:
            if not self.show_marks:
                parts.append("<combiner/%d>" % t.wrap)
                return
            parts.append("(vau#%s/%d " % (self.id(t.id), t.wrap))
            if t.de is not None:
                parts.append(t.de + " ")
            names = list(t.params) + (["&", t.rest] if t.rest else [])
            parts.append("(" + " ".join(names) + ") ")
            self.out(t.body, parts)
            parts.append(")")
        elif tt is Env:
            if self.show_marks:
                parts.append("<env#%s%s>" % (self.id(t.id), "r" if t.real else "f"))
            else:
                parts.append("<env>")
        elif hasattr(t, "wrap"):
            # compiled closures from the backend
            parts.append("<combiner/%d>" % t.wrap)
        else:
            parts.append("<%s>" % type(t).__name__)


def print_term(t, show_marks=False, canonical_ids=False):
    parts = []
    _Printer(show_marks, canonical_ids).out(t, parts)
    return "".join(parts)
