"""Plain-Python reference answers for the benchmark programs.

Each oracle recomputes the benchmark's result without going through the
Kraken prelude, and renders it in reader syntax so it can be compared
against ``print_term`` of the program's value.
"""
from itertools import permutations


def show(t):
    if isinstance(t, tuple):
        return "(" + " ".join(show(x) for x in t) + ")"
    return str(t)


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def nqueens(n):
    """Brute force over column permutations (rows and columns distinct by
    construction, so only diagonals need checking)."""
    count = 0
    for cols in permutations(range(n)):
        if all(abs(cols[i] - cols[j]) != j - i
               for i in range(n) for j in range(i + 1, n)):
            count += 1
    return count


# -- red-black tree (Okasaki insertion, tuples (color, left, key, right)) --

E = None


def _balance(c, l, k, r):
    if c == "B":
        if l and l[0] == "R" and l[1] and l[1][0] == "R":
            _, (_, a, x, b), y, c2 = l
            return ("R", ("B", a, x, b), y, ("B", c2, k, r))
        if l and l[0] == "R" and l[3] and l[3][0] == "R":
            _, a, x, (_, b, y, c2) = l
            return ("R", ("B", a, x, b), y, ("B", c2, k, r))
        if r and r[0] == "R" and r[1] and r[1][0] == "R":
            _, (_, b, y, c2), z, d = r
            return ("R", ("B", l, k, b), y, ("B", c2, z, d))
        if r and r[0] == "R" and r[3] and r[3][0] == "R":
            _, b, y, (_, c2, z, d) = r
            return ("R", ("B", l, k, b), y, ("B", c2, z, d))
    return (c, l, k, r)


def rb_insert(t, k):
    def ins(t):
        if t is E:
            return ("R", E, k, E)
        c, l, y, r = t
        if k < y:
            return _balance(c, ins(l), y, r)
        if y < k:
            return _balance(c, l, y, ins(r))
        return t
    _, l, y, r = ins(t)
    return ("B", l, y, r)


def rb_sum(t):
    total, stack = 0, [t]
    while stack:
        t = stack.pop()
        if t is not E:
            total += t[2]
            stack.append(t[1])
            stack.append(t[3])
    return total


def rb_check(t):
    """Black height of a valid red-black tree; raises on a violation."""
    if t is E:
        return 1
    c, l, _, r = t
    if c == "R":
        for child in (l, r):
            if child is not E and child[0] == "R":
                raise AssertionError("red node with red child")
    hl, hr = rb_check(l), rb_check(r)
    if hl != hr:
        raise AssertionError("unequal black heights")
    return hl + (c == "B")


def rbtree(n):
    """Same insertion order as the benchmark: ten interleaved batches."""
    t = E
    for b in range(10):
        for k in range(b, n, 10):
            t = rb_insert(t, k)
    rb_check(t)
    return rb_sum(t)


# -- symbolic terms: "x", ints, ("+", a, b), ("*", a, b) ---------------------

def poly(i):
    if i == 0:
        return 1
    return ("+", ("*", "x", poly(i - 1)), i)


def deriv_term(e):
    if isinstance(e, tuple):
        op, a, b = e
        if op == "+":
            return ("+", deriv_term(a), deriv_term(b))
        return ("+", ("*", deriv_term(a), b), ("*", a, deriv_term(b)))
    return 1 if e == "x" else 0


def deriv(n):
    return show(deriv_term(deriv_term(poly(n))))


def cfold_input(i, p=0):
    if i == 0:
        return "x"
    if p == 0:
        return ("*", ("+", i, ("+", 1, 0)), cfold_input(i - 1, 1))
    return ("+", cfold_input(i - 1, 0), ("*", i, 2))


def _add(a, b):
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    if a == 0:
        return b
    if b == 0:
        return a
    return ("+", a, b)


def _mul(a, b):
    if isinstance(a, int) and isinstance(b, int):
        return a * b
    if a == 0 or b == 0:
        return 0
    if a == 1:
        return b
    if b == 1:
        return a
    return ("*", a, b)


def fold(e):
    if isinstance(e, tuple):
        op, a, b = e
        return (_add if op == "+" else _mul)(fold(a), fold(b))
    return e


def cfold(n):
    return show(fold(cfold_input(n)))


ORACLES = {
    "fib": lambda n: str(fib(n)),
    "nqueens": lambda n: str(nqueens(n)),
    "rbtree": lambda n: str(rbtree(n)),
    "deriv": deriv,
    "cfold": cfold,
}


def expected(name, n):
    return ORACLES[name](n)
