"""Random closed Kraken programs for the three-way equivalence checks.

Programs are built from prelude forms, integer arithmetic, if0, vau,
wrap/unwrap and eval, up to a fixed nesting depth.  ``main-arg`` is the
only free name and is bound by the entry, so the specializer sees a
dynamic input.  Loops are bounded by small literal counts.
"""
import random

BINOPS = ("+", "-", "*", "<", "=", "<=")


class ProgramGen:
    def __init__(self, seed, max_depth=5):
        self.r = random.Random(seed)
        self.max_depth = max_depth
        self.n = 0

    def fresh(self, base="v"):
        self.n += 1
        return "%s%d" % (base, self.n)

    def leaf(self, scope):
        r = self.r.random()
        if r < 0.35 and scope:
            return self.r.choice(scope)
        if r < 0.55:
            return "main-arg"
        return str(self.r.randint(-3, 12))

    def expr(self, depth, scope):
        if depth >= self.max_depth or self.r.random() < 0.15:
            return self.leaf(scope)
        d = depth + 1
        e = lambda: self.expr(d, scope)
        # forms that can fail at runtime are rare so most programs finish
        k = self.r.randrange(22) if self.r.random() > 0.04 else self.r.randrange(22, 25)
        if k < 4:
            return "(%s %s %s)" % (self.r.choice(BINOPS), e(), e())
        if k == 4:
            return "(if0 %s %s %s)" % (e(), e(), e())
        if k == 5:
            return "(if %s %s %s)" % (e(), e(), e())
        if k == 6:
            x = self.fresh()
            return "(let (%s %s) %s)" % (x, e(), self.expr(d, scope + [x]))
        if k == 7:
            x, y = self.fresh(), self.fresh()
            return "((lambda (%s %s) %s) %s %s)" % (
                x, y, self.expr(d, scope + [x, y]), e(), e())
        if k == 8:
            # operative that evaluates its operand in the caller's env
            x, de = self.fresh("c"), self.fresh("de")
            return "((vau %s (%s) (eval %s %s)) %s)" % (de, x, x, de, e())
        if k == 9:
            # macro-like: builds code from operands, evals it in de
            a, b, de = self.fresh("c"), self.fresh("c"), self.fresh("de")
            op = self.r.choice(("+", "-", "*"))
            return "((vau %s (%s %s) (eval (array %s %s %s) %s)) %s %s)" % (
                de, a, b, op, b, a, de, e(), e())
        if k == 10:
            x = self.fresh()
            return "((wrap (vau (%s) %s)) %s)" % (x, self.expr(d, scope + [x]), e())
        if k == 11:
            return "(eval (quote %s))" % e()
        if k == 12:
            return "(len (array %s %s))" % (e(), e())
        if k == 13:
            return "(idx (array %s %s %s) %d)" % (e(), e(), e(), self.r.randint(0, 2))
        if k == 14:
            return "(%s %s %s)" % (self.r.choice(("and", "or")), e(), e())
        if k == 15:
            x, y = self.fresh(), self.fresh()
            return "(lapply (lambda (%s %s) %s) (array %s %s))" % (
                x, y, self.expr(d, scope + [x, y]), e(), e())
        if k == 16:
            a, b = self.fresh(), self.fresh()
            return "(match (array %s %s) (%s %s) %s)" % (
                e(), e(), a, b, self.expr(d, scope + [a, b]))
        if k == 17:
            f, n, acc = self.fresh("f"), self.fresh("n"), self.fresh("acc")
            body = self.expr(d + 1, scope + [n, acc])
            return ("((rec-lambda %s (%s %s) (if0 (< %s 1) %s (%s (- %s 1) %s))) %d %s)"
                    % (f, n, acc, n, acc, f, n, body, self.r.randint(0, 4), e()))
        if k == 18:
            # operand returned unevaluated, then evaluated explicitly
            x = self.fresh()
            return "(eval ((unwrap (lambda (%s) %s)) %s))" % (x, x, e())
        if k == 19:
            return "(cond %s %s true %s)" % (e(), e(), e())
        if k == 20:
            # an operative defined through another operative
            m, de, x = self.fresh("m"), self.fresh("de"), self.fresh("c")
            de2, y = self.fresh("de"), self.fresh("c")
            return ("(let (%s (vau %s (%s) (eval (array + %s 1) %s))) "
                    "((vau %s (%s) (eval (array %s %s) %s)) %s))"
                    % (m, de, x, x, de, de2, y, m, y, de2, e()))
        if k == 21:
            return "(not %s)" % e()
        if k == 22:
            return "(idx (array %s %s) %s)" % (e(), e(), e())
        if k == 23:
            return "(if0 %s %s (error (quote boom)))" % (e(), e())
        return "(+ %s (quote s))" % e()

    def program(self):
        return self.expr(0, [])


def programs(count, seed=0, max_depth=5):
    g = ProgramGen(seed, max_depth)
    return [g.program() for _ in range(count)]
