"""Plain-text expression syntax: parsing and canonical rendering.

Grammar (a deliberately tiny calculator-style language)::

    expr   := ["-"] term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := atom ("^" uint)?
    atom   := uint ("/" uint)? | ident | "(" expr ")"

`/` between factors performs exact division in the fraction field, so
Laurent-style inputs like ``189*x1^6/(800*z^5)`` parse to a RatFrac.
Rendering is canonical (graded-lex descending, fixed coefficient
format), and ``parse(render(p)) == p`` for every polynomial.
"""

from __future__ import annotations

import re

from .kernel import Poly, RatFrac, Ring, as_mpq

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|([-+*/^()]))")


class ParseError(ValueError):
    def __init__(self, msg, src, pos):
        line = src.count("\n", 0, pos) + 1
        col = pos - (src.rfind("\n", 0, pos) + 1) + 1
        super().__init__("%s at line %d column %d" % (msg, line, col))
        self.line = line
        self.column = col


class UndeclaredVariable(ParseError):
    pass


class _Tokens:
    def __init__(self, src):
        self.src = src
        self.pos = 0
        self.tok = None
        self.tok_pos = 0
        self.advance()

    def advance(self):
        src = self.src
        pos = self.pos
        while pos < len(src) and src[pos].isspace():
            pos += 1
        self.tok_pos = pos
        if pos >= len(src):
            self.tok = None
            self.pos = pos
            return
        m = _TOKEN.match(src, pos)
        if not m or m.start(m.lastindex) != pos:
            raise ParseError("unexpected character %r" % src[pos], src, pos)
        self.tok = m.group(m.lastindex)
        self.pos = m.end()

    def expect(self, sym):
        if self.tok != sym:
            raise ParseError("expected %r, found %r" % (sym, self.tok),
                             self.src, self.tok_pos)
        self.advance()


def parse(src, ring):
    """Parse an expression over `ring`; returns Poly, or RatFrac when a
    division leaves a nontrivial denominator."""
    toks = _Tokens(src)
    value = _expr(toks, ring)
    if toks.tok is not None:
        raise ParseError("trailing input %r" % toks.tok, src, toks.tok_pos)
    if isinstance(value, RatFrac) and value.den == 1:
        return value.num
    return value


def parse_poly(src, ring):
    v = parse(src, ring)
    if isinstance(v, RatFrac):
        v = v.as_poly()
    return v


def _expr(toks, ring):
    negate = False
    if toks.tok == "-":
        negate = True
        toks.advance()
    acc = _term(toks, ring)
    if negate:
        acc = -acc
    while toks.tok in ("+", "-"):
        op = toks.tok
        toks.advance()
        rhs = _term(toks, ring)
        acc = acc + rhs if op == "+" else acc - rhs
    return acc


def _term(toks, ring):
    acc = _factor(toks, ring)
    while toks.tok in ("*", "/"):
        op = toks.tok
        toks.advance()
        rhs = _factor(toks, ring)
        if op == "*":
            acc = acc * rhs
        else:
            if isinstance(acc, Poly):
                acc = RatFrac(acc)
            acc = acc / (rhs if isinstance(rhs, (Poly, RatFrac))
                         else ring.const(rhs))
    return acc


def _factor(toks, ring):
    base = _atom(toks, ring)
    if toks.tok == "^":
        toks.advance()
        if toks.tok is None or not toks.tok.isdigit():
            raise ParseError("exponent must be an unsigned integer",
                             toks.src, toks.tok_pos)
        e = int(toks.tok)
        toks.advance()
        base = base ** e
    return base


def _atom(toks, ring):
    t = toks.tok
    if t is None:
        raise ParseError("unexpected end of input", toks.src, toks.tok_pos)
    if t.isdigit():
        toks.advance()
        num = int(t)
        if toks.tok == "/":
            # lookahead: only fold "a/b" when b is a bare integer literal,
            # otherwise leave the division to the term level
            save_pos, save_tok, save_tp = toks.pos, toks.tok, toks.tok_pos
            toks.advance()
            if toks.tok is not None and toks.tok.isdigit():
                den = int(toks.tok)
                toks.advance()
                if den == 0:
                    raise ParseError("zero denominator", toks.src, save_tp)
                if toks.tok == "^":
                    toks.advance()
                    if toks.tok is None or not toks.tok.isdigit():
                        raise ParseError("exponent must be an unsigned "
                                         "integer", toks.src, toks.tok_pos)
                    den **= int(toks.tok)
                    toks.advance()
                return ring.const(as_mpq(num) / den)
            toks.pos, toks.tok, toks.tok_pos = save_pos, save_tok, save_tp
        return ring.const(num)
    if t == "(":
        toks.advance()
        v = _expr(toks, ring)
        toks.expect(")")
        return v
    if t[0].isalpha():
        if t not in ring.index:
            raise UndeclaredVariable("undeclared variable %r" % t,
                                     toks.src, toks.tok_pos)
        toks.advance()
        return ring.var(t)
    raise ParseError("unexpected token %r" % t, toks.src, toks.tok_pos)


# ---------------------------------------------------------------------------
# rendering


def render(p):
    """Canonical text for a Poly: graded-lex descending monomials."""
    if not isinstance(p, Poly):
        return render_frac(p)
    if p.is_zero():
        return "0"
    chunks = []
    for exps, coeff in p.terms():
        mono = "*".join(
            name if e == 1 else "%s^%d" % (name, e)
            for name, e in zip(p.ring.vars, exps) if e)
        neg = coeff < 0
        c = -coeff if neg else coeff
        if not mono:
            body = _coeff_str(c)
        elif c == 1:
            body = mono
        else:
            body = "%s*%s" % (_coeff_str(c), mono)
        if not chunks:
            chunks.append("-" + body if neg else body)
        else:
            chunks.append((" - " if neg else " + ") + body)
    return "".join(chunks)


def render_frac(f):
    if f.den == 1:
        return render(f.num)
    num = render(f.num)
    den = render(f.den)
    if len(f.num.t) > 1:
        num = "(%s)" % num
    return "%s/(%s)" % (num, den)


def _coeff_str(c):
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)
