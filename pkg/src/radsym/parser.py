"""Parser and printer for the expression grammar.

Grammar (whitespace insignificant, UTF-8):

    expr    :=  term (('+' | '-') term)*
    term    :=  factor (('*' | '/') factor)*
    factor  :=  ('+' | '-')* power
    power   :=  atom ('^' factor)?
    atom    :=  NUMBER | IDENT | CALL | '(' expr ')'
    CALL    :=  'F' '(' expr ',' expr ')' | 'ln' '(' expr ')'
              | 'exp' '(' expr ')' | 'abs' '(' expr ')'
    NUMBER  :=  [0-9]+
    IDENT   :=  't' | 'r' | 'p' | 'm' | 'sigma' | 'i' | 'eps' | 'sqrt2'
              | DEP | DEP '_' 't'* 'r'*
    DEP     :=  'u' | 'ubar' | 'v' | 'vbar' | 'w' | 'wbar'

Jet suffixes put all t-derivatives before r-derivatives (`u_trr`, never
`u_rtr`).  Rational literals are ordinary divisions (`3/4`).  `F(x,q)`
expands to `(1/q)*x^q` when q is a nonzero coefficient and to `ln(x)`
when q normalizes to zero.  `abs(x)` expands to `(x*conj(x))^(1/2)`, so
`abs(u)^q` is `(u*ubar)^(q/2)`.  `w`/`wbar` extend the dependent-variable
set so second-level potential variables can be written down directly.

Exponents (after `^`) and the second argument of `F` must normalize to
plain coefficient values (built from numbers, p, m, sigma, i, eps, sqrt2).

Syntax errors carry the byte offset of the offending token.
"""

from __future__ import annotations

from .coeffs import C_ONE, C_P, C_M, C_I, C_EPS, C_SQRT2, C_SIGMA, Coeff
from .expr import (Add, Const, ExpF, Expr, ExprError, Jet, Ln, Mul, Pow,
                   Sym, Unk, DEPS, add, con, conjugate, exp_e, ln_e, mul,
                   normalize, pw)


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__("%s (at byte %d)" % (msg, pos))
        self.pos = pos


_PARAMS = {"p": C_P, "m": C_M, "sigma": C_SIGMA, "i": C_I, "eps": C_EPS,
           "sqrt2": C_SQRT2}


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\n\r":
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum()):
                j += 1
            word = text[i:j]
            # optional jet suffix
            if j < n and text[j] == "_" and j + 1 < n and text[j + 1] in "tr":
                k = j + 1
                while k < n and text[k] in "tr":
                    k += 1
                suffix = text[j + 1:k]
                toks.append(("jet", (word, suffix), i))
                i = k
                continue
            toks.append(("name", word, i))
            i = j
            continue
        if ch in "+-*/^(),":
            toks.append((ch, ch, i))
            i += 1
            continue
        raise ParseError("unexpected character %r" % ch, i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError("expected %r, found %r" % (kind, t[1]), t[2])
        return t

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError("trailing input %r" % t[1], t[2])
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            t = self.term()
            terms.append(t if op == "+" else -t)
        return add(*terms)

    def term(self):
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            f = self.factor()
            e = mul(e, f) if op == "*" else e / f
        return e

    def factor(self):
        sign = 1
        while self.peek()[0] in ("+", "-"):
            if self.next()[0] == "-":
                sign = -sign
        e = self.power()
        return e if sign > 0 else -e

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            expo = self.factor()
            q = _as_coeff(expo, self.peek()[2])
            if isinstance(base, tuple):  # pending abs(x)
                return pw(base[0] * conjugate(base[0]), q * _HALF)
            return pw(base, q)
        if isinstance(base, tuple):
            return pw(base[0] * conjugate(base[0]), _HALF)
        return base

    def atom(self):
        t = self.next()
        kind, val, at = t
        if kind == "num":
            return con(int(val))
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "jet":
            dep, suffix = val
            if dep not in DEPS:
                raise ParseError("unknown dependent symbol %r" % dep, at)
            nt = suffix.count("t")
            nr = suffix.count("r")
            if "t" in suffix and "r" in suffix \
                    and suffix != "t" * nt + "r" * nr:
                raise ParseError(
                    "jet suffix must list t-derivatives first", at)
            return Jet(dep, nt, nr)
        if kind == "name":
            if val in ("t", "r"):
                return Sym(val)
            if val in DEPS:
                return Jet(val)
            if val in _PARAMS:
                return Const(_PARAMS[val])
            if val in ("F", "ln", "exp", "abs"):
                return self.call(val, at)
            raise ParseError("unknown identifier %r" % val, at)
        raise ParseError("unexpected token %r" % val, at)

    def call(self, name, at):
        self.expect("(")
        arg = self.expr()
        if name == "F":
            self.expect(",")
            qe = self.expr()
            self.expect(")")
            q = _as_coeff(qe, at)
            return _expand_F(arg, q)
        self.expect(")")
        if name == "ln":
            return ln_e(arg)
        if name == "exp":
            return exp_e(arg)
        # abs: defer so a following '^' can fold into the exponent
        return (arg,)


_HALF = Coeff.from_int(1) / Coeff.from_int(2)


def _as_coeff(e, at):
    if isinstance(e, tuple):
        raise ParseError("abs(...) cannot be used as an exponent", at)
    nf = normalize(e)
    if not nf:
        return Coeff.from_int(0)
    if len(nf) == 1 and () in nf:
        return nf[()]
    raise ParseError("expected a coefficient-valued expression", at)


def _expand_F(x, q):
    if isinstance(x, tuple):  # F(abs(u), q)
        x = x[0] * conjugate(x[0])
        if q.is_zero():
            return ln_e(pw(x, _HALF))
        return Const(q.inverse()) * pw(x, q * _HALF)
    if q.is_zero():
        return ln_e(x)
    return Const(q.inverse()) * pw(x, q)


def parse(text):
    """Parse grammar text into an expression tree."""
    e = _Parser(text).parse()
    if isinstance(e, tuple):  # bare abs(x) at top level
        return pw(e[0] * conjugate(e[0]), _HALF)
    return e


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _prec(e):
    if isinstance(e, (Sym, Jet, Ln, ExpF, Unk)):
        return _PREC_ATOM
    if isinstance(e, Const):
        txt = e.coeff.to_text()
        if " + " in txt or " - " in txt:
            return _PREC_ADD
        if txt.startswith("-"):
            return _PREC_MUL  # unary sign: fine inside products
        return _PREC_ATOM if ("*" not in txt and "/" not in txt) \
            else _PREC_MUL
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, Mul):
        return _PREC_MUL
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def to_text(e):
    """Render an expression in the grammar; parse(to_text(e)) == e up to
    normalization."""
    if isinstance(e, Const):
        return e.coeff.to_text()
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Jet):
        return e.name()
    if isinstance(e, Unk):
        return e.label()
    if isinstance(e, Add):
        out = ""
        for t in e.terms:
            txt = _wrap(t, _PREC_ADD)
            if not out:
                out = txt
            elif txt.startswith("-"):
                out += " - " + txt[1:]
            else:
                out += " + " + txt
        return out
    if isinstance(e, Mul):
        return "*".join(_wrap(f, _PREC_MUL) for f in e.factors)
    if isinstance(e, Pow):
        b = _wrap(e.base, _PREC_ATOM)
        x = e.exp
        n = x.as_int()
        if n is not None and n >= 0:
            return "%s^%d" % (b, n)
        return "%s^(%s)" % (b, x.to_text())
    if isinstance(e, Ln):
        return "ln(%s)" % to_text(e.arg)
    if isinstance(e, ExpF):
        return "exp(%s)" % to_text(e.arg)
    raise ExprError("cannot print %r" % (e,))


def _wrap(e, need):
    txt = to_text(e)
    if _prec(e) < need:
        return "(" + txt + ")"
    return txt
