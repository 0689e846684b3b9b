"""Expression trees over jet-space coordinates, and their normal form.

Node kinds: coefficient constants, the independent variables t and r, jet
variables u_(nt,nr) (and ubar/v/vbar/w/wbar likewise), sums, products,
powers with coefficient-valued exponents, ln, exp, and opaque unknown
functions (used only when emitting determining systems).

The normal form maps monomial signatures -- sorted (atom, exponent) lists
-- to coefficients.  Two expressions are semantically equal iff their
normal forms are identical, which gives the decidable zero test that every
verification routine rests on.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import (Coeff, C_ZERO, C_ONE, C_P, C_M, C_I, C_EPS, C_SQRT2,
                     C_SIGMA, rational)


class ExprError(Exception):
    pass


class Expr:
    __slots__ = ()

    # operator sugar so engine code reads like algebra
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, mul(MINUS_ONE, _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), mul(MINUS_ONE, self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        o = _coerce(other)
        if isinstance(o, Const):
            return mul(self, Const(o.coeff.inverse()))
        return mul(self, pw(o, -1))

    def __rtruediv__(self, other):
        return _coerce(other) * pw(self, -1)

    def __neg__(self):
        return mul(MINUS_ONE, self)

    def __pow__(self, e):
        return pw(self, e)


class Const(Expr):
    __slots__ = ("coeff",)

    def __init__(self, coeff):
        self.coeff = coeff

    def __repr__(self):
        return "Const(%s)" % self.coeff.to_text()


class Sym(Expr):
    """An independent variable: t or r."""

    __slots__ = ("name",)

    def __init__(self, name):
        if name not in ("t", "r"):
            raise ExprError("unknown independent variable %r" % name)
        self.name = name

    def __repr__(self):
        return self.name


DEPS = ("u", "ubar", "v", "vbar", "w", "wbar")
_CONJ_DEP = {"u": "ubar", "ubar": "u", "v": "vbar", "vbar": "v",
             "w": "wbar", "wbar": "w"}


class Jet(Expr):
    """Jet coordinate: dependent symbol with (t-order, r-order)."""

    __slots__ = ("dep", "nt", "nr")

    def __init__(self, dep, nt=0, nr=0):
        if dep not in DEPS:
            raise ExprError("unknown dependent symbol %r" % dep)
        self.dep = dep
        self.nt = nt
        self.nr = nr

    def name(self):
        if self.nt == 0 and self.nr == 0:
            return self.dep
        return self.dep + "_" + "t" * self.nt + "r" * self.nr

    def key(self):
        return ("jet", self.dep, self.nt, self.nr)

    def __repr__(self):
        return self.name()


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = terms

    def __repr__(self):
        return "Add%r" % (self.terms,)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = factors

    def __repr__(self):
        return "Mul%r" % (self.factors,)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        self.base = base
        self.exp = exp  # a Coeff

    def __repr__(self):
        return "Pow(%r, %s)" % (self.base, self.exp.to_text())


class Ln(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def __repr__(self):
        return "Ln(%r)" % (self.arg,)


class ExpF(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def __repr__(self):
        return "Exp(%r)" % (self.arg,)


class Unk(Expr):
    """Unknown point function (for determining systems): name(args...),
    differentiated per the multi-index dmi (parallel to args)."""

    __slots__ = ("fname", "args", "dmi")

    def __init__(self, fname, args, dmi=None):
        self.fname = fname
        self.args = tuple(args)
        self.dmi = tuple(dmi) if dmi is not None else (0,) * len(self.args)

    def label(self):
        suffix = ""
        for a, d in zip(self.args, self.dmi):
            suffix += ("," + a) * d
        if suffix:
            return "%s_{%s}" % (self.fname, suffix.lstrip(","))
        return self.fname

    def __repr__(self):
        return self.label()


ZERO = Const(C_ZERO)
ONE = Const(C_ONE)
MINUS_ONE = Const(Coeff.from_int(-1))
T = Sym("t")
R = Sym("r")
U = Jet("u")
UBAR = Jet("ubar")
V = Jet("v")


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, Coeff):
        return Const(x)
    if isinstance(x, int):
        return Const(Coeff.from_int(x))
    if isinstance(x, Fraction):
        return Const(Coeff.from_fraction(x))
    raise TypeError("cannot use %r in an expression" % (x,))


def con(x):
    """Constant expression from int/Fraction/Coeff."""
    return _coerce(x)


# ---------------------------------------------------------------------------
# smart constructors (flattening, light folding)
# ---------------------------------------------------------------------------

def add(*es):
    flat = []
    acc = C_ZERO
    for e in es:
        e = _coerce(e)
        if isinstance(e, Add):
            for t in e.terms:
                if isinstance(t, Const):
                    acc = acc + t.coeff
                else:
                    flat.append(t)
        elif isinstance(e, Const):
            acc = acc + e.coeff
        else:
            flat.append(e)
    if not acc.is_zero():
        flat.append(Const(acc))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*es):
    flat = []
    acc = C_ONE
    for e in es:
        e = _coerce(e)
        if isinstance(e, Mul):
            for f in e.factors:
                if isinstance(f, Const):
                    acc = acc * f.coeff
                else:
                    flat.append(f)
        elif isinstance(e, Const):
            acc = acc * e.coeff
        else:
            flat.append(e)
    if acc.is_zero():
        return ZERO
    if not flat:
        return Const(acc)
    if not acc.is_one():
        flat.insert(0, Const(acc))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def pw(base, e):
    base = _coerce(base)
    if isinstance(e, (int, Fraction)):
        e = Coeff.from_fraction(Fraction(e)) if not isinstance(e, int) \
            else Coeff.from_int(e)
    if not isinstance(e, Coeff):
        raise ExprError("power exponent must be a coefficient")
    if e.is_zero():
        return ONE
    if e.is_one():
        return base
    if isinstance(base, Const):
        n = e.as_int()
        if base.coeff.is_one():
            return ONE
        if n is not None:
            return Const(base.coeff ** n)
        q = e.as_fraction()
        bq = base.coeff.as_fraction()
        if q is not None and bq is not None and bq > 0:
            # exact rational root if one exists, else keep symbolic power
            r = _exact_frac_pow(bq, q)
            if r is not None:
                return Const(Coeff.from_fraction(r))
        raise ExprError("unsupported power of a constant: (%s)^(%s)"
                        % (base.coeff.to_text(), e.to_text()))
    if isinstance(base, Pow):
        return pw(base.base, base.exp * e)
    if isinstance(base, ExpF):
        return ExpF(mul(Const(e), base.arg))
    if isinstance(base, Mul):
        return mul(*[pw(f, e) for f in base.factors])
    return Pow(base, e)


def _exact_frac_pow(b, q):
    # b ** q for positive rational b, rational q; None when not rational
    if q.denominator == 1:
        return b ** q.numerator
    num = _iroot(b.numerator, q.denominator)
    den = _iroot(b.denominator, q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** q.numerator


def _iroot(n, k):
    if n < 0:
        return None
    x = round(n ** (1.0 / k))
    for c in (x - 1, x, x + 1):
        if c >= 0 and c ** k == n:
            return c
    return None


def exp_e(arg):
    arg = _coerce(arg)
    if isinstance(arg, Const) and arg.coeff.is_zero():
        return ONE
    return ExpF(arg)


def ln_e(arg):
    return Ln(_coerce(arg))


def jet(dep, nt=0, nr=0):
    return Jet(dep, nt, nr)


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------
#
# An NF is a dict: monomial-key -> Coeff.  A monomial key is a tuple of
# (atom, exponent Coeff) pairs sorted by a stable structural order.  Atoms:
#   ('t',) ('r',) ('jet', dep, nt, nr)
#   ('ln', frozen-nf) ('exp', frozen-nf) ('psum', frozen-nf)
#   ('unk', fname, args, dmi)
# frozen-nf is tuple(sorted((monokey, coeff-sort-key, coeff) ...)) -- see
# _freeze_nf.  The 'exp' atom always wraps a single content-one monomial;
# exp of a sum normalizes to a product of such atoms.

def _coeff_skey(c):
    parts = tuple(sorted((k, tuple(sorted(v.terms.items())))
                         for k, v in c.parts.items()))
    return (parts, tuple(sorted(c.den.terms.items())))


_ATOM_RANK = {"t": 0, "r": 1, "jet": 2, "ln": 3, "exp": 4, "psum": 5,
              "unk": 6}


def _atom_skey(atom):
    tag = atom[0]
    rank = _ATOM_RANK[tag]
    if tag in ("t", "r"):
        return (rank,)
    if tag == "jet":
        return (rank, DEPS.index(atom[1]), atom[2], atom[3])
    if tag == "unk":
        return (rank, atom[1], atom[2], atom[3])
    # nested frozen nf: already built from sortable primitives
    return (rank, _frozen_skey(atom[1]))


def _frozen_skey(fnf):
    return tuple((tuple(_pair_skey(pr) for pr in key), _coeff_skey(co))
                 for key, co in fnf)


def _pair_skey(pair):
    return (_atom_skey(pair[0]), _coeff_skey(pair[1]))


def _sort_monokey(pairs):
    return tuple(sorted(pairs, key=_pair_skey))


def _freeze_nf(nf):
    items = [(k, nf[k]) for k in nf]
    items.sort(key=lambda kv: (tuple(_pair_skey(p) for p in kv[0]),
                               _coeff_skey(kv[1])))
    return tuple(items)


def nf_zero():
    return {}


def nf_add(a, b):
    out = dict(a)
    for k, c in b.items():
        w = out.get(k)
        if w is None:
            out[k] = c
        else:
            s = w + c
            if s.is_zero():
                del out[k]
            else:
                out[k] = s
    return out


def nf_scale(a, c):
    if c.is_zero():
        return {}
    return {k: v * c for k, v in a.items()}


def nf_mul(a, b):
    out = {}
    for k1, c1 in a.items():
        d1 = dict(k1)
        for k2, c2 in b.items():
            merged = dict(d1)
            for atom, e in k2:
                cur = merged.get(atom)
                if cur is None:
                    merged[atom] = e
                else:
                    s = cur + e
                    if s.is_zero():
                        del merged[atom]
                    else:
                        merged[atom] = s
            key = _sort_monokey(tuple(merged.items()))
            c = c1 * c2
            w = out.get(key)
            if w is None:
                if not c.is_zero():
                    out[key] = c
            else:
                s = w + c
                if s.is_zero():
                    del out[key]
                else:
                    out[key] = s
    return out


_NF_ONE_KEY = ()


def nf_const(c):
    if c.is_zero():
        return {}
    return {_NF_ONE_KEY: c}


def nf_atom(atom, e=None):
    return {((atom, e if e is not None else C_ONE),): C_ONE}


def _nf_int_pow(nf, n):
    if n == 0:
        return nf_const(C_ONE)
    if n < 0:
        if len(nf) == 1:
            ((key, coeff),) = nf.items()
            inv = {_sort_monokey(tuple((a, -e) for a, e in key)):
                   coeff.inverse()}
            return _nf_int_pow(inv, -n)
        return nf_atom(("psum", _freeze_nf(nf)), Coeff.from_int(n))
    acc = nf_const(C_ONE)
    base = nf
    while n:
        if n & 1:
            acc = nf_mul(acc, base)
        base = nf_mul(base, base) if n > 1 else base
        n >>= 1
    return acc


def normalize(e):
    """Full normal form of an expression."""
    if isinstance(e, Const):
        return nf_const(e.coeff)
    if isinstance(e, Sym):
        return nf_atom((e.name,))
    if isinstance(e, Jet):
        return nf_atom(e.key())
    if isinstance(e, Unk):
        return nf_atom(("unk", e.fname, e.args, e.dmi))
    if isinstance(e, Add):
        out = {}
        for t in e.terms:
            out = nf_add(out, normalize(t))
        return out
    if isinstance(e, Mul):
        out = nf_const(C_ONE)
        for f in e.factors:
            out = nf_mul(out, normalize(f))
        return out
    if isinstance(e, Pow):
        nfb = normalize(e.base)
        if not nfb:
            return {}
        n = e.exp.as_int()
        if n is not None:
            return _nf_int_pow(nfb, n)
        if len(nfb) == 1:
            ((key, coeff),) = nfb.items()
            if coeff.is_one():
                return {_sort_monokey(tuple((a, ex * e.exp)
                                            for a, ex in key)): C_ONE}
            q = coeff.as_fraction()
            eq = e.exp.as_fraction()
            if q is not None and eq is not None and q > 0:
                r = _exact_frac_pow(q, eq)
                if r is not None:
                    return {_sort_monokey(tuple((a, ex * e.exp)
                                                for a, ex in key)):
                            Coeff.from_fraction(r)}
            raise ExprError("cannot normalize (%s)^(%s) with a non-unit "
                            "monomial coefficient"
                            % (coeff.to_text(), e.exp.to_text()))
        return nf_atom(("psum", _freeze_nf(nfb)), e.exp)
    if isinstance(e, Ln):
        nfa = normalize(e.arg)
        if len(nfa) == 1:
            ((key, coeff),) = nfa.items()
            if coeff.is_one() and key:
                out = {}
                for atom, ex in key:
                    out = nf_add(out, nf_scale(
                        nf_atom(("ln", _freeze_nf(nf_atom(atom)))), ex))
                return out
        return nf_atom(("ln", _freeze_nf(nfa)))
    if isinstance(e, ExpF):
        nfa = normalize(e.arg)
        out = nf_const(C_ONE)
        for key, coeff in nfa.items():
            atom = ("exp", _freeze_nf({key: C_ONE}))
            out = nf_mul(out, nf_atom(atom, coeff))
        return out
    raise ExprError("cannot normalize %r" % (e,))


def is_zero(e):
    return not normalize(e)


def is_equal(a, b):
    return not normalize(a - b)


# ---------------------------------------------------------------------------
# rebuilding expressions from normal forms (for residual reporting)
# ---------------------------------------------------------------------------

def _atom_to_expr(atom):
    tag = atom[0]
    if tag == "t":
        return T
    if tag == "r":
        return R
    if tag == "jet":
        return Jet(atom[1], atom[2], atom[3])
    if tag == "unk":
        return Unk(atom[1], atom[2], atom[3])
    inner = nf_to_expr(dict(atom[1]))
    if tag == "ln":
        return Ln(inner)
    if tag == "exp":
        return ExpF(inner)
    if tag == "psum":
        return inner  # exponent re-attached by caller
    raise ExprError("unknown atom %r" % (atom,))


def nf_to_expr(nf):
    terms = []
    for key, coeff in sorted(nf.items(),
                             key=lambda kv: tuple(_pair_skey(p)
                                                  for p in kv[0])):
        factors = [Const(coeff)]
        for atom, e in key:
            base = _atom_to_expr(atom)
            if atom[0] == "psum":
                factors.append(Pow(base, e))
            elif e.is_one():
                factors.append(base)
            else:
                factors.append(pw(base, e))
        terms.append(mul(*factors))
    return add(*terms) if terms else ZERO


def nf_terms(nf):
    """One expression per monomial, stably ordered (for residual lists)."""
    out = []
    for key, coeff in sorted(nf.items(),
                             key=lambda kv: tuple(_pair_skey(p)
                                                  for p in kv[0])):
        factors = [Const(coeff)]
        for atom, e in key:
            base = _atom_to_expr(atom)
            if atom[0] == "psum":
                factors.append(Pow(base, e))
            elif e.is_one():
                factors.append(base)
            else:
                factors.append(pw(base, e))
        out.append(mul(*factors))
    return out


# ---------------------------------------------------------------------------
# structural maps
# ---------------------------------------------------------------------------

def conjugate(e):
    if isinstance(e, Const):
        return Const(e.coeff.conj())
    if isinstance(e, Sym):
        return e
    if isinstance(e, Jet):
        return Jet(_CONJ_DEP[e.dep], e.nt, e.nr)
    if isinstance(e, Add):
        return add(*[conjugate(t) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[conjugate(f) for f in e.factors])
    if isinstance(e, Pow):
        return pw(conjugate(e.base), e.exp.conj())
    if isinstance(e, Ln):
        return Ln(conjugate(e.arg))
    if isinstance(e, ExpF):
        return ExpF(conjugate(e.arg))
    if isinstance(e, Unk):
        nm = e.fname[:-3] if e.fname.endswith("bar") else e.fname + "bar"
        return Unk(nm, e.args, e.dmi)
    raise ExprError("cannot conjugate %r" % (e,))


def substitute(e, bindings):
    """Simultaneous substitution.  Keys: Jet instances (exact match),
    "t"/"r", or parameter names "p"/"m"/"sigma".  Values: Expr or Coeff
    (ints and Fractions are coerced); sigma only accepts +-1."""
    jmap = {}
    smap = {}
    pmap = {}
    sigma = None
    for k, v in bindings.items():
        if isinstance(k, Jet):
            jmap[k.key()] = _coerce(v)
        elif k in ("t", "r"):
            smap[k] = _coerce(v)
        elif k in ("p", "m"):
            pmap[k] = v if isinstance(v, Coeff) else _coerce(v).coeff
        elif k == "sigma":
            sigma = int(v)
        else:
            raise ExprError("cannot substitute for %r" % (k,))
    for k, v in jmap.items():
        for j in iter_jets(v):
            if j.key() == k:
                raise ExprError("cyclic binding for %s" % k[1])
    return _subst(e, jmap, smap, pmap, sigma)


def _subs_coeff(c, pmap, sigma):
    if pmap:
        c = c.subs_params(pmap)
    if sigma is not None:
        c = c.subs_sigma(sigma)
    return c


def _subst(e, jmap, smap, pmap, sigma):
    if isinstance(e, Const):
        return Const(_subs_coeff(e.coeff, pmap, sigma))
    if isinstance(e, Sym):
        return smap.get(e.name, e)
    if isinstance(e, Jet):
        return jmap.get(e.key(), e)
    if isinstance(e, Add):
        return add(*[_subst(t, jmap, smap, pmap, sigma) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[_subst(f, jmap, smap, pmap, sigma) for f in e.factors])
    if isinstance(e, Pow):
        return pw(_subst(e.base, jmap, smap, pmap, sigma),
                  _subs_coeff(e.exp, pmap, sigma))
    if isinstance(e, Ln):
        return Ln(_subst(e.arg, jmap, smap, pmap, sigma))
    if isinstance(e, ExpF):
        return exp_e(_subst(e.arg, jmap, smap, pmap, sigma))
    if isinstance(e, Unk):
        return e
    raise ExprError("cannot substitute in %r" % (e,))


def iter_jets(e):
    """Yield every Jet node (with repetition) in an expression."""
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Jet):
            yield n
        elif isinstance(n, Add):
            stack.extend(n.terms)
        elif isinstance(n, Mul):
            stack.extend(n.factors)
        elif isinstance(n, Pow):
            stack.append(n.base)
        elif isinstance(n, (Ln, ExpF)):
            stack.append(n.arg)


def jet_set(e):
    return {j.key() for j in iter_jets(e)}


# ---------------------------------------------------------------------------
# partial derivatives (jet coordinates treated as independent)
# ---------------------------------------------------------------------------

def diff_atom(e, target):
    """Partial derivative with respect to one coordinate.

    target: a Jet (exact coordinate), or "t"/"r" (the bare symbols).
    Unknown functions differentiate through their declared arguments.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if (isinstance(target, str) and e.name == target) else ZERO
    if isinstance(e, Jet):
        if isinstance(target, Jet) and e.dep == target.dep \
                and e.nt == target.nt and e.nr == target.nr:
            return ONE
        return ZERO
    if isinstance(e, Add):
        return add(*[diff_atom(t, target) for t in e.terms])
    if isinstance(e, Mul):
        out = []
        fs = e.factors
        for idx, f in enumerate(fs):
            d = diff_atom(f, target)
            if isinstance(d, Const) and d.coeff.is_zero():
                continue
            out.append(mul(*(fs[:idx] + (d,) + fs[idx + 1:])))
        return add(*out) if out else ZERO
    if isinstance(e, Pow):
        d = diff_atom(e.base, target)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(Const(e.exp), pw(e.base, e.exp - C_ONE), d)
    if isinstance(e, Ln):
        d = diff_atom(e.arg, target)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(d, pw(e.arg, -1))
    if isinstance(e, ExpF):
        d = diff_atom(e.arg, target)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(d, e)
    if isinstance(e, Unk):
        name = target if isinstance(target, str) else target.name()
        if name in e.args:
            idx = e.args.index(name)
            dmi = list(e.dmi)
            dmi[idx] += 1
            return Unk(e.fname, e.args, dmi)
        return ZERO
    raise ExprError("cannot differentiate %r" % (e,))


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

class EvalDomainError(ArithmeticError):
    pass


def eval_numeric(e, point):
    """Evaluate to a complex double.  point maps 't', 'r', jet names
    ('u', 'u_r', 'ubar', ...), and 'p'/'m'/'sigma' to numbers.  A barred
    jet falls back to the conjugate of its unbarred value."""
    import cmath

    pv = float(point.get("p", 0.0))
    mv = float(point.get("m", 0.0))
    sg = int(point.get("sigma", 1))

    def ev(n):
        if isinstance(n, Const):
            return n.coeff.eval(pv, mv, sg)
        if isinstance(n, Sym):
            try:
                return complex(point[n.name])
            except KeyError:
                raise EvalDomainError("unbound variable %s" % n.name)
        if isinstance(n, Jet):
            nm = n.name()
            if nm in point:
                return complex(point[nm])
            if n.dep.endswith("bar"):
                twin = Jet(_CONJ_DEP[n.dep], n.nt, n.nr).name()
                if twin in point:
                    return complex(point[twin]).conjugate()
            raise EvalDomainError("unbound jet %s" % nm)
        if isinstance(n, Add):
            return sum(ev(t) for t in n.terms)
        if isinstance(n, Mul):
            acc = 1 + 0j
            for f in n.factors:
                acc *= ev(f)
            return acc
        if isinstance(n, Pow):
            b = ev(n.base)
            x = n.exp.eval(pv, mv, sg)
            if b.imag == 0.0 and x.imag == 0.0:
                br, xr = b.real, x.real
                if br < 0.0:
                    if xr != round(xr):
                        raise EvalDomainError(
                            "fractional power of negative value")
                    return complex(br ** int(round(xr)))
                if br == 0.0 and xr < 0:
                    raise EvalDomainError("negative power of zero")
                return complex(br ** xr)
            return b ** x
        if isinstance(n, Ln):
            a = ev(n.arg)
            if a == 0 or (a.imag == 0.0 and a.real <= 0.0):
                raise EvalDomainError("ln of non-positive value")
            return cmath.log(a)
        if isinstance(n, ExpF):
            return cmath.exp(ev(n.arg))
        raise ExprError("cannot evaluate %r numerically" % (n,))

    return ev(e)
