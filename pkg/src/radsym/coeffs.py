"""Exact coefficient arithmetic for the symbolic layer.

A coefficient is an element of the ring

    Q(p, m)[i, eps, sqrt2, sigma] / (i^2 + 1, eps^2 + sigma, sqrt2^2 - 2, sigma^2 - 1)

stored as a fraction whose numerator is a free Z[p,m]-module over the 16
radical monomials i^a eps^b sqrt2^c sigma^d (a,b,c,d in {0,1}) and whose
denominator is a plain polynomial in Z[p,m].  Fractions are kept fully
reduced (polynomial gcd cancelled, integer content 1, denominator with a
positive leading coefficient under graded lex with p < m), so structural
equality *is* semantic equality and elements hash consistently.

The zero test is therefore decidable and cheap: a coefficient is zero iff
its numerator map is empty.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _igcd


# ---------------------------------------------------------------------------
# polynomials in Z[p, m]
# ---------------------------------------------------------------------------

def _mono_key(k):
    # graded lex with p < m: total degree, then m-degree decides
    return (k[0] + k[1], k[1])


class Poly:
    """Immutable polynomial in Z[p, m]; terms map (deg_p, deg_m) -> int."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms):
        self.terms = {k: v for k, v in terms.items() if v}
        self._hash = None

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __repr__(self):
        return "Poly(%r)" % (self.terms,)

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and (0, 0) in self.terms)

    def const_value(self):
        if not self.terms:
            return 0
        return self.terms.get((0, 0), 0)

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            w = t.get(k, 0) + v
            if w:
                t[k] = w
            else:
                t.pop(k, None)
        return Poly(t)

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        t = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1])
                w = t.get(k, 0) + v1 * v2
                if w:
                    t[k] = w
                else:
                    t.pop(k, None)
        return Poly(t)

    def scale(self, c):
        if c == 0:
            return P_ZERO
        return Poly({k: c * v for k, v in self.terms.items()})

    def content(self):
        """Positive integer gcd of the coefficients (0 for the zero poly)."""
        g = 0
        for v in self.terms.values():
            g = _igcd(g, abs(v))
            if g == 1:
                return 1
        return g

    def leading_key(self):
        return max(self.terms, key=_mono_key)

    def leading_coeff(self):
        return self.terms[self.leading_key()]

    def degree(self, var):
        # var: 0 for p, 1 for m
        if not self.terms:
            return -1
        return max(k[var] for k in self.terms)

    def eval(self, pv, mv):
        acc = 0
        for (dp, dm), v in self.terms.items():
            acc += v * (pv ** dp) * (mv ** dm)
        return acc

    def shift_mul(self, dp, dm):
        return Poly({(k[0] + dp, k[1] + dm): v for k, v in self.terms.items()})


P_ZERO = Poly({})
P_ONE = Poly({(0, 0): 1})


def poly_const(c):
    return Poly({(0, 0): c}) if c else P_ZERO


def _poly_divmod_exact(num, den):
    """Exact division in Z[p,m]; returns quotient or None if not divisible."""
    if den.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if num.is_zero():
        return P_ZERO
    if den.is_const():
        c = den.const_value()
        q = {}
        for k, v in num.terms.items():
            if v % c:
                return None
            q[k] = v // c
        return Poly(q)
    lk = den.leading_key()
    lc = den.terms[lk]
    rem = num
    quot = {}
    # bounded: each step strictly drops the leading monomial of rem
    while not rem.is_zero():
        rk = rem.leading_key()
        if rk[0] < lk[0] or rk[1] < lk[1]:
            return None
        rv = rem.terms[rk]
        if rv % lc:
            return None
        qk = (rk[0] - lk[0], rk[1] - lk[1])
        qc = rv // lc
        quot[qk] = quot.get(qk, 0) + qc
        rem = rem - den.shift_mul(*qk).scale(qc)
    return Poly(quot)


def _as_univar(f, var):
    """Split f into a dense list of Poly coefficients by degree in var."""
    d = f.degree(var)
    coeffs = [P_ZERO] * (d + 1)
    for k, v in f.terms.items():
        kk = (0, k[1]) if var == 0 else (k[0], 0)
        coeffs[k[var]] = coeffs[k[var]] + Poly({kk: v})
    return coeffs


def _from_univar(coeffs, var):
    acc = P_ZERO
    for d, c in enumerate(coeffs):
        if c.is_zero():
            continue
        acc = acc + (c.shift_mul(d, 0) if var == 0 else c.shift_mul(0, d))
    return acc


def _uni_deg(coeffs):
    for d in range(len(coeffs) - 1, -1, -1):
        if not coeffs[d].is_zero():
            return d
    return -1


def _uni_prem(f, g):
    """Pseudo-remainder of dense coefficient lists (coeffs are Poly)."""
    f = list(f)
    df, dg = _uni_deg(f), _uni_deg(g)
    lg = g[dg]
    while df >= dg >= 0:
        lf = f[df]
        # f := lg*f - lf*x^(df-dg)*g
        nf = [lg * c for c in f]
        for j in range(dg + 1):
            nf[df - dg + j] = nf[df - dg + j] - lf * g[j]
        nf[df] = P_ZERO
        f = nf
        df = _uni_deg(f)
    return f


def poly_gcd(a, b):
    """GCD in Z[p,m] via primitive PRS; result has positive leading coeff."""
    if a.is_zero():
        return _pos_lead(b)
    if b.is_zero():
        return _pos_lead(a)
    if a.is_const() or b.is_const():
        g = _igcd(a.content(), b.content())
        return poly_const(g if g else 1)
    # pick a main variable that actually occurs in both, else content route
    for var in (0, 1):
        da, db = a.degree(var), b.degree(var)
        if da > 0 and db > 0:
            return _pos_lead(_gcd_main(a, b, var))
        if (da > 0) != (db > 0):
            # one is free of var: gcd divides the var-free one's content side
            lo, hi = (a, b) if da == 0 else (b, a)
            cont = _content_in(hi, var)
            return _pos_lead(poly_gcd(lo, cont))
    g = _igcd(a.content(), b.content())
    return poly_const(g if g else 1)


def _content_in(f, var):
    cs = _as_univar(f, var)
    g = P_ZERO
    for c in cs:
        if c.is_zero():
            continue
        g = poly_gcd(g, c) if not g.is_zero() else _pos_lead(c)
        if g.is_const() and abs(g.const_value()) == 1:
            return P_ONE
    return g


def _gcd_main(a, b, var):
    ca, cb = _content_in(a, var), _content_in(b, var)
    cg = poly_gcd(ca, cb)
    fa = _poly_divmod_exact(a, ca)
    fb = _poly_divmod_exact(b, cb)
    f = _as_univar(fa, var)
    g = _as_univar(fb, var)
    if _uni_deg(f) < _uni_deg(g):
        f, g = g, f
    while _uni_deg(g) >= 0:
        r = _uni_prem(f, g)
        f, g = g, r
        if _uni_deg(g) >= 0:
            gp = _from_univar(g, var)
            cont = _content_in(gp, var)
            gp = _poly_divmod_exact(gp, cont)
            g = _as_univar(gp, var)
    res = _from_univar(f, var)
    cont = _content_in(res, var)
    res = _poly_divmod_exact(res, cont)
    return cg * res


def _pos_lead(f):
    if f.is_zero():
        return f
    if f.leading_coeff() < 0:
        return -f
    return f


# ---------------------------------------------------------------------------
# the coefficient field element
# ---------------------------------------------------------------------------

# radical monomial key: (a, b, c, d) = exponents of (i, eps, sqrt2, sigma)

def _rad_mul(k1, k2):
    """Multiply two radical monomials; returns (key, integer scale, sigma bump).

    i^2 -> -1,  eps^2 -> -sigma,  sqrt2^2 -> 2,  sigma^2 -> 1.
    """
    a1, b1, c1, d1 = k1
    a2, b2, c2, d2 = k2
    scale = 1
    a = a1 + a2
    if a == 2:
        a, scale = 0, scale * -1
    b = b1 + b2
    d_extra = 0
    if b == 2:
        b = 0
        scale = -scale
        d_extra = 1
    c = c1 + c2
    if c == 2:
        c, scale = 0, scale * 2
    d = (d1 + d2 + d_extra) % 2
    return (a, b, c, d), scale


_K0 = (0, 0, 0, 0)


class Coeff:
    """An element of Q(p,m)[i, eps, sqrt2, sigma] in canonical reduced form."""

    __slots__ = ("parts", "den", "_hash")

    def __init__(self, parts, den, _reduce=True):
        if den.is_zero():
            raise ZeroDivisionError("coefficient with zero denominator")
        parts = {k: v for k, v in parts.items() if not v.is_zero()}
        if _reduce and parts:
            parts, den = _reduce_fraction(parts, den)
        if not parts:
            den = P_ONE
        if den.leading_coeff() < 0:
            den = -den
            parts = {k: -v for k, v in parts.items()}
        self.parts = parts
        self.den = den
        self._hash = None

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def from_int(n):
        c = _INT_CACHE.get(n)
        if c is None:
            c = Coeff({_K0: poly_const(n)}, P_ONE, _reduce=False)
        return c

    @staticmethod
    def from_fraction(q):
        q = Fraction(q)
        return Coeff({_K0: poly_const(q.numerator)}, poly_const(q.denominator))

    # -- predicates ------------------------------------------------------------

    def is_zero(self):
        return not self.parts

    def is_one(self):
        return (self.den == P_ONE and len(self.parts) == 1
                and self.parts.get(_K0) == P_ONE)

    def is_rational(self):
        if not self.parts:
            return True
        if not self.den.is_const():
            return False
        if len(self.parts) != 1 or _K0 not in self.parts:
            return False
        return self.parts[_K0].is_const()

    def as_fraction(self):
        """Return the value as a Fraction, or None if not plain rational."""
        if not self.is_rational():
            return None
        if not self.parts:
            return Fraction(0)
        return Fraction(self.parts[_K0].const_value(), self.den.const_value())

    def as_int(self):
        q = self.as_fraction()
        if q is not None and q.denominator == 1:
            return int(q)
        return None

    def is_param_free(self):
        """True when no p or m occurs (radicals allowed)."""
        if not self.den.is_const():
            return False
        return all(v.is_const() for v in self.parts.values())

    # -- ring operations -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Coeff):
            return NotImplemented
        if self.den == other.den:
            t = dict(self.parts)
            for k, v in other.parts.items():
                w = t.get(k, P_ZERO) + v
                if w.is_zero():
                    t.pop(k, None)
                else:
                    t[k] = w
            return Coeff(t, self.den)
        t = {k: v * other.den for k, v in self.parts.items()}
        for k, v in other.parts.items():
            w = t.get(k, P_ZERO) + v * self.den
            if w.is_zero():
                t.pop(k, None)
            else:
                t[k] = w
        return Coeff(t, self.den * other.den)

    def __neg__(self):
        return Coeff({k: -v for k, v in self.parts.items()}, self.den,
                     _reduce=False)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Coeff):
            return NotImplemented
        if not self.parts or not other.parts:
            return C_ZERO
        t = {}
        for k1, v1 in self.parts.items():
            for k2, v2 in other.parts.items():
                k, sc = _rad_mul(k1, k2)
                w = v1 * v2
                if sc != 1:
                    w = w.scale(sc)
                acc = t.get(k)
                t[k] = w if acc is None else acc + w
        return Coeff(t, self.den * other.den)

    def inverse(self):
        if not self.parts:
            raise ZeroDivisionError("inverting zero coefficient")
        acc_parts = {_K0: P_ONE}
        acc = Coeff(acc_parts, P_ONE, _reduce=False)
        cur = Coeff(self.parts, P_ONE, _reduce=False)
        for idx in range(4):
            if any(k[idx] for k in cur.parts):
                flip = Coeff({k: (-v if k[idx] else v)
                              for k, v in cur.parts.items()}, P_ONE,
                             _reduce=False)
                acc = acc * flip
                cur = cur * flip
        # cur is now a plain polynomial times the identity radical
        assert set(cur.parts) <= {_K0} and cur.den == P_ONE
        w = cur.parts.get(_K0, P_ZERO)
        if w.is_zero():
            raise ZeroDivisionError(
                "zero divisor in coefficient ring (norm vanishes)")
        num = {k: v * self.den for k, v in acc.parts.items()}
        return Coeff(num, w)

    def __truediv__(self, other):
        if not isinstance(other, Coeff):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("coefficient powers take integer exponents")
        if n < 0:
            return self.inverse() ** (-n)
        acc = C_ONE
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    # -- structure maps ---------------------------------------------------------

    def conj(self):
        """Complex conjugation: i -> -i, eps -> -sigma*eps; fixes the rest."""
        t = {}
        for (a, b, c, d), v in self.parts.items():
            sign = -1 if (a + b) % 2 else 1
            k = (a, b, c, (d + b) % 2)
            w = v.scale(sign)
            acc = t.get(k)
            t[k] = w if acc is None else acc + w
        return Coeff(t, self.den, _reduce=False)

    def subs_params(self, pm_map):
        """Substitute p and/or m by Coeff values (rational functions allowed)."""
        pv = pm_map.get("p")
        mv = pm_map.get("m")
        if pv is None and mv is None:
            return self
        num = C_ZERO
        for k, poly in self.parts.items():
            rad = Coeff({k: P_ONE}, P_ONE, _reduce=False)
            num = num + _poly_subs(poly, pv, mv) * rad
        den = _poly_subs(self.den, pv, mv)
        return num / den

    def subs_sigma(self, sval):
        """Fold sigma = +1 or -1 into the coefficient."""
        if sval not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        t = {}
        for (a, b, c, d), v in self.parts.items():
            w = v if (d == 0 or sval == 1) else -v
            k = (a, b, c, 0)
            acc = t.get(k)
            t[k] = w if acc is None else acc + w
        return Coeff(t, self.den)

    def eval(self, pv=0.0, mv=0.0, sigma=1):
        """Numeric value; eps follows eps^2 = -sigma (i when focusing)."""
        epsv = 1j if sigma > 0 else 1.0
        total = 0j
        for (a, b, c, d), poly in self.parts.items():
            val = complex(poly.eval(pv, mv))
            if a:
                val *= 1j
            if b:
                val *= epsv
            if c:
                val *= 1.4142135623730951
            if d:
                val *= (1 if sigma > 0 else -1)
            total += val
        return total / self.den.eval(pv, mv)

    # -- comparisons / hashing ----------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Coeff) and self.den == other.den
                and self.parts == other.parts)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.parts.items()), self.den))
        return self._hash

    def __repr__(self):
        return "Coeff<%s>" % self.to_text()

    # -- printing -------------------------------------------------------------------

    def to_text(self):
        if not self.parts:
            return "0"
        terms = []
        for k in sorted(self.parts, key=lambda kk: (kk[0], kk[1], kk[2], kk[3])):
            terms.extend(_poly_rad_terms(self.parts[k], k))
        out = ""
        for sign, txt in terms:
            if not out:
                out = ("-" if sign < 0 else "") + txt
            else:
                out += (" - " if sign < 0 else " + ") + txt
        if self.den != P_ONE:
            den_txt = _poly_text(self.den)
            if len(terms) > 1:
                out = "(" + out + ")"
            if "*" in den_txt or " " in den_txt:
                out += "/(" + den_txt + ")"
            else:
                out += "/" + den_txt
        return out


def _reduce_fraction(parts, den):
    # integer content
    ig = den.content()
    for v in parts.values():
        ig = _igcd(ig, v.content())
        if ig == 1:
            break
    if ig > 1:
        qd = _poly_divmod_exact(den, poly_const(ig))
        if qd is not None:
            ok = {}
            good = True
            for k, v in parts.items():
                q = _poly_divmod_exact(v, poly_const(ig))
                if q is None:
                    good = False
                    break
                ok[k] = q
            if good:
                parts, den = ok, qd
    if den.is_const() and den.const_value() in (1, -1):
        if den.const_value() == -1:
            return {k: -v for k, v in parts.items()}, P_ONE
        return parts, den
    # polynomial gcd with the denominator
    g = den
    for v in parts.values():
        g = poly_gcd(g, v)
        if g.is_const():
            break
    if not g.is_const():
        den = _poly_divmod_exact(den, g)
        parts = {k: _poly_divmod_exact(v, g) for k, v in parts.items()}
    return parts, den


def _poly_subs(poly, pv, mv):
    """Evaluate a Z[p,m] polynomial with p,m optionally replaced by Coeffs."""
    acc = C_ZERO
    pc = pv if pv is not None else C_P
    mc = mv if mv is not None else C_M
    ppows = {0: C_ONE}
    mpows = {0: C_ONE}
    for (dp, dm), v in poly.terms.items():
        if dp not in ppows:
            ppows[dp] = pc ** dp
        if dm not in mpows:
            mpows[dm] = mc ** dm
        acc = acc + Coeff.from_int(v) * ppows[dp] * mpows[dm]
    return acc


def _poly_text(poly):
    if poly.is_zero():
        return "0"
    parts = []
    for k in sorted(poly.terms, key=_mono_key, reverse=True):
        v = poly.terms[k]
        txt = _term_text(abs(v), k)
        if not parts:
            parts.append(("-" if v < 0 else "") + txt)
        else:
            parts.append((" - " if v < 0 else " + ") + txt)
    return "".join(parts)


def _term_text(c, k):
    dp, dm = k
    bits = []
    if c != 1 or (dp == 0 and dm == 0):
        bits.append(str(c))
    if dp:
        bits.append("p" if dp == 1 else "p^%d" % dp)
    if dm:
        bits.append("m" if dm == 1 else "m^%d" % dm)
    return "*".join(bits)


def _poly_rad_terms(poly, rad):
    """Yield (sign, text) pairs for poly * radical-monomial."""
    a, b, c, d = rad
    rad_bits = []
    if a:
        rad_bits.append("i")
    if b:
        rad_bits.append("eps")
    if c:
        rad_bits.append("sqrt2")
    if d:
        rad_bits.append("sigma")
    out = []
    for k in sorted(poly.terms, key=_mono_key, reverse=True):
        v = poly.terms[k]
        sign = -1 if v < 0 else 1
        core = _term_text(abs(v), k)
        if rad_bits:
            if core == "1":
                core = "*".join(rad_bits)
            else:
                core = core + "*" + "*".join(rad_bits)
        out.append((sign, core))
    return out


def solve_linear_param(c, var):
    """Root of c = 0 in the parameter `var` ("p" or "m").

    Requires the numerator of c to be radical-free and of degree one in
    `var`; the root is returned as a Coeff in the remaining parameter.
    """
    if c.is_zero():
        raise ValueError("identically zero; every value of %s solves" % var)
    extra = [k for k in c.parts if k != _K0]
    if extra:
        raise ValueError("numerator carries radicals; no rational root")
    idx = 0 if var == "p" else 1
    lo = {}
    hi = {}
    for key, q in c.parts[_K0].terms.items():
        rest = (0, key[1]) if idx == 0 else (key[0], 0)
        if key[idx] == 0:
            lo[rest] = lo.get(rest, 0) + q
        elif key[idx] == 1:
            hi[rest] = hi.get(rest, 0) + q
        else:
            raise ValueError("numerator is not linear in %s" % var)
    if not any(hi.values()):
        raise ValueError("numerator does not involve %s" % var)
    return Coeff({_K0: -Poly(lo)}, Poly(hi))


C_ZERO = Coeff({}, P_ONE, _reduce=False)
C_ONE = Coeff({_K0: P_ONE}, P_ONE, _reduce=False)
C_P = Coeff({_K0: Poly({(1, 0): 1})}, P_ONE, _reduce=False)
C_M = Coeff({_K0: Poly({(0, 1): 1})}, P_ONE, _reduce=False)
C_I = Coeff({(1, 0, 0, 0): P_ONE}, P_ONE, _reduce=False)
C_EPS = Coeff({(0, 1, 0, 0): P_ONE}, P_ONE, _reduce=False)
C_SQRT2 = Coeff({(0, 0, 1, 0): P_ONE}, P_ONE, _reduce=False)
C_SIGMA = Coeff({(0, 0, 0, 1): P_ONE}, P_ONE, _reduce=False)

_INT_CACHE = {}
for _n in range(-4, 11):
    _INT_CACHE[_n] = Coeff({_K0: poly_const(_n)}, P_ONE, _reduce=False)


def rational(num, den=1):
    return Coeff.from_fraction(Fraction(num, den))
