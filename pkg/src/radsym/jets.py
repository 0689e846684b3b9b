"""Jet-space calculus: total derivatives, Euler (variational) derivatives,
prolongation of point-symmetry generators, and reduction of expressions
modulo an evolution/wave equation and its differential consequences.
"""

from __future__ import annotations

from .coeffs import Coeff, C_ONE, C_ZERO
from .expr import (Add, Const, ExpF, Expr, ExprError, Jet, Ln, Mul, Pow,
                   Sym, Unk, ZERO, ONE, add, con, conjugate, diff_atom,
                   is_zero, iter_jets, mul, normalize, pw, substitute)

VAR_ORDER_CAP = 6
_REDUCE_PASS_CAP = 60


def total_derivative(e, direction):
    """Total derivative D_t or D_r of an expression."""
    if direction not in ("t", "r"):
        raise ExprError("direction must be 't' or 'r'")
    return _tot(e, direction)


def _tot(e, x):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == x else ZERO
    if isinstance(e, Jet):
        if x == "t":
            return Jet(e.dep, e.nt + 1, e.nr)
        return Jet(e.dep, e.nt, e.nr + 1)
    if isinstance(e, Add):
        return add(*[_tot(t, x) for t in e.terms])
    if isinstance(e, Mul):
        fs = e.factors
        out = []
        for idx, f in enumerate(fs):
            d = _tot(f, x)
            if isinstance(d, Const) and d.coeff.is_zero():
                continue
            out.append(mul(*(fs[:idx] + (d,) + fs[idx + 1:])))
        return add(*out) if out else ZERO
    if isinstance(e, Pow):
        d = _tot(e.base, x)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(Const(e.exp), pw(e.base, e.exp - C_ONE), d)
    if isinstance(e, Ln):
        d = _tot(e.arg, x)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(d, pw(e.arg, -1))
    if isinstance(e, ExpF):
        d = _tot(e.arg, x)
        if isinstance(d, Const) and d.coeff.is_zero():
            return ZERO
        return mul(d, e)
    if isinstance(e, Unk):
        # chain rule through the declared arguments
        out = []
        for idx, a in enumerate(e.args):
            dmi = list(e.dmi)
            dmi[idx] += 1
            partial = Unk(e.fname, e.args, dmi)
            da = _arg_derivative(a, x)
            if da is ZERO:
                continue
            out.append(mul(da, partial) if da is not ONE else partial)
        return add(*out) if out else ZERO
    raise ExprError("cannot differentiate %r" % (e,))


def _arg_derivative(name, x):
    if name == "t":
        return ONE if x == "t" else ZERO
    if name == "r":
        return ONE if x == "r" else ZERO
    j = _jet_from_name(name)
    if x == "t":
        return Jet(j.dep, j.nt + 1, j.nr)
    return Jet(j.dep, j.nt, j.nr + 1)


def _jet_from_name(name):
    if "_" in name:
        dep, suffix = name.split("_", 1)
        return Jet(dep, suffix.count("t"), suffix.count("r"))
    return Jet(name)


def dt(e):
    return _tot(e, "t")


def dr(e):
    return _tot(e, "r")


def variational_derivative(density, w, dirs=("t", "r")):
    """Euler operator E_w over the chosen directions:

        E_w(f) = sum_J (-D)_J d f / d w_J

    `w` may be a dependent symbol name ("u") or a Jet; a Jet base means the
    multi-indices J extend *that* coordinate (so w=u_t with dirs={r} sums
    over u_t, u_tr, u_trr, ...).
    """
    base = _jet_from_name(w) if isinstance(w, str) else w
    dirs = tuple(dirs)
    use_t = "t" in dirs
    use_r = "r" in dirs
    # orders actually present, relative to the base coordinate
    max_t = 0
    max_r = 0
    relevant = set()
    for j in iter_jets(density):
        if j.dep != base.dep or j.nt < base.nt or j.nr < base.nr:
            continue
        jt, jr = j.nt - base.nt, j.nr - base.nr
        if (jt and not use_t) or (jr and not use_r):
            continue
        relevant.add((jt, jr))
        max_t = max(max_t, jt)
        max_r = max(max_r, jr)
    if max_t + max_r > VAR_ORDER_CAP:
        raise ExprError("variational derivative order cap exceeded "
                        "(%d-th order input)" % (max_t + max_r))
    out = []
    for (jt, jr) in sorted(relevant):
        partial = diff_atom(density, Jet(base.dep, base.nt + jt,
                                         base.nr + jr))
        if isinstance(partial, Const) and partial.coeff.is_zero():
            continue
        term = partial
        for _ in range(jt):
            term = dt(term)
        for _ in range(jr):
            term = dr(term)
        if (jt + jr) % 2:
            term = -term
        out.append(term)
    return add(*out) if out else ZERO


class EquationSpec:
    """One equation of the family, in solved form leading = rhs."""

    __slots__ = ("name", "klass", "leading", "rhs", "is_complex", "notes",
                 "display_factor", "_rules")

    def __init__(self, name, klass, leading, rhs, is_complex, notes="",
                 display_factor=None):
        self.name = name
        self.klass = klass            # wave | schrodinger | mkdv
        self.leading = leading        # a Jet (u_tt or u_t)
        self.rhs = rhs
        self.is_complex = is_complex
        self.notes = notes
        # factor c so that c*(leading - rhs) is the equation as displayed
        # (i for Schrodinger-type equations written as i*u_t = ...)
        self.display_factor = display_factor if display_factor is not None \
            else C_ONE
        rules = [(self.leading, self.rhs)]
        if is_complex:
            rules.append((Jet(_conj_dep(self.leading.dep),
                              self.leading.nt, self.leading.nr),
                          conjugate(self.rhs)))
        self._rules = rules

    def residual(self):
        """The jet-space residual Delta = leading - rhs."""
        return self.leading - self.rhs

    def display_residual(self):
        return Const(self.display_factor) * self.residual()

    def __repr__(self):
        return "EquationSpec(%s)" % self.name


def _conj_dep(dep):
    return dep[:-3] if dep.endswith("bar") else dep + "bar"


def reduce_mod_equation(e, eq):
    """Eliminate the leading jet and all its differential consequences."""
    cache = {}

    def consequence(rule_idx, a, b):
        key = (rule_idx, a, b)
        got = cache.get(key)
        if got is None:
            lead, rhs = eq._rules[rule_idx]
            got = rhs
            for _ in range(a):
                got = dt(got)
            for _ in range(b):
                got = dr(got)
            cache[key] = got
        return got

    for _ in range(_REDUCE_PASS_CAP):
        bindings = {}
        bound = set()
        for j in iter_jets(e):
            if j.key() in bound:
                continue
            for idx, (lead, _rhs) in enumerate(eq._rules):
                if j.dep == lead.dep and j.nt >= lead.nt and j.nr >= lead.nr:
                    bound.add(j.key())
                    bindings[Jet(j.dep, j.nt, j.nr)] = consequence(
                        idx, j.nt - lead.nt, j.nr - lead.nr)
                    break
        if not bindings:
            return e
        e = substitute(e, bindings)
    raise ExprError("reduction did not terminate; malformed equation?")


class VectorField:
    """Point-symmetry generator X = tau d_t + xi d_r + eta d_u (+ etabar)."""

    __slots__ = ("tau", "xi", "eta", "etabar", "side_condition", "label")

    def __init__(self, tau, xi, eta, etabar=None, side_condition=None,
                 label="", is_complex=False):
        self.tau = tau
        self.xi = xi
        self.eta = eta
        if etabar is None and is_complex:
            etabar = conjugate(eta)
        self.etabar = etabar
        self.side_condition = dict(side_condition) if side_condition else {}
        self.label = label
        for comp in (tau, xi, eta) + ((etabar,) if etabar is not None else ()):
            for j in iter_jets(comp):
                if j.nt or j.nr:
                    raise ExprError(
                        "%s is not a point generator: component depends on %s"
                        % (label or "X", j.name()))

    def is_complex(self):
        return self.etabar is not None

    def __repr__(self):
        return "VectorField(%s)" % (self.label or "?")


def characteristic(X):
    """Q = eta - tau*u_t - xi*u_r (and the conjugate partner if complex)."""
    q = X.eta - X.tau * Jet("u", 1, 0) - X.xi * Jet("u", 0, 1)
    if X.is_complex():
        qb = X.etabar - X.tau * Jet("ubar", 1, 0) - X.xi * Jet("ubar", 0, 1)
        return q, qb
    return q, None


def prolong_apply(X, e, eq=None):
    """Apply the prolonged generator pr(X) to an expression.

    Uses the characteristic form: pr(X) = tau*D_t + xi*D_r
    + sum_J D_J(Q) d/d(u_J) + sum_J D_J(Qbar) d/d(ubar_J).
    """
    q, qb = characteristic(X)
    qmap = {"u": q}
    if qb is not None:
        qmap["ubar"] = qb
    out = []
    if not _expr_is_zero_const(X.tau):
        out.append(X.tau * dt(e))
    if not _expr_is_zero_const(X.xi):
        out.append(X.xi * dr(e))
    seen = set()
    for j in iter_jets(e):
        if j.dep not in qmap or j.key() in seen:
            continue
        seen.add(j.key())
        partial = diff_atom(e, j)
        if _expr_is_zero_const(partial):
            continue
        coeff = qmap[j.dep]
        for _ in range(j.nt):
            coeff = dt(coeff)
        for _ in range(j.nr):
            coeff = dr(coeff)
        out.append(mul(coeff, partial))
    res = add(*out) if out else ZERO
    if eq is not None:
        res = reduce_mod_equation(res, eq)
    return res


def _expr_is_zero_const(e):
    return isinstance(e, Const) and e.coeff.is_zero()


def _point_apply(X, f):
    """First-order action of X on a point function f(t, r, u, ubar)."""
    pieces = [(X.tau, "t"), (X.xi, "r"), (X.eta, Jet("u"))]
    if X.etabar is not None:
        pieces.append((X.etabar, Jet("ubar")))
    out = []
    for comp, target in pieces:
        d = diff_atom(f, target)
        if _expr_is_zero_const(d) or _expr_is_zero_const(comp):
            continue
        out.append(mul(comp, d))
    return add(*out) if out else ZERO


def commutator(X, Y):
    """Lie bracket [X, Y] of two point generators."""
    sc = _merge_side_conditions(X.side_condition, Y.side_condition)
    cplx = X.is_complex() or Y.is_complex()

    def comp(cx, cy):
        return _point_apply(X, cy) - _point_apply(Y, cx)

    tau = comp(X.tau, Y.tau)
    xi = comp(X.xi, Y.xi)
    eta = comp(X.eta, Y.eta)
    etabar = None
    if cplx:
        xeb = X.etabar if X.etabar is not None else conjugate(X.eta)
        yeb = Y.etabar if Y.etabar is not None else conjugate(Y.eta)
        Xc = X if X.etabar is not None else VectorField(
            X.tau, X.xi, X.eta, conjugate(X.eta), X.side_condition, X.label)
        Yc = Y if Y.etabar is not None else VectorField(
            Y.tau, Y.xi, Y.eta, conjugate(Y.eta), Y.side_condition, Y.label)
        etabar = _point_apply(Xc, yeb) - _point_apply(Yc, xeb)
    return VectorField(tau, xi, eta, etabar, sc,
                       label="[%s, %s]" % (X.label or "X", Y.label or "Y"))


def _merge_side_conditions(a, b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    merged = dict(a)
    for k, v in b.items():
        if k in merged and merged[k] != v:
            raise ExprError("incompatible side conditions: %r vs %r"
                            % (a, b))
        merged[k] = v
    return merged
