"""Potential systems and nonlocal conservation laws.

A conserved density of an evolution equation can be potentiated: the
divergence identity D_t(r^w Psi^t) + D_r(r^w Psi^r) = 0 makes the pair
of relations

    v_r = -r^w Psi^t,        v_t = r^w Psi^r

cross-consistent on solutions, adjoining a new dependent variable v to
the jet space.  (The stored nonlocal tables display the image v -> -v
of this convention; see PotentialSystem.negated.)  A conservation law
or symmetry of the enlarged system is *nonlocal* when it still depends
on the underivated potential after every v-derivative has been
eliminated, i.e. when it cannot be rewritten in the base jet variables.

Everything here is exact.  The focusing parameter enters twice: as the
sign sigma in the equation and as the radical eps with eps^2 = -sigma
in the adjoined exponentials; identities are settled once with both
symbolic and then re-checked on the two concrete branches
(sigma = +1 with eps = i, sigma = -1 with eps = 1).
"""

from fractions import Fraction
import re

from .coeffs import (C_EPS, C_I, C_M, C_ONE, C_SQRT2, C_ZERO, Coeff,
                     rational)
from .expr import (Add, Const, ExpF, Jet, Ln, MINUS_ONE, Mul, ONE, Pow, R,
                   Sym, U, Unk, add, con, diff_atom, exp_e, is_equal,
                   is_zero, iter_jets, mul, nf_terms, nf_to_expr, normalize,
                   pw, substitute)
from .jets import EquationSpec, dr, dt, reduce_mod_equation, \
    variational_derivative
from .parser import to_text


class PotentialError(Exception):
    pass


# ---------------------------------------------------------------------------
# small expression utilities
# ---------------------------------------------------------------------------

def _canon(e):
    return nf_to_expr(normalize(e))


def _neg(e):
    return mul(MINUS_ONE, e)


def _bind(e, sc):
    got = {k: v for k, v in sc.items() if k in ("m", "p")}
    return substitute(e, got) if got else e


def _bind_equation(eq, sc):
    if not sc:
        return eq
    return EquationSpec(eq.name, eq.klass, eq.leading, _bind(eq.rhs, sc),
                        eq.is_complex, eq.notes, eq.display_factor)


def _sample_terms(e, cap=6):
    pieces = nf_terms(normalize(e))
    out = [to_text(t) for t in pieces[:cap]]
    if len(pieces) > cap:
        out.append("... (+%d more terms)" % (len(pieces) - cap))
    return out


def _subs_eps_coeff(c, val):
    # split off the eps-carrying radical monomials (index 1 of the key)
    # and glue them back with the concrete value
    lo = {}
    hi = {}
    for (a, b, s2, d), poly in c.parts.items():
        (hi if b else lo)[(a, 0, s2, d)] = poly
    out = Coeff(lo, c.den)
    if hi:
        out = out + Coeff(hi, c.den) * val
    return out


def _subs_eps(e, val):
    """Substitute a concrete value for eps throughout an expression."""
    if isinstance(e, Const):
        return Const(_subs_eps_coeff(e.coeff, val))
    if isinstance(e, (Sym, Jet, Unk)):
        return e
    if isinstance(e, Add):
        return add(*[_subs_eps(t, val) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[_subs_eps(f, val) for f in e.factors])
    if isinstance(e, Pow):
        return pw(_subs_eps(e.base, val), _subs_eps_coeff(e.exp, val))
    if isinstance(e, Ln):
        return Ln(_subs_eps(e.arg, val))
    if isinstance(e, ExpF):
        return exp_e(_subs_eps(e.arg, val))
    raise PotentialError("cannot substitute eps in %r" % (e,))


def _concrete(e, sigma, epsv):
    """Pin one focusing branch: fold sigma and make eps concrete."""
    return _subs_eps(substitute(e, {"sigma": sigma}), epsv)


# branch order follows the table header convention: eps = i is the
# focusing sign, eps = 1 the defocusing one
_BRANCHES = ((1, C_I, "focusing branch (sigma = +1, eps = i)"),
             (-1, C_ONE, "defocusing branch (sigma = -1, eps = 1)"))


def _r_power(e):
    """Exponent of r in a single-monomial expression."""
    nf = normalize(e)
    if len(nf) != 1:
        raise PotentialError("not a monomial: %s" % to_text(e))
    ((key, _coeff),) = nf.items()
    for atom, ex in key:
        if atom == ("r",):
            return ex
    return C_ZERO


# ---------------------------------------------------------------------------
# the enlarged system
# ---------------------------------------------------------------------------

class PotentialSystem:
    """An evolution equation together with one adjoined potential.

    The reduction rules prepend the eliminations for the potential (its
    r-derivative first, so mixed jets drain through the r-rule) to the
    rules inherited from the base equation, or from `parent` when
    potentials are layered.  reduce() therefore rewrites any expression
    over {t, r, u-jets, potential jets} in the free coordinates, where
    only underivated potentials survive.
    """

    __slots__ = ("base", "pot", "r_rule", "t_rule", "parent", "flagged",
                 "_rules")

    def __init__(self, base, pot, r_rule, t_rule, parent=None, flagged=None,
                 check=True):
        if parent is not None and parent.base is not base:
            raise PotentialError("parent system is built over a different"
                                 " equation")
        self.base = base
        self.pot = pot
        self.r_rule = r_rule
        self.t_rule = t_rule
        self.parent = parent
        self.flagged = flagged
        inherited = parent._rules if parent is not None else base._rules
        for lead, _rhs in inherited:
            if lead.dep == pot:
                raise PotentialError("potential name %r is already in use"
                                     % pot)
        self._rules = [(Jet(pot, 0, 1), r_rule),
                       (Jet(pot, 1, 0), t_rule)] + list(inherited)
        if check:
            res = self.consistency()
            if not is_zero(res):
                raise PotentialError(
                    "cross-derivatives of %s disagree: %s"
                    % (pot, "; ".join(_sample_terms(res))))

    def reduce(self, e):
        return reduce_mod_equation(e, self)

    def consistency(self):
        """D_t(r-rule) - D_r(t-rule), reduced; zero iff compatible."""
        return self.reduce(add(dt(self.r_rule), _neg(dr(self.t_rule))))

    def potentials(self):
        names = [self.pot]
        ps = self.parent
        while ps is not None:
            names.append(ps.pot)
            ps = ps.parent
        return names

    def is_nonlocal(self, e):
        """True iff e still involves a potential after reduction, i.e.
        cannot be expressed in the base jet variables."""
        red = self.reduce(e)
        names = set(self.potentials())
        return any(j.dep in names for j in iter_jets(red))

    def negated(self):
        """The image v -> -v (the orientation the stored systems
        display)."""
        return PotentialSystem(self.base, self.pot, _canon(_neg(self.r_rule)),
                               _canon(_neg(self.t_rule)), parent=self.parent,
                               flagged=self.flagged)

    def branch(self, sigma, epsv):
        """Rebuild the system on one concrete focusing branch."""
        if self.parent is not None:
            par = self.parent.branch(sigma, epsv)
            base = par.base
        else:
            par = None
            base = EquationSpec(self.base.name, self.base.klass,
                                self.base.leading,
                                _concrete(self.base.rhs, sigma, epsv),
                                self.base.is_complex, self.base.notes,
                                self.base.display_factor)
        return PotentialSystem(base, self.pot,
                               _concrete(self.r_rule, sigma, epsv),
                               _concrete(self.t_rule, sigma, epsv),
                               parent=par, flagged=self.flagged)

    def __repr__(self):
        return "PotentialSystem(%s; %s)" % (self.base.name,
                                            " over ".join(self.potentials()))


def _multiplier_flag(eqb, density):
    """None when the law's multiplier is a nonzero function of (t, r)
    alone, which certifies that the multiplier vanishes only on
    solutions; otherwise a short description of why the solution
    correspondence was not certified."""
    deps = ("u", "ubar") if eqb.is_complex else ("u",)
    mults = [variational_derivative(density, d, ("t", "r")) for d in deps]
    if all(is_zero(q) for q in mults):
        return "trivial multiplier: the density is a total divergence"
    for q in mults:
        for _j in iter_jets(q):
            return ("multiplier %s depends on the dependent variables;"
                    " the solution correspondence is not certified"
                    % to_text(q))
    return None


def build_potential_system(eq, law, sc=None, dep="v"):
    """Potentiate one conservation law of `eq`.

    `law` is anything carrying psi_t / psi_r densities (a catalog law or
    a plain pair of expressions); `sc` binds side-condition parameters
    on top of the law's own.  The adjoined relations are

        v_r = -r^w psi_t,      v_t = r^w psi_r,      w = bound m

    and the cross-derivative consistency is verified at construction.
    The multiplier condition is checked in the strong form (a nonzero
    function of t, r alone); systems failing it are still returned but
    carry a note in `flagged`.
    """
    if hasattr(law, "psi_t"):
        psi_t, psi_r = law.psi_t, law.psi_r
    elif hasattr(law, "expr"):
        psi_t, psi_r = law.expr("psi_t"), law.expr("psi_r")
    else:
        psi_t, psi_r = law
    cond = getattr(law, "side_condition", None)
    if callable(cond):
        cond = cond()
    cond = dict(cond or {})
    if sc:
        cond.update(sc)
    eqb = _bind_equation(eq, cond)
    w = cond.get("m", C_M)
    dens = _canon(mul(pw(R, w), _bind(psi_t, cond)))
    flux = _canon(mul(pw(R, w), _bind(psi_r, cond)))
    if is_zero(dens):
        raise PotentialError("law has a zero density; nothing to potentiate")
    return PotentialSystem(eqb, dep, _canon(_neg(dens)), flux,
                           flagged=_multiplier_flag(eqb, dens))


def conservation_residual(ps, psi_t, psi_r):
    """Reduced divergence D_t psi_t + D_r psi_r of a candidate law of
    the enlarged system.  The stored nonlocal densities carry their
    r-weights inside, so no weight factor is applied here."""
    return ps.reduce(add(dt(psi_t), dr(psi_r)))


def check_nonlocal_conservation(ps, psi_t, psi_r, sigmas=(1, -1)):
    """Verify a nonlocal law with eps symbolic (eps^2 = -sigma), then
    again on each requested concrete branch as a guard on the radical
    rewrite.  Returns a dict with the symbolic residual, the per-branch
    outcomes and whether the density is essentially nonlocal."""
    res = conservation_residual(ps, psi_t, psi_r)
    out = {"ok": is_zero(res), "residual": res, "branches": [],
           "nonlocal": ps.is_nonlocal(psi_t)}
    for sigma, epsv, label in _BRANCHES:
        if sigma not in sigmas:
            continue
        psb = ps.branch(sigma, epsv)
        resb = psb.reduce(add(dt(_concrete(psi_t, sigma, epsv)),
                              dr(_concrete(psi_r, sigma, epsv))))
        okb = is_zero(resb)
        out["branches"].append((label, okb, resb))
        out["ok"] = out["ok"] and okb
    return out


def second_level_potentiate(ps, psi_t, psi_r, dep="w"):
    """Adjoin a further potential from a verified law of the enlarged
    system (displayed orientation: w_r = psi_t, w_t = -psi_r; the
    densities already carry their weights)."""
    if is_zero(psi_t):
        raise PotentialError("degenerate law (zero density); nothing to"
                             " potentiate")
    if not is_zero(conservation_residual(ps, psi_t, psi_r)):
        raise PotentialError("law does not verify; cannot potentiate")
    return PotentialSystem(ps.base, dep, _canon(psi_t), _canon(_neg(psi_r)),
                           parent=ps)


# ---------------------------------------------------------------------------
# existence analysis
# ---------------------------------------------------------------------------

def _tower(e, onto="v"):
    """Rewrite r-jets of u one rung up the tower of the potential
    (valid over systems normalized to v_r = u, where u, u_r, ... are
    just the higher r-jets of v)."""
    sub = {}
    for j in iter_jets(e):
        if j.dep == "u":
            if j.nt:
                raise PotentialError("%s has no tower image" % j.name())
            sub[Jet("u", 0, j.nr)] = Jet(onto, 0, j.nr + 1)
    return substitute(e, sub) if sub else e


def flux_obstruction(ps, density):
    """Obstruction to the existence of *any* flux closing D_t(density).

    Over a system with v_r = u the reduced coordinates form the r-jet
    tower of v alone, so a reduced expression is a total r-derivative
    exactly when its r-direction variational derivative with respect to
    v vanishes after u-jets are rewritten up the tower.  Zero return
    value = some flux exists; nonzero = none does.
    """
    if not is_equal(ps.r_rule, U):
        raise PotentialError("the flux test requires the v_r = u"
                             " normalization")
    h = ps.reduce(dt(density))
    return variational_derivative(_tower(h, ps.pot), ps.pot, dirs=("r",))


def _linear_root(c, var):
    """Root of a coefficient linear in `var`: "any" when identically
    zero, None when no single value works."""
    if c.is_zero():
        return "any"
    c0 = c.subs_params({var: C_ZERO})
    slope = c.subs_params({var: C_ONE}) - c0
    if slope.is_zero():
        return None
    if c.subs_params({var: rational(2)}) - c0 != slope + slope:
        return None
    try:
        return (C_ZERO - c0) / slope
    except ZeroDivisionError:
        return None


def forced_parameter(e, var="m"):
    """The unique value of `var` at which `e` vanishes identically.

    Returns "any" when e is already zero, a Coeff when exactly one value
    closes every coefficient, and None otherwise.  Dependence on `var`
    must be affine (true of the reduced divergences here, where m enters
    through the equation and the weights only linearly).
    """
    nf = normalize(e)
    if not nf:
        return "any"
    root = None
    for c in nf.values():
        got = _linear_root(c, var)
        if got == "any":
            continue
        if got is None:
            return None
        if root is None:
            root = got
        elif root != got:
            return None
    if root is None:
        return None
    return root if is_zero(substitute(e, {var: root})) else None


_K_GRID = tuple(Fraction(i, 2) for i in range(7))


def second_level_density_scan(ps2, k_values=_K_GRID):
    """Scan the tabulated density shape r^k exp(eps sqrt2 w) over a
    second-level system.

    Writing any finite flux as exp(eps sqrt2 w) * sum_j exp(j eps sqrt2
    v) b_j(t, r, u-jets) and matching exponential grades from the top
    down forces b_j = 0 for every j >= 1 (each grade-(j+1) equation is
    the bump eps sqrt2 r^n b_j = 0) and pins r^n b_0 = r^k P, where
    r^n exp(eps sqrt2 v) is the w_r rule and P the v-exponential
    cofactor of the first-level flux.  What survives is the grade-zero
    requirement D_r b_0 = 0.  Returns (k, conserved?, obstruction)
    triples after confirming the forced candidate's residual identity
    mechanically.
    """
    if ps2.parent is None:
        raise PotentialError("scan needs a second-level system")
    vname = ps2.parent.pot
    n = _r_power(ps2.r_rule)
    vexp = mul(con(C_EPS * C_SQRT2), Jet(vname))
    if not is_equal(ps2.r_rule, mul(pw(R, n), exp_e(vexp))):
        raise PotentialError("w_r rule is not of the graded exponential"
                             " shape")
    cofactor = _canon(mul(_neg(ps2.t_rule), exp_e(mul(MINUS_ONE, vexp))))
    for j in iter_jets(cofactor):
        if j.dep == vname:
            raise PotentialError("flux cofactor still involves %s" % vname)
    wexp = exp_e(mul(con(C_EPS * C_SQRT2), Jet(ps2.pot)))
    out = []
    for k in k_values:
        kq = rational(Fraction(k))
        rho = mul(pw(R, kq), wexp)
        b0 = _canon(mul(pw(R, kq - n), cofactor))
        resid = ps2.reduce(add(dt(rho), dr(mul(wexp, b0))))
        obstruction = ps2.reduce(dr(b0))
        if not is_equal(resid, mul(wexp, obstruction)):
            raise PotentialError("grade bookkeeping failed at k = %s" % (k,))
        out.append((k, is_zero(obstruction), obstruction))
    return out


# ---------------------------------------------------------------------------
# symmetry closure
# ---------------------------------------------------------------------------

def _frechet_data(ps):
    """(k, dV/dv_k) pairs of the evolution rule seen through the tower,
    so that q generates a symmetry of v_t = V iff
    D_t q = sum_k (dV/dv_k) D_r^k q on the system."""
    tower = _tower(ps.t_rule, ps.pot)
    top = 0
    for j in iter_jets(tower):
        if j.dep == ps.pot:
            top = max(top, j.nr)
    out = []
    for k in range(1, top + 1):
        c = diff_atom(tower, Jet(ps.pot, 0, k))
        if not is_zero(c):
            out.append((k, c))
    return out


def closure_residual(ps, frech, q):
    """Linearized-evolution condition on a characteristic candidate."""
    ders = {0: q}
    d = q
    top = max(k for k, _c in frech)
    for k in range(1, top + 1):
        d = dr(d)
        ders[k] = d
    acc = [dt(q)]
    acc.extend(_neg(mul(c, ders[k])) for k, c in frech)
    return ps.reduce(add(*acc))


def _curl_residual(ps2, q):
    """Compatibility of the linearized w-rules along a v-characteristic:
    with w_r = A(r, v) and w_t = B(r, v, u-jets), a matching
    w-characteristic exists iff D_t(A_v q) - D_r(B_v q + sum_j B_{u_j}
    D_r^{j+1} q) reduces to zero."""
    vname = ps2.parent.pot
    a_v = diff_atom(ps2.r_rule, Jet(vname, 0, 0))
    b = ps2.t_rule
    pieces = [mul(diff_atom(b, Jet(vname, 0, 0)), q)]
    orders = sorted({j.nr for j in iter_jets(b) if j.dep == "u"})
    for j in orders:
        c = diff_atom(b, Jet("u", 0, j))
        if is_zero(c):
            continue
        d = q
        for _ in range(j + 1):
            d = dr(d)
        pieces.append(mul(c, d))
    return ps2.reduce(add(dt(mul(a_v, q)), _neg(dr(add(*pieces)))))


def _nullspace(columns):
    """Kernel basis of the sparse column family (dicts key -> Coeff).

    Exact Gauss-Jordan; pivot entries must be invertible, which holds
    over a concrete sigma branch where the coefficients live in a
    field."""
    rows = {}
    for i, col in enumerate(columns):
        for key, c in col.items():
            if not c.is_zero():
                rows.setdefault(key, {})[i] = c
    reduced = []
    pivot_of = {}
    for row in rows.values():
        row = dict(row)
        for col, idx in pivot_of.items():
            c = row.get(col)
            if c is None or c.is_zero():
                continue
            for k2, v2 in reduced[idx].items():
                acc = row.get(k2, C_ZERO) - c * v2
                if acc.is_zero():
                    row.pop(k2, None)
                else:
                    row[k2] = acc
        row = {k: v for k, v in row.items() if not v.is_zero()}
        if not row:
            continue
        piv = None
        for k2, v2 in row.items():
            try:
                piv = (k2, v2.inverse())
                break
            except ZeroDivisionError:
                continue
        if piv is None:
            raise PotentialError("zero divisor while eliminating; run the"
                                 " scan on a concrete branch")
        pcol, inv = piv
        row = {k: v * inv for k, v in row.items()}
        for prow in reduced:
            c = prow.get(pcol)
            if c is None or c.is_zero():
                continue
            for k2, v2 in row.items():
                acc = prow.get(k2, C_ZERO) - c * v2
                if acc.is_zero():
                    prow.pop(k2, None)
                else:
                    prow[k2] = acc
        reduced.append(row)
        pivot_of[pcol] = len(reduced) - 1
    n = len(columns)
    basis = []
    for f in range(n):
        if f in pivot_of:
            continue
        vec = [C_ZERO] * n
        vec[f] = C_ONE
        for col, idx in pivot_of.items():
            c = reduced[idx].get(f)
            if c is not None and not c.is_zero():
                vec[col] = C_ZERO - c
        basis.append(vec)
    return basis


_S_GRID = tuple(Fraction(i, 2) for i in range(5))


def ansatz_characteristics(ps):
    """Span scanned for symmetry directions: the exponential of the
    outermost potential times r^s times a low-order u-jet monomial (s on
    a half-integer grid), with the inner exponential optionally mixed in
    at the second level.  The local time-translation characteristic
    (q = the evolution rule itself) is prepended as a built-in control:
    the scan must always find it, and any kernel direction touching the
    exponential candidates is a nonlocal symmetry."""
    vps = ps
    while vps.parent is not None:
        vps = vps.parent
    out = [vps.t_rule]
    ur = Jet("u", 0, 1)
    if ps.parent is None:
        monos = (ONE, U, pw(U, 2), pw(U, 3), ur, mul(U, ur), Jet("u", 0, 2))
        inner = (ONE,)
    else:
        monos = (ONE, U, pw(U, 2), ur)
        inner = (ONE, exp_e(mul(con(C_EPS * C_SQRT2), Jet(ps.parent.pot))))
    outer = exp_e(mul(con(C_EPS * C_SQRT2), Jet(ps.pot)))
    for mono in monos:
        for s in _S_GRID:
            for ex2 in inner:
                out.append(mul(outer, ex2, pw(R, rational(s)), mono))
    return out


def symmetry_scan(ps, candidates, with_curl=False):
    """Kernel of the closure conditions over the candidate span.

    Each kernel vector is a list of Coeff weights for `candidates`; at
    the second level the w-rule compatibility (curl) rows are adjoined
    so a surviving vector genuinely extends to the full system."""
    vps = ps
    while vps.parent is not None:
        vps = vps.parent
    frech = _frechet_data(vps)
    cols = []
    for q in candidates:
        col = {("evo", k): c
               for k, c in normalize(closure_residual(ps, frech, q)).items()}
        if with_curl:
            col.update({("curl", k): c
                        for k, c in normalize(_curl_residual(ps, q)).items()})
        cols.append(col)
    return _nullspace(cols)


def _kernel_split(kernel):
    """(has control direction, number of directions touching the
    exponential candidates)."""
    control = False
    extra = 0
    for vec in kernel:
        if any(not c.is_zero() for c in vec[1:]):
            extra += 1
        elif not vec[0].is_zero():
            control = True
    return control, extra


# External datum: the classical nonlocal symmetry of the m = 0 cubic
# case shifts the first potential by the second one (v-characteristic
# w), acting on u as D_r w = the exponential of the potential.  It is
# not rederived here; closure is checked mechanically.
KNOWN_SYMMETRY_POT = "w"


def known_symmetry_closure(ps2):
    """(evolution, compatibility) residuals of the externally known
    direction Q^v = w over a second-level system; the direction is an
    admitted symmetry exactly when both vanish."""
    if ps2.parent is None:
        raise PotentialError("the known direction lives over a"
                             " second-level system")
    vps = ps2
    while vps.parent is not None:
        vps = vps.parent
    q = Jet(ps2.pot)
    return (closure_residual(ps2, _frechet_data(vps), q),
            _curl_residual(ps2, q))


# ---------------------------------------------------------------------------
# row battery
# ---------------------------------------------------------------------------

def _proportion(h, g):
    """Scale lam with h + lam*g == 0, or None."""
    hn = normalize(h)
    gn = normalize(g)
    if not hn and not gn:
        return C_ONE
    if set(hn) != set(gn):
        return None
    lam = None
    for key, c in hn.items():
        try:
            got = (C_ZERO - c) / gn[key]
        except ZeroDivisionError:
            return None
        if lam is None:
            lam = got
        elif lam != got:
            return None
    return lam


def _remarked_m(row):
    got = re.search(r"m\s*=\s*([0-9]+(?:/[0-9]+)?)", row.remarks or "")
    return Fraction(got.group(1)) if got else None


def _mass_law(name):
    from .catalog import list_table, _CONSERVATION_TABLE
    for cand in list_table(_CONSERVATION_TABLE[name]):
        if cand.label == "mass":
            return (cand.expr("psi_t"), cand.expr("psi_r"))
    raise PotentialError("no stored mass law for %s" % name)


def nonlocal_row_report(row, sigmas=(1, -1)):
    """Run the full battery for one stored nonlocal-law row.

    Returns a plain dict (ok, notes, residual_terms, equation); the
    verification layer renders it into its report schema.  The battery:
    the stored system is rebuilt as the potentiation of the catalog mass
    law; the law is verified with eps symbolic and on the requested
    concrete branches; the displayed flux variant is compared per branch;
    the density's r-power is shown to pin the weight m (surfacing the
    remark discrepancy where the remark disagrees); and the second-level
    system is adjoined and scanned for the absence of further laws and
    of nonlocal symmetry directions of the tabulated exponential shape.
    """
    from .catalog import symbolic_equation

    name = row.fields.get("eq", "mKdV-1")
    sc = row.side_condition()
    notes = []
    residuals = []
    ok = True

    eq = symbolic_equation(name)
    eqb = _bind_equation(eq, sc)
    v_r = _canon(row.expr("v_r"))
    v_t = _canon(row.expr("v_t"))
    psi_t = _canon(row.expr("psi_t"))
    psi_r = _canon(row.expr("psi_r"))
    printed = row.expr("psi_r_printed")

    try:
        ps = PotentialSystem(eqb, "v", v_r, v_t)
    except PotentialError as exc:
        return {"equation": name, "ok": False, "residual_terms": [],
                "notes": ["stored system is inconsistent: %s" % exc]}

    mass = _mass_law(name)
    built = build_potential_system(eq, mass, sc=sc).negated()
    if is_equal(built.r_rule, v_r) and is_equal(built.t_rule, v_t):
        notes.append("system equals the potentiation of the mass law"
                     " (orientation v -> -v)")
    else:
        ok = False
        notes.append("stored system does not match the potentiated mass law")
    if built.flagged:
        notes.append(built.flagged)

    chk = check_nonlocal_conservation(ps, psi_t, psi_r, sigmas=sigmas)
    if chk["ok"]:
        notes.append("divergence identity closes with eps symbolic"
                     " (eps^2 = -sigma) and on each requested branch")
    else:
        ok = False
        bad = chk["residual"]
        if is_zero(bad):
            bad = next(res for _lbl, okb, res in chk["branches"] if not okb)
        residuals = _sample_terms(bad)
        notes.append("divergence identity fails")
    if not chk["nonlocal"]:
        ok = False
        notes.append("density reduces to the base jet variables; the law"
                     " is not nonlocal")

    if printed is not None:
        for sigma, epsv, label in _BRANCHES:
            if sigma not in sigmas:
                continue
            psb = ps.branch(sigma, epsv)
            h = psb.reduce(dt(_concrete(psi_t, sigma, epsv)))
            g = psb.reduce(dr(_concrete(printed, sigma, epsv)))
            lam = _proportion(h, g)
            if lam is None:
                notes.append("%s: the psi_r_printed variant does not close"
                             " for any constant rescaling" % label)
            elif lam.is_one():
                notes.append("%s: the psi_r_printed variant closes as"
                             " stored" % label)
            else:
                notes.append("%s: the psi_r_printed variant closes only"
                             " after rescaling by %s" % (label,
                                                         lam.to_text()))

    # the r-power of the density pins the weight m
    nq = _r_power(psi_t)
    free_ps = build_potential_system(eq, mass,
                                     sc={"p": sc["p"]}).negated()
    mstar = forced_parameter(flux_obstruction(free_ps, psi_t), "m")
    if mstar == "any":
        notes.append("the density is conserved at every weight m")
    elif mstar is None:
        ok = False
        notes.append("no weight m admits a flux for this density")
    else:
        notes.append("a flux for the r^%s-weighted density exists only at"
                     " m = %s" % (nq.to_text(), mstar.to_text()))
        if mstar != sc["m"]:
            ok = False
            notes.append("stored weight m = %s disagrees with the computed"
                         " one" % sc["m"].to_text())
        remark = _remarked_m(row)
        if remark is not None and rational(remark) != mstar:
            alt = build_potential_system(
                eq, mass, sc={"m": rational(remark), "p": sc["p"]}).negated()
            res_alt = conservation_residual(alt, psi_t, psi_r)
            if is_zero(res_alt):
                ok = False
                notes.append("remarked m = %s unexpectedly verifies too"
                             % remark)
            else:
                notes.append("the remark column states m = %s, but the"
                             " identity fails there (e.g. %s) and closes"
                             " at the computed m = %s, matching the stored"
                             " reduction rules"
                             % (remark, _sample_terms(res_alt, cap=2)[0],
                                mstar.to_text()))

    # second level: adjoin w and reproduce the absence results
    try:
        ps2 = second_level_potentiate(ps, psi_t, psi_r)
    except PotentialError as exc:
        return {"equation": name, "ok": False, "residual_terms": residuals,
                "notes": notes + ["second-level potentiation failed: %s"
                                  % exc]}
    scan = second_level_density_scan(ps2)
    found = [str(k) for k, conserved, _o in scan if conserved]
    if found:
        ok = False
        notes.append("second level: densities r^k exp(eps sqrt2 w) ARE"
                     " conserved at k in {%s}" % ", ".join(found))
    else:
        notes.append("second level: no density r^k exp(eps sqrt2 w) is"
                     " conserved for k in {0, 1/2, ..., 3} (the forced"
                     " flux cofactor keeps a jet obstruction)")

    scan_extra = 0
    for sigma, epsv, label in _BRANCHES:
        if sigma not in sigmas:
            continue
        psb = ps.branch(sigma, epsv)
        cands = [_concrete(q, sigma, epsv)
                 for q in ansatz_characteristics(psb)]
        control, extra = _kernel_split(symmetry_scan(psb, cands))
        if not control:
            ok = False
            notes.append("%s: the scan lost the time-translation control"
                         " direction" % label)
        if extra:
            ok = False
            notes.append("%s: %d unexpected nonlocal symmetry direction(s)"
                         " over the first-level system" % (label, extra))

        ps2b = ps2.branch(sigma, epsv)
        cands2 = [_concrete(q, sigma, epsv)
                  for q in ansatz_characteristics(ps2b)]
        control2, extra2 = _kernel_split(
            symmetry_scan(ps2b, cands2, with_curl=True))
        if not control2:
            ok = False
            notes.append("%s: the second-level scan lost the"
                         " time-translation control direction" % label)
        if extra2:
            if sc["m"].is_zero():
                notes.append("%s: closure admits %d nonlocal symmetry"
                             " direction(s) at the second level, as known"
                             " for m = 0" % (label, extra2))
            else:
                ok = False
                notes.append("%s: %d unexpected nonlocal symmetry"
                             " direction(s) at the second level"
                             % (label, extra2))
        scan_extra += extra + extra2
    if not scan_extra:
        notes.append("scan: no nonlocal symmetry direction of the"
                     " tabulated exponential shape at either level")

    # the externally known m = 0 direction (not rederived here)
    evo, curl = known_symmetry_closure(ps2)
    closes = is_zero(evo) and is_zero(curl)
    if sc["m"].is_zero():
        if closes:
            notes.append("the externally known nonlocal symmetry"
                         " (v-characteristic w, acting on u as the"
                         " exponential of the potential) closes at m = 0")
        else:
            ok = False
            notes.append("the externally known m = 0 nonlocal symmetry"
                         " fails to close")
            residuals = residuals or _sample_terms(
                evo if not is_zero(evo) else curl)
    else:
        if closes:
            ok = False
            notes.append("the externally known m = 0 direction unexpectedly"
                         " closes at m = %s" % sc["m"].to_text())
        else:
            bad = evo if not is_zero(evo) else curl
            notes.append("the externally known m = 0 direction fails to"
                         " close at m = %s (e.g. %s), matching the absence"
                         " of nonlocal symmetries away from m = 0"
                         % (sc["m"].to_text(), _sample_terms(bad, cap=1)[0]))

    return {"equation": name, "ok": ok, "residual_terms": residuals,
            "notes": notes}
