"""Catalog of the seven radial evolution equations and their tabulated data.

Everything the verification suite replays lives here: the equations
themselves (solved form plus displayed right-hand side), their variational
and Hamiltonian structure, the point symmetries, the conservation laws, the
optimal subalgebra representatives, and the critical-power formulas.  Rows
are addressed by stable identifiers ``T0`` .. ``T22`` / ``rowN`` and loaded
from ``data/tables.dat``; the equations and per-equation structure are built
in code.

Sign conventions: ``sigma = +1`` is the focusing branch, ``-1`` the
defocusing branch.  Entries are always retrieved at a concrete sigma.
"""

from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .coeffs import C_I, C_M, C_P, C_SIGMA, C_ZERO, Coeff, rational
from .expr import (Jet, R, U, UBAR, add, con, iter_jets, jet, mul,
                   normalize, pw, substitute)
from .jets import EquationSpec, VectorField, dr
from .parser import parse

__all__ = [
    "CatalogError", "EQUATION_NAMES", "Table", "TableRow", "ConsLaw",
    "CatalogEntry", "get_equation", "special_power", "list_table",
    "list_tables", "table_ids", "realify", "density_expr",
    "case_side_condition",
]

EQUATION_NAMES = ("NLW", "NLS", "dNLS", "dNLS-H", "mKdV-1", "mKdV-2",
                  "mKdV-H")

_LAW_LABELS = frozenset([
    "energy", "charge", "momentum", "boost momentum", "dilational energy",
    "conformal energy", "mass", "Hamiltonian", "dilational momentum",
    "other",
])


class CatalogError(ValueError):
    pass


def realify(e):
    """Replace barred jets by their unbarred partners (real equations)."""
    binds = {}
    for j in iter_jets(e):
        if j.dep.endswith("bar"):
            binds[j] = Jet(j.dep[:-3], j.nt, j.nr)
    return substitute(e, binds) if binds else e


def _const_coeff(e):
    nf = normalize(e)
    if not nf:
        return C_ZERO
    if len(nf) == 1 and () in nf:
        return nf[()]
    raise CatalogError("expected a pure coefficient, got %r" % (e,))


# ---------------------------------------------------------------------------
# data file


class TableRow:
    """One line of the data file: structured fields plus free-text fields."""

    __slots__ = ("table_id", "row_id", "fields", "text")

    def __init__(self, table_id, row_id, fields, text):
        self.table_id = table_id
        self.row_id = row_id
        self.fields = fields
        self.text = text

    @property
    def id(self):
        return "%s.%s" % (self.table_id, self.row_id)

    @property
    def remarks(self):
        return self.text.get("remarks", "")

    @property
    def note(self):
        return self.text.get("note", "")

    @property
    def label(self):
        return self.text.get("label", "")

    def equations(self):
        raw = self.fields.get("eq", "")
        if raw == "ALL":
            return list(EQUATION_NAMES)
        return [s.strip() for s in raw.split(",") if s.strip()]

    def expr(self, key, sigma=None, real=False, default=None):
        raw = self.fields.get(key)
        if raw is None:
            return default
        e = parse(raw)
        if sigma is not None:
            e = substitute(e, {"sigma": sigma})
        if real:
            e = realify(e)
        return e

    def coeff(self, key, default=None):
        raw = self.fields.get(key)
        if raw is None:
            return default
        return _const_coeff(parse(raw))

    def side_condition(self):
        out = {}
        for key in ("m", "p"):
            c = self.coeff(key)
            if c is not None:
                out[key] = c
        return out

    def generator_names(self):
        raw = self.fields.get("generators", "")
        return [s.strip() for s in raw.split(",") if s.strip()]

    def __repr__(self):
        return "TableRow(%s)" % self.id


class Table:
    __slots__ = ("id", "title", "rows")

    def __init__(self, tid, title):
        self.id = tid
        self.title = title
        self.rows = []

    def row(self, row_id):
        for r in self.rows:
            if r.row_id == row_id:
                return r
        raise CatalogError("no row %r in table %s" % (row_id, self.id))

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@lru_cache(maxsize=1)
def _tables():
    text = resources.files("radsym").joinpath("data/tables.dat").read_text()
    tables = {}
    order = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("table "):
            tid, _, title = line[6:].partition("::")
            tid = tid.strip()
            tables[tid] = Table(tid, title.strip())
            order.append(tid)
            current = tid
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) < 3:
            raise CatalogError("malformed row at line %d" % lineno)
        tid, row_id = parts[0], parts[1]
        if tid not in tables:
            raise CatalogError("row for undeclared table %r at line %d"
                               % (tid, lineno))
        if tid != current:
            raise CatalogError("row out of section at line %d" % lineno)
        fields = {}
        text_fields = {}
        for part in parts[2:]:
            eq_pos = part.find("=")
            col_pos = part.find(":")
            if col_pos != -1 and (eq_pos == -1 or col_pos < eq_pos):
                text_fields[part[:col_pos].strip()] = part[col_pos + 1:].strip()
            elif eq_pos != -1:
                fields[part[:eq_pos].strip()] = part[eq_pos + 1:].strip()
            else:
                raise CatalogError("bad field %r at line %d" % (part, lineno))
        label = text_fields.get("label")
        if label is not None and label not in _LAW_LABELS and \
                tid in ("T10", "T11", "T12", "T13", "T14", "T15", "T16"):
            raise CatalogError("unknown law label %r at line %d"
                               % (label, lineno))
        tables[tid].rows.append(TableRow(tid, row_id, fields, text_fields))
    return tables, tuple(order)


def table_ids():
    return _tables()[1]


def list_tables():
    tables, order = _tables()
    return [(tid, tables[tid].title, len(tables[tid])) for tid in order]


def list_table(table_id):
    tables, _ = _tables()
    try:
        return tables[table_id]
    except KeyError:
        raise CatalogError("unknown table %r (have %s)"
                           % (table_id, ", ".join(_tables()[1]))) from None


# ---------------------------------------------------------------------------
# the equations

_RINV = pw(R, rational(-1))
_MINUS_I = -C_I


def _abs_pow(q):
    """|u|^q as (u*ubar)^(q/2)."""
    return pw(mul(U, UBAR), q * rational(1, 2))


def _laplacian(dep="u"):
    return add(jet(dep, 0, 2), mul(con(C_M), _RINV, jet(dep, 0, 1)))


def _mkdv_k(sig):
    """K = u_rr + m r^-1 u_r + sigma u^(p+1)."""
    return add(_laplacian(), mul(con(sig), pw(U, C_P + rational(1))))


def _build_equation(name, sig):
    """Return (EquationSpec in solved form, displayed right-hand side)."""
    if name == "NLW":
        display = add(_laplacian(), mul(con(sig), pw(U, C_P)))
        eq = EquationSpec(name, "wave", Jet("u", 2, 0), display, False,
                          notes="p != 0, 1")
        return eq, display
    if name == "NLS":
        display = add(_laplacian(), mul(con(sig), _abs_pow(C_P), U))
        eq = EquationSpec(name, "schrodinger", Jet("u", 1, 0),
                          mul(con(_MINUS_I), display), True, notes="p != 0",
                          display_factor=C_I)
        return eq, display
    if name == "dNLS":
        nl = mul(con(sig * C_I), _abs_pow(C_P),
                 add(jet("u", 0, 1),
                     mul(con(C_M / (C_P + rational(2))), _RINV, U)))
        display = add(_laplacian(), nl)
        eq = EquationSpec(name, "schrodinger", Jet("u", 1, 0),
                          mul(con(_MINUS_I), display), True, notes="p != 0",
                          display_factor=C_I)
        return eq, display
    if name == "dNLS-H":
        mterm = mul(con(C_M * (C_M - rational(2)) / rational(4)),
                    pw(R, rational(-2)), U)
        nl = mul(con(sig * C_I),
                 add(dr(mul(_abs_pow(C_P), U)),
                     mul(con(C_M / rational(2)), _abs_pow(C_P), _RINV, U)))
        display = add(_laplacian(), mterm, nl)
        eq = EquationSpec(name, "schrodinger", Jet("u", 1, 0),
                          mul(con(_MINUS_I), display), True, notes="p != 0",
                          display_factor=C_I)
        return eq, display
    if name in ("mKdV-1", "mKdV-2", "mKdV-H"):
        k = _mkdv_k(sig)
        display = dr(k)
        if name == "mKdV-2":
            display = add(display, mul(con(C_M), _RINV, k))
        elif name == "mKdV-H":
            display = add(display, mul(con(C_M / rational(2)), _RINV, k))
        eq = EquationSpec(name, "mkdv", Jet("u", 1, 0), display, False,
                          notes="p != 0")
        return eq, display
    raise CatalogError("unknown equation %r (have %s)"
                       % (name, ", ".join(EQUATION_NAMES)))


# Lagrangian / Hamiltonian / energy densities, written in the parser grammar
# with sigma symbolic.  The NLS Lagrangian coupling is stored as 2/(p+2)
# (printed: 1/(p+2)), the value for which the Euler-Lagrange equation
# reproduces the flow; see notes in the corresponding rows.

_LAGRANGIANS = {
    "NLW": "1/2*(u_r^2-u_t^2)-sigma*F(u,p+1)",
    "NLS": "i*ubar*u_t+u_r*ubar_r-sigma*2*F(abs(u),p+2)",
    "dNLS": "i*ubar*u_t+u_r*ubar_r"
            "-sigma*i/(p+2)*abs(u)^p*(ubar*u_r-u*ubar_r)",
}

# operator tags: how delta H / delta ubar is turned into the time derivative
_HAMILTONIANS = {
    "NLS": ("-(u_r*ubar_r)+sigma*2*F(abs(u),p+2)", "multiplication-by-i"),
    "dNLS-H": ("i/2*(u*ubar_r-u_r*ubar)+sigma*2*F(abs(u),p+2)",
               "radial-weighted-derivative"),
    "mKdV-H": ("-1/2*u_r^2+sigma*F(u,p+2)", "radial-weighted-derivative"),
}

_ENERGY_DENSITIES = {
    "NLW": "1/2*(u_t^2+u_r^2)-sigma*F(u,p+1)",
    "NLS": "1/2*u_r*ubar_r-sigma*F(abs(u),p+2)",
    "dNLS": "u_r*ubar_r-sigma*i*(u_r*ubar-u*ubar_r)"
            "*abs(u)^(-2)*F(abs(u),p+2)",
    "dNLS-H": "i/2*(u*ubar_r-u_r*ubar)+sigma*2*F(abs(u),p+2)",
    "mKdV-H": "1/2*u_r^2-sigma*F(u,p+2)",
}

_CONSERVATION_TABLE = {
    "NLW": "T10", "NLS": "T11", "dNLS": "T12", "dNLS-H": "T13",
    "mKdV-H": "T14", "mKdV-1": "T15", "mKdV-2": "T16",
}


class ConsLaw:
    """One conservation law, D_t(r^m Psi^t) + D_r(r^m Psi^r) = 0 on
    solutions, with C = integral of Psi^t r^m dr."""

    __slots__ = ("eq_name", "psi_t", "psi_r", "side_condition", "label",
                 "remarks", "note", "table_id", "row_id")

    def __init__(self, eq_name, psi_t, psi_r, side_condition, label,
                 remarks, note, table_id, row_id):
        self.eq_name = eq_name
        self.psi_t = psi_t
        self.psi_r = psi_r
        self.side_condition = side_condition
        self.label = label
        self.remarks = remarks
        self.note = note
        self.table_id = table_id
        self.row_id = row_id
        for j in iter_jets(psi_t):
            if j.nt > 1 or j.nr > 1:
                raise CatalogError("density of %s.%s exceeds first order"
                                   % (table_id, row_id))
        for j in iter_jets(psi_r):
            if j.nt + j.nr > 2:
                raise CatalogError("flux of %s.%s exceeds second order"
                                   % (table_id, row_id))

    @property
    def id(self):
        return "%s.%s" % (self.table_id, self.row_id)

    def __repr__(self):
        return "ConsLaw(%s, %s)" % (self.eq_name, self.label or self.id)


class CatalogEntry:
    """Everything the suite knows about one equation at a fixed sigma."""

    def __init__(self, name, sigma, equation, rhs, lagrangian, hamiltonian,
                 energy_density, symmetries, conservation_laws,
                 subalgebra_reps, special_powers, notes=""):
        self.name = name
        self.sigma = sigma
        self.equation = equation
        self.rhs = rhs                      # displayed right-hand side
        self.lagrangian = lagrangian
        self.hamiltonian = hamiltonian      # (density, operator tag) or None
        self.energy_density = energy_density
        self.symmetries = symmetries
        self.conservation_laws = conservation_laws
        self.subalgebra_reps = subalgebra_reps
        self.special_powers = special_powers
        self.notes = notes

    @property
    def klass(self):
        return self.equation.klass

    @property
    def is_complex(self):
        return self.equation.is_complex

    def symmetry(self, label):
        for x in self.symmetries:
            if x.label == label:
                return x
        raise CatalogError("%s has no symmetry %r" % (self.name, label))

    def conservation_law(self, label):
        for law in self.conservation_laws:
            if law.label == label:
                return law
        raise CatalogError("%s has no conservation law %r"
                           % (self.name, label))

    def __repr__(self):
        return "CatalogEntry(%s, sigma=%+d)" % (self.name, self.sigma)


def _symmetry_rows(name):
    rows = []
    for tid in ("T0", "T1", "T2", "T3", "T4", "T5", "T6"):
        for row in list_table(tid):
            if name in row.equations():
                rows.append(row)
    return rows


def symbolic_equation(name, sig=C_SIGMA):
    """EquationSpec with the focusing sign left as a symbolic coefficient.

    Useful when an identity should be settled once for both branches; pass
    a concrete Coeff to pin the sign instead.
    """
    return _build_equation(name, sig)[0]


def get_equation(name, sigma):
    if sigma not in (1, -1):
        raise CatalogError("sigma must be +1 or -1, got %r" % (sigma,))
    return _entry(name, sigma)


@lru_cache(maxsize=None)
def _entry(name, sigma):
    sig = rational(sigma)
    eq, display = _build_equation(name, sig)
    real = not eq.is_complex

    lag = _LAGRANGIANS.get(name)
    if lag is not None:
        lag = substitute(parse(lag), {"sigma": sigma})
        if real:
            lag = realify(lag)
    ham = _HAMILTONIANS.get(name)
    if ham is not None:
        dens = substitute(parse(ham[0]), {"sigma": sigma})
        if real:
            dens = realify(dens)
        ham = (dens, ham[1])
    edens = _ENERGY_DENSITIES.get(name)
    if edens is not None:
        edens = substitute(parse(edens), {"sigma": sigma})
        if real:
            edens = realify(edens)

    syms = []
    for row in _symmetry_rows(name):
        tau = row.expr("tau", sigma=sigma)
        xi = row.expr("xi", sigma=sigma)
        eta = row.expr("eta", sigma=sigma, real=real)
        syms.append(VectorField(tau, xi, eta,
                                side_condition=row.side_condition(),
                                label=row.label, is_complex=eq.is_complex))

    laws = []
    for row in list_table(_CONSERVATION_TABLE[name]):
        laws.append(ConsLaw(
            name,
            row.expr("psi_t", sigma=sigma, real=real),
            row.expr("psi_r", sigma=sigma, real=real),
            row.side_condition(), row.label, row.remarks, row.note,
            row.table_id, row.row_id))

    reps = []
    for row in list_table("T9"):
        if name in row.equations():
            reps.append({"generators": row.generator_names(),
                         "case": row.fields.get("case", "generic"),
                         "remarks": row.remarks})

    powers = {k: disp for k, (disp, _fn, _chk) in _POWERS[name].items()}

    notes = eq.notes
    if name in ("mKdV-1", "mKdV-2"):
        notes += ("; no Lagrangian or Hamiltonian structure for m != 0"
                  " (at m = 0 the mKdV-H Hamiltonian applies)")
    return CatalogEntry(name, sigma, eq, display, lag, ham, edens, syms,
                        laws, reps, powers, notes)


def density_expr(row, entry):
    """Parse a table density field, expanding the E[u] energy macro."""
    raw = row.fields["density"]
    if "E[u]" in raw:
        if entry.energy_density is None:
            raise CatalogError("%s has no energy density for %s"
                               % (entry.name, row.id))
        raw = raw.replace("E[u]", "(%s)" % _ENERGY_DENSITIES[entry.name])
    e = substitute(parse(raw), {"sigma": entry.sigma})
    return realify(e) if not entry.is_complex else e


def case_side_condition(name, case):
    """Parameter binding for a symmetry-group case tag.

    'generic' leaves (p, m) free; 'conformal' binds the inversion row's
    side condition for the equation.
    """
    if case == "generic":
        return {}
    if case != "conformal":
        raise CatalogError("unknown case %r" % (case,))
    for row in _symmetry_rows(name):
        if row.label == "inversion":
            return row.side_condition()
    raise CatalogError("%s admits no inversion symmetry" % name)


# ---------------------------------------------------------------------------
# critical powers
#
# Each entry: kind -> (display string, m -> Fraction, excluded m values).
# Hs-critical takes s as well; critical-s takes p and returns the Sobolev
# exponent instead of a power.


def _lin(num, shift, off=0):
    """m -> off + num/(m + shift), guarding the pole."""
    def fn(m, _s=None):
        den = m + shift
        if den == 0:
            raise CatalogError("formula degenerates at m = %s" % (m,))
        return Fraction(off) + Fraction(num) / den
    return fn


def _hs(num, off=0):
    def fn(m, s):
        den = m + 1 - 2 * s
        if den == 0:
            raise CatalogError("formula degenerates at m+1-2s = 0")
        return Fraction(off) + Fraction(num) / den
    return fn


def _crit_s(cnum, pshift):
    """p -> (m+1)/2 - cnum/(p + pshift)."""
    def fn(m, p):
        den = p + pshift
        if den == 0:
            raise CatalogError("no critical exponent at p = %s" % (p,))
        return Fraction(m + 1, 2) - Fraction(cnum) / den
    return fn


def _fixed(mval, pval):
    def fn(m, _s=None):
        if m != mval:
            raise CatalogError("conformal power exists only at m = %s"
                               % (mval,))
        return Fraction(pval)
    return fn


_POWERS = {
    "NLW": {
        "conformal": ("1+4/m", _lin(4, 0, 1), None),
        "dilation-critical": ("1+4/m", _lin(4, 0, 1), None),
        "energy-critical": ("1+4/(m-1)", _lin(4, -1, 1), None),
        "L2-critical": ("1+4/(m+1)", _lin(4, 1, 1), None),
        "Hs-critical": ("1+4/(m+1-2s)", _hs(4, 1), None),
        "critical-s": ("(m+1)/2-2/(p-1)", _crit_s(2, -1), None),
    },
    "NLS": {
        "conformal": ("4/(m+1)", _lin(4, 1), None),
        "dilation-critical": ("4/(m+1)", _lin(4, 1), None),
        "energy-critical": ("4/(m-1)", _lin(4, -1), None),
        "L2-critical": ("4/(m+1)", _lin(4, 1), None),
        "Hs-critical": ("4/(m+1-2s)", _hs(4), None),
        "critical-s": ("(m+1)/2-2/p", _crit_s(2, 0), None),
    },
    "dNLS": {
        "dilation-critical": ("2/(m+1)", _lin(2, 1), None),
        "energy-critical": ("2/(m-1)", _lin(2, -1), None),
        "L2-critical": ("2/(m+1)", _lin(2, 1), None),
        "Hs-critical": ("2/(m+1-2s)", _hs(2), None),
        "critical-s": ("(m+1)/2-1/p", _crit_s(1, 0), None),
    },
    "dNLS-H": {
        "dilation-critical": ("2/(m+2)", _lin(2, 2), None),
        "energy-critical": ("2/m", _lin(2, 0), None),
        "L2-critical": ("2/(m+1)", _lin(2, 1), None),
        "Hs-critical": ("2/(m+1-2s)", _hs(2), None),
        "critical-s": ("(m+1)/2-1/p", _crit_s(1, 0), None),
    },
    "mKdV-1": {
        "L2-critical": ("4/(m+1)", _lin(4, 1), None),
        "Hs-critical": ("4/(m+1-2s)", _hs(4), None),
        "critical-s": ("(m+1)/2-2/p", _crit_s(2, 0), None),
    },
    "mKdV-2": {
        "conformal": ("1 (m=1)", _fixed(1, 1), None),
        "L2-critical": ("4/(m+1)", _lin(4, 1), None),
        "Hs-critical": ("4/(m+1-2s)", _hs(4), None),
        "critical-s": ("(m+1)/2-2/p", _crit_s(2, 0), None),
    },
    "mKdV-H": {
        "conformal": ("1 (m=2)", _fixed(2, 1), None),
        "dilation-critical": ("4/(m+2)", _lin(4, 2), None),
        "energy-critical": ("4/(m-1)", _lin(4, -1), None),
        "L2-critical": ("4/(m+1)", _lin(4, 1), None),
        "Hs-critical": ("4/(m+1-2s)", _hs(4), None),
        "critical-s": ("(m+1)/2-2/p", _crit_s(2, 0), None),
    },
}


def special_power(name, kind, m, s=None, p=None):
    """Evaluate a tabulated critical-power formula in exact arithmetic.

    kind is one of conformal, dilation-critical, energy-critical,
    L2-critical, Hs-critical (requires s), critical-s (requires p; returns
    the critical Sobolev exponent for the given power).
    """
    if name not in _POWERS:
        raise CatalogError("unknown equation %r" % (name,))
    try:
        _disp, fn, _chk = _POWERS[name][kind]
    except KeyError:
        raise CatalogError("no %s formula for %s" % (kind, name)) from None
    m = Fraction(m)
    if kind == "Hs-critical":
        if s is None:
            raise CatalogError("Hs-critical needs the Sobolev index s")
        return fn(m, Fraction(s))
    if kind == "critical-s":
        if p is None:
            raise CatalogError("critical-s needs the power p")
        return fn(m, Fraction(p))
    return fn(m)
