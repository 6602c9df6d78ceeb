"""Distributions and Pfaffian systems on a chart, evaluated point by point.

Every verdict here is exact at a rational point. Regularity on the chart is
certified by sampling: a quantity is declared regular when all sampled values
agree, and deviating points are reported as singular-locus witnesses.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy as sp

from . import config
from . import exact_linalg as xl
from .errors import CorankError, EmptyInputError, NoPolynomialAnnihilator
from .exterior import (
    ExtForm, PolyScalar, RationalPoint, VectorField, covector_rows,
    form_vector_rows, lie_bracket, two_form_matrix, bilinear,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Distribution:
    chart: object
    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise EmptyInputError("a distribution needs at least one generator")
        for g in gens:
            if g.chart != self.chart:
                raise ValueError(f"generator {g} is not on {self.chart!r}")

    def __len__(self):
        return len(self.generators)

    def rows(self, point):
        return [list(g.evaluate(point)) for g in self.generators]

    def basis_at(self, point):
        return xl.row_basis(self.rows(point), self.chart.dim)


@dataclass(frozen=True)
class PfaffianSystem:
    chart: object
    forms: tuple

    def __post_init__(self):
        forms = tuple(self.forms)
        object.__setattr__(self, "forms", forms)
        if not forms:
            raise EmptyInputError("a Pfaffian system needs at least one form")
        for f in forms:
            if f.chart != self.chart or f.degree != 1:
                raise ValueError(f"{f} is not a 1-form on {self.chart!r}")

    def kernel_at(self, point):
        return xl.nullspace(covector_rows(self.forms, point), self.chart.dim)

    def rank_at(self, point):
        return xl.rank(covector_rows(self.forms, point))


@dataclass(frozen=True)
class GrowthVector:
    point: RationalPoint
    ranks: tuple

    def as_list(self):
        return list(self.ranks)


@dataclass(frozen=True)
class CauchySpace:
    point: RationalPoint
    basis: tuple
    ambient: tuple = ()

    @property
    def rank(self):
        return len(self.basis)


@dataclass
class RegularityReport:
    values: list
    majority: object
    regular: bool
    singular_witnesses: list = field(default_factory=list)
    probabilistic: bool = True


# ---------------------------------------------------------------- sampling

def sample_points(chart, count=None, seed=None, extra=()):
    """User points first, then `count` pseudo-random rational points from the configured box."""
    s = config.SETTINGS
    count = s.samples if count is None else count
    seed = s.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    pts = [p if isinstance(p, RationalPoint) else RationalPoint(chart, p) for p in extra]
    for _ in range(count):
        nums = rng.integers(-s.sample_range, s.sample_range + 1, size=chart.dim)
        dens = rng.choice(np.array(s.sample_denoms), size=chart.dim)
        pts.append(RationalPoint(chart, tuple(Fraction(int(a), int(b)) for a, b in zip(nums, dens))))
    return pts


def map_points(fn, points, parallel=None):
    """fn over points, results in point order; threads when parallel."""
    parallel = config.SETTINGS.parallel if parallel is None else parallel
    if parallel and len(points) > 1:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def regularity(values, points):
    counts = Counter(values)
    majority = counts.most_common(1)[0][0] if counts else None
    witnesses = [(p, v) for p, v in zip(points, values) if v != majority]
    for p, v in witnesses:
        logger.warning("singular locus witness at %s: %s (majority %s)", p, v, majority)
    return RegularityReport(list(values), majority, not witnesses, witnesses)


# ---------------------------------------------------------------- ranks and flags

def _rows_of(objs, point):
    objs = list(objs)
    if not objs:
        raise EmptyInputError("rank of an empty list")
    if isinstance(objs[0], VectorField):
        return [list(o.evaluate(point)) for o in objs]
    if isinstance(objs[0], ExtForm):
        return form_vector_rows(objs, point)
    return [list(o) for o in objs]


def pointwise_rank(objs, point):
    return xl.rank(_rows_of(objs, point))


def _normal_key(X):
    for c in X.components:
        if not c.is_zero():
            lead = c._sorted_terms()[0][1]
            return (1 / lead) * X if lead != 1 else X
    return None


def dedupe(fields):
    """Drop zero fields and rational multiples of earlier ones, keeping order."""
    seen = set()
    out = []
    for X in fields:
        key = _normal_key(X)
        if key is None or key in seen:
            continue
        seen.add(key)
        out.append(X)
    return out


@lru_cache(maxsize=128)
def _flag_level(D, i):
    if i == 1:
        return tuple(dedupe(D.generators))
    prev = _flag_level(D, i - 1)
    base = list(_flag_level(D, 1))
    brackets = [lie_bracket(X, Y) for X in base for Y in prev]
    return tuple(dedupe(base + list(prev) + brackets))


def flag_generators(D, depth):
    """Generator list of D^depth with D^{i+1} = D + [D, D^i]."""
    return Distribution(D.chart, _flag_level(D, depth))


def derived_flag(D, point, max_depth=8):
    """Growth vector at a point; stops when stationary, at full rank, or at max_depth."""
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    ranks = [pointwise_rank(_flag_level(D, 1), point)]
    depth = 1
    while ranks[-1] < D.chart.dim and depth < max_depth:
        depth += 1
        q = pointwise_rank(_flag_level(D, depth), point)
        if q == ranks[-1]:
            break
        ranks.append(q)
    logger.debug("growth vector at %s: %s", point, ranks)
    return GrowthVector(point, tuple(ranks))


# ---------------------------------------------------------------- annihilators

def annihilator(D, point):
    """Exact covector basis of the annihilator of D at a point."""
    return xl.nullspace(D.rows(point), D.chart.dim)


@dataclass(frozen=True)
class SymbolicAnnihilator:
    system: object
    vanishing_locus: PolyScalar

    @property
    def forms(self):
        return self.system.forms


def _to_sympy(poly, symbols):
    if poly.is_zero():
        return sp.Integer(0)
    return sp.Add(*[
        sp.Rational(c.numerator, c.denominator) * sp.Mul(*[s ** k for s, k in zip(symbols, e) if k])
        for e, c in poly.terms.items()
    ])


def _from_sympy(expr, chart, symbols):
    expr = sp.expand(expr)
    if expr == 0:
        return PolyScalar.zero(chart)
    try:
        poly = sp.Poly(expr, *symbols)
    except sp.PolynomialError as e:
        raise NoPolynomialAnnihilator(f"non-polynomial entry {expr}") from e
    if poly.get_domain() not in (sp.ZZ, sp.QQ):
        raise NoPolynomialAnnihilator(f"non-polynomial entry {expr}")
    return PolyScalar(chart, {m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})


def _spanning_subset(rows_by_point, count):
    """Indices whose rows reach the full rank at every sampled point."""
    keep = []
    current = [[] for _ in rows_by_point]
    for idx in range(count):
        grew = any(
            xl.rank(current[k] + [rows[idx]]) > len(current[k])
            for k, rows in enumerate(rows_by_point)
        )
        if grew:
            keep.append(idx)
            for k, rows in enumerate(rows_by_point):
                current[k] = xl.row_basis(current[k] + [rows[idx]], len(rows[idx]))
    return keep


def polynomial_nullspace(poly_rows, chart, order=None):
    """Polynomial kernel vectors of a polynomial matrix, denominators cleared.

    Returns (vectors, locus) with locus the product of the cleared denominators:
    the vectors are kernel vectors everywhere and a basis off that locus.
    order permutes the columns before elimination, so pivots land on the
    first listed columns that can hold one.
    """
    symbols = [sp.Symbol(n) for n in chart.names]
    order = list(order) if order is not None else list(range(chart.dim))
    m = sp.Matrix([[_to_sympy(row[j], symbols) for j in order] for row in poly_rows])
    locus = sp.Integer(1)
    vectors = []
    for w in m.nullspace(simplify=True):
        v = [None] * len(order)
        for pos, j in enumerate(order):
            v[j] = w[pos]
        entries = [sp.cancel(sp.together(x)) for x in v]
        dens = [sp.fraction(x)[1] for x in entries]
        den = sp.lcm_list(dens) if dens else sp.Integer(1)
        entries = [sp.cancel(x * den) for x in entries]
        g = sp.gcd_list([x for x in entries if x != 0])
        if g not in (0, 1) and not g.is_number:
            entries = [sp.cancel(x / g) for x in entries]
        locus = locus * den
        vectors.append([_from_sympy(x, chart, symbols) for x in entries])
    return vectors, _from_sympy(locus, chart, symbols)


def symbolic_annihilator(D, points=None):
    """Polynomial 1-forms spanning the annihilator of D off a stated vanishing locus."""
    chart = D.chart
    points = points or sample_points(chart, count=6)
    rows_by_point = [D.rows(p) for p in points]
    expected = {chart.dim - xl.rank(rows) for rows in rows_by_point}
    if len(expected) != 1:
        raise NoPolynomialAnnihilator("no polynomial annihilator basis found on this chart: rank is not constant on the sample")
    corank = expected.pop()
    if corank == 0:
        raise NoPolynomialAnnihilator("no polynomial annihilator basis found on this chart: D is the whole tangent space")
    fallback = None
    for subset in (_spanning_subset(rows_by_point, len(D.generators)), list(range(len(D.generators)))):
        gens = [D.generators[i] for i in subset]
        rows = [list(g.components) for g in gens]
        for order in _pivot_orders(rows, chart.dim):
            try:
                vectors, locus = polynomial_nullspace(rows, chart, order)
            except NoPolynomialAnnihilator:
                continue
            forms = [ExtForm(chart, 1, {(i,): c for i, c in enumerate(v)}) for v in vectors]
            if len(forms) != corank or not all(f.pair([X]).is_zero() for f in forms for X in D.generators):
                continue
            found = SymbolicAnnihilator(PfaffianSystem(chart, forms), locus)
            if locus.is_constant():
                logger.debug("symbolic annihilator with %d forms, no vanishing locus", len(forms))
                return found
            fallback = fallback or found
    if fallback is not None:
        logger.debug("symbolic annihilator with %d forms, locus %s", len(fallback.forms), fallback.vanishing_locus)
        return fallback
    raise NoPolynomialAnnihilator("no polynomial annihilator basis found on this chart")


def _pivot_orders(rows, dim):
    """Column orders to try: constant-entry columns first, then the chart order and its rotations."""
    const = [j for j in range(dim) if any(r[j].is_constant() and not r[j].is_zero() for r in rows)]
    orders = [const + [j for j in range(dim) if j not in const]]
    orders += [[(j + s) % dim for j in range(dim)] for s in range(dim)]
    seen = []
    for o in orders:
        if o not in seen:
            seen.append(o)
    return seen


# ---------------------------------------------------------------- Cauchy characteristic

def pairing_kernel(matrix, basis, dim):
    """Vectors v in span(basis) with matrix(v, w) = 0 for all w in basis."""
    gram = [[bilinear(matrix, u, w) for w in basis] for u in basis]
    # c^T gram = 0  <=>  gram^T c = 0
    coeffs = xl.nullspace(xl.transpose(gram), len(basis))
    return xl.row_basis([xl.combine(c, basis, dim) for c in coeffs], dim)


def cauchy_by_brackets(E, point):
    """L_p = {X in E : [X, Y] in E for all Y in E}, through d(theta)(X, Y) = -theta([X, Y])."""
    dim = E.chart.dim
    rows = E.rows(point)
    covs = xl.nullspace(rows, dim)
    if len(covs) != 1:
        raise CorankError(f"E has corank {len(covs)} at {point}, expected 1")
    theta_p = covs[0]
    # generators independent at p
    chosen, basis = [], []
    for X, r in zip(E.generators, rows):
        if xl.rank(basis + [r]) > len(basis):
            chosen.append(X)
            basis.append(r)
    gram = [[-xl.dot(theta_p, lie_bracket(X, Y).evaluate(point)) for Y in chosen] for X in chosen]
    coeffs = xl.nullspace(xl.transpose(gram), len(chosen))
    return CauchySpace(point, tuple(tuple(v) for v in xl.row_basis(
        [xl.combine(c, basis, dim) for c in coeffs], dim)), tuple(tuple(b) for b in basis))


def cauchy_characteristic(E, point, theta=None):
    """Basis of ker(d theta|_E) at a point for a corank-1 E (generators or one form)."""
    dim = point.chart.dim
    if isinstance(E, PfaffianSystem):
        if E.rank_at(point) != 1:
            raise CorankError(f"Pfaffian system has rank {E.rank_at(point)} at {point}, expected 1")
        theta = theta or E.forms[0]
        basis = E.kernel_at(point)
    else:
        if theta is None:
            return cauchy_by_brackets(E, point)
        basis = E.basis_at(point)
        if dim - len(basis) != 1:
            raise CorankError(f"E has corank {dim - len(basis)} at {point}, expected 1")
    omega = two_form_matrix(theta.d(), point)
    L = pairing_kernel(omega, basis, dim)
    return CauchySpace(point, tuple(tuple(v) for v in L), tuple(tuple(b) for b in basis))


# ---------------------------------------------------------------- comparisons

def subspace_compare(a, b):
    a = [list(v) for v in a]
    b = [list(v) for v in b]
    ra, rb = xl.rank(a), xl.rank(b)
    rab = xl.rank(a + b) if (a or b) else 0
    if ra == rb == rab:
        return "equal"
    if rab == rb:
        return "A_subset_B"
    if rab == ra:
        return "B_subset_A"
    return "incomparable"


def is_involutive(D, points):
    """Frobenius: every bracket of generators lies pointwise in D."""
    gens = dedupe(D.generators)
    brackets = [lie_bracket(X, Y) for i, X in enumerate(gens) for Y in gens[i + 1:]]
    for p in points:
        span = D.basis_at(p)
        for B in brackets:
            if not xl.contains(span, B.evaluate(p), D.chart.dim):
                logger.debug("bracket leaves D at %s", p)
                return False
    return True


def flag_ranks(D, point):
    """(rank L, rank D, rank E, dim) of the canonical flag at a point; rank L is None off corank 1."""
    E = flag_generators(D, 2)
    rank_d = pointwise_rank(D.generators, point)
    rank_e = pointwise_rank(E.generators, point)
    rank_l = None
    if D.chart.dim - rank_e == 1:
        rank_l = cauchy_characteristic(E, point).rank
    return rank_l, rank_d, rank_e, D.chart.dim


def classify_corank_one(E, points):
    """'contact', 'even_contact' or 'other' for a corank-1 distribution, by sampling."""
    labels = []
    for p in points:
        if E.chart.dim - pointwise_rank(E.generators, p) != 1:
            labels.append("other")
            continue
        if pointwise_rank(flag_generators(E, 2).generators, p) != E.chart.dim:
            labels.append("other")
            continue
        rank_l = cauchy_characteristic(E, p).rank
        if rank_l == 0 and E.chart.dim % 2 == 1:
            labels.append("contact")
        elif rank_l == 1 and E.chart.dim % 2 == 0:
            labels.append("even_contact")
        else:
            labels.append("other")
    report = regularity(labels, points)
    return report.majority if report.regular else "other"
