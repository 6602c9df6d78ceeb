"""Exact exterior calculus on a coordinate chart.

Scalars are polynomials with Fraction coefficients. Vector fields and
differential forms carry PolyScalar coefficients; every operation returns a
new object and nothing is mutated after construction.
"""
import logging
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from .errors import ChartMismatchError, DegreeOverflowError, FormDegreeError

logger = logging.getLogger(__name__)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Chart:
    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be distinct: {names}")
        for n in names:
            if not _IDENT.match(n):
                raise ValueError(f"bad coordinate name {n!r}")

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a coordinate of {self.names}") from None

    def extend(self, *names):
        return Chart(self.names + tuple(names))

    def __repr__(self):
        return f"Chart({', '.join(self.names)})"


def _same_chart(a, b):
    if a.chart != b.chart:
        raise ChartMismatchError(f"{a.chart!r} vs {b.chart!r}")


def _fmt_rational(c):
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


class PolyScalar:
    """Polynomial over Q on a chart: exponent tuple -> nonzero Fraction."""

    __slots__ = ("chart", "terms", "_compiled", "_hash")

    def __init__(self, chart, terms=None):
        self.chart = chart
        clean = {}
        cap = config.SETTINGS.max_degree
        for exps, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            exps = tuple(exps)
            if len(exps) != chart.dim:
                raise ValueError(f"multi-index {exps} does not match {chart!r}")
            if sum(exps) > cap:
                raise DegreeOverflowError(f"total degree {sum(exps)} exceeds the cap {cap}")
            clean[exps] = c
        self.terms = clean
        self._compiled = None
        self._hash = None

    @classmethod
    def constant(cls, chart, c):
        return cls(chart, {(0,) * chart.dim: Fraction(c)})

    @classmethod
    def coordinate(cls, chart, name):
        exps = [0] * chart.dim
        exps[chart.index(name)] = 1
        return cls(chart, {tuple(exps): Fraction(1)})

    @classmethod
    def zero(cls, chart):
        return cls(chart, {})

    def _coerce(self, other):
        if isinstance(other, PolyScalar):
            _same_chart(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return PolyScalar.constant(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return PolyScalar(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyScalar(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return PolyScalar(self.chart, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = PolyScalar.constant(self.chart, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PolyScalar.constant(self.chart, other)
        if not isinstance(other, PolyScalar):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart.names, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * self.chart.dim, Fraction(0))

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def depends_on(self, i):
        return any(e[i] for e in self.terms)

    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return PolyScalar(self.chart, out)

    def evaluate(self, coords):
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(coords, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def specialize(self, index, value, chart):
        """Substitute coordinate `index` by `value` and move onto `chart` (same names minus that one)."""
        value = Fraction(value)
        out = {}
        for e, c in self.terms.items():
            ne = e[:index] + e[index + 1:]
            out[ne] = out.get(ne, 0) + c * value ** e[index]
        return PolyScalar(chart, out)

    def rechart(self, chart):
        """Same polynomial on another chart that contains every variable it uses."""
        pos = []
        for i, name in enumerate(self.chart.names):
            if self.depends_on(i):
                pos.append((i, chart.index(name)))
        out = {}
        for e, c in self.terms.items():
            ne = [0] * chart.dim
            for i, j in pos:
                ne[j] = e[i]
            out[tuple(ne)] = c
        return PolyScalar(chart, out)

    def compiled(self):
        if self._compiled is None:
            if self.terms:
                exps = np.array(list(self.terms.keys()), dtype=float)
                coeffs = np.array([float(c) for c in self.terms.values()])
            else:
                exps = np.zeros((0, self.chart.dim))
                coeffs = np.zeros(0)
            self._compiled = (exps, coeffs)
        return self._compiled

    def evaluate_float(self, x):
        exps, coeffs = self.compiled()
        if not len(coeffs):
            return 0.0
        return float(coeffs @ np.prod(np.power(np.asarray(x, dtype=float), exps), axis=1))

    def _sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-k for k in kv[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self._sorted_terms():
            mono = "*".join(
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.chart.names, e) if k
            )
            mag = abs(c)
            if not mono:
                body = _fmt_rational(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{_fmt_rational(mag)}*{mono}"
            if not parts:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(parts)

    def __repr__(self):
        return f"PolyScalar({self})"


def _coef_prefix(c, basis):
    """Render one coefficient*basis term; returns (negative, text)."""
    if len(c.terms) == 1:
        (e, v), = c.terms.items()
        neg = v < 0
        mag = -c if neg else c
        if mag == 1:
            return neg, basis
        return neg, f"{mag}*{basis}"
    return False, f"({c})*{basis}"


def _join(pieces):
    if not pieces:
        return "0"
    out = []
    for neg, text in pieces:
        if not out:
            out.append(f"-{text}" if neg else text)
        else:
            out.append(f" - {text}" if neg else f" + {text}")
    return "".join(out)


def _as_poly(chart, f):
    if isinstance(f, PolyScalar):
        if f.chart != chart:
            raise ChartMismatchError(f"{f.chart!r} vs {chart!r}")
        return f
    if isinstance(f, (int, Fraction)):
        return PolyScalar.constant(chart, f)
    raise TypeError(f"cannot use {type(f).__name__} as a scalar")


class VectorField:
    __slots__ = ("chart", "components", "_hash")

    def __init__(self, chart, components):
        comps = tuple(_as_poly(chart, c) for c in components)
        if len(comps) != chart.dim:
            raise ValueError(f"{len(comps)} components on a chart of dim {chart.dim}")
        self.chart = chart
        self.components = comps
        self._hash = None

    @classmethod
    def coordinate(cls, chart, name):
        i = chart.index(name)
        return cls(chart, [int(j == i) for j in range(chart.dim)])

    @classmethod
    def zero(cls, chart):
        return cls(chart, [0] * chart.dim)

    @classmethod
    def from_vector(cls, chart, values):
        return cls(chart, [Fraction(v) for v in values])

    def __add__(self, other):
        _same_chart(self, other)
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        _same_chart(self, other)
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.components])

    def __rmul__(self, f):
        f = _as_poly(self.chart, f)
        return VectorField(self.chart, [f * a for a in self.components])

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def apply(self, f):
        """Directional derivative X(f)."""
        f = _as_poly(self.chart, f)
        out = PolyScalar.zero(self.chart)
        for i, c in enumerate(self.components):
            if not c.is_zero() and f.depends_on(i):
                out = out + c * f.diff(i)
        return out

    def evaluate(self, point):
        _same_chart(self, point)
        return tuple(c.evaluate(point.coords) for c in self.components)

    def __str__(self):
        pieces = [
            _coef_prefix(c, f"d_{name}")
            for name, c in zip(self.chart.names, self.components) if not c.is_zero()
        ]
        # zero keeps a basis so it parses back as a field
        return _join(pieces) if pieces else f"0*d_{self.chart.names[0]}"

    def __repr__(self):
        return f"VectorField({self})"


def _merge_sign(i_idx, j_idx):
    """Sign of the shuffle that sorts i_idx + j_idx; 0 when they overlap."""
    if set(i_idx) & set(j_idx):
        return 0
    inversions = sum(1 for a in i_idx for b in j_idx if a > b)
    return -1 if inversions % 2 else 1


class ExtForm:
    """k-form: strictly increasing index tuple -> nonzero PolyScalar."""

    __slots__ = ("chart", "degree", "terms", "_hash")

    def __init__(self, chart, degree, terms=None):
        if degree < 0:
            raise FormDegreeError("negative form degree")
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            c = _as_poly(chart, c)
            if c.is_zero():
                continue
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index {idx} is not a strictly increasing {degree}-index")
            if idx and (idx[0] < 0 or idx[-1] >= chart.dim):
                raise ValueError(f"index {idx} outside {chart!r}")
            clean[idx] = c
        if clean and degree > chart.dim:
            raise FormDegreeError(f"a nonzero {degree}-form cannot live on {chart!r}")
        self.chart = chart
        self.degree = degree
        self.terms = clean
        self._hash = None

    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree, {})

    @classmethod
    def function(cls, f):
        return cls(f.chart, 0, {(): f})

    @classmethod
    def differential(cls, chart, name):
        return cls(chart, 1, {(chart.index(name),): PolyScalar.constant(chart, 1)})

    @classmethod
    def from_terms(cls, chart, degree, items):
        """Build from (index tuple, coefficient) pairs in any index order, sign-normalised."""
        out = {}
        for idx, c in items:
            idx = tuple(idx)
            if len(set(idx)) != len(idx):
                continue
            perm = sorted(range(len(idx)), key=lambda a: idx[a])
            inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
            key = tuple(sorted(idx))
            c = _as_poly(chart, c)
            if inv % 2:
                c = -c
            out[key] = out[key] + c if key in out else c
        return cls(chart, degree, out)

    @classmethod
    def from_covector(cls, chart, values):
        return cls(chart, 1, {(i,): Fraction(v) for i, v in enumerate(values) if v})

    def __add__(self, other):
        _same_chart(self, other)
        if self.degree != other.degree:
            raise FormDegreeError(f"adding a {self.degree}-form to a {other.degree}-form")
        out = dict(self.terms)
        for idx, c in other.terms.items():
            out[idx] = out[idx] + c if idx in out else c
        return ExtForm(self.chart, self.degree, out)

    def __neg__(self):
        return ExtForm(self.chart, self.degree, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, f):
        f = _as_poly(self.chart, f)
        return ExtForm(self.chart, self.degree, {i: f * c for i, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, ExtForm):
            return NotImplemented
        return self.chart == other.chart and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.degree, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self):
        return not self.terms

    def wedge(self, other):
        return wedge(self, other)

    def power(self, k):
        out = ExtForm.function(PolyScalar.constant(self.chart, 1))
        for _ in range(k):
            out = wedge(out, self)
        return out

    def d(self):
        return exterior_derivative(self)

    def contract(self, X):
        return interior_product(X, self)

    def coefficient_diff(self, i):
        """Differentiate every coefficient in coordinate i (no differential is added)."""
        return ExtForm(self.chart, self.degree, {idx: c.diff(i) for idx, c in self.terms.items()})

    def specialize(self, index, value, chart):
        """Fix coordinate `index` at `value`; the form must not contain d of that coordinate."""
        out = {}
        for idx, c in self.terms.items():
            if index in idx:
                raise FormDegreeError(f"form has a d{self.chart.names[index]} component")
            nidx = tuple(j if j < index else j - 1 for j in idx)
            out[nidx] = c.specialize(index, value, chart)
        return ExtForm(chart, self.degree, out)

    def rechart(self, chart):
        remap = {i: chart.index(n) for i, n in enumerate(self.chart.names) if n in chart.names}
        out = []
        for idx, c in self.terms.items():
            out.append((tuple(remap[i] for i in idx), c.rechart(chart)))
        return ExtForm.from_terms(chart, self.degree, out)

    def pair(self, vectors):
        """alpha(X_1, ..., X_k) as a polynomial, for vector fields X_j."""
        if len(vectors) != self.degree:
            raise FormDegreeError(f"a {self.degree}-form takes {self.degree} arguments")
        for v in vectors:
            _same_chart(self, v)
        total = PolyScalar.zero(self.chart)
        for idx, c in self.terms.items():
            rows = [[v.components[i] for v in vectors] for i in idx]
            total = total + c * _poly_det(rows, self.chart)
        return total

    def evaluate(self, point):
        _same_chart(self, point)
        return {idx: c.evaluate(point.coords) for idx, c in self.terms.items()}

    def __str__(self):
        if self.degree == 0:
            return str(self.terms.get((), PolyScalar.zero(self.chart)))
        pieces = []
        for idx in sorted(self.terms):
            basis = "&".join(f"d{self.chart.names[i]}" for i in idx)
            pieces.append(_coef_prefix(self.terms[idx], basis))
        if not pieces and self.degree <= self.chart.dim:
            return "0*" + "&".join(f"d{n}" for n in self.chart.names[:self.degree])
        return _join(pieces)

    def __repr__(self):
        return f"ExtForm<{self.degree}>({self})"


def _poly_det(rows, chart):
    n = len(rows)
    if n == 0:
        return PolyScalar.constant(chart, 1)
    if n == 1:
        return rows[0][0]
    total = PolyScalar.zero(chart)
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _poly_det(minor, chart)
        total = total + term if j % 2 == 0 else total - term
    return total


def lie_bracket(X, Y):
    """[X, Y]^k = sum_i X^i d_i Y^k - Y^i d_i X^k."""
    _same_chart(X, Y)
    return VectorField(X.chart, [X.apply(b) - Y.apply(a) for a, b in zip(X.components, Y.components)])


def exterior_derivative(alpha):
    chart = alpha.chart
    if alpha.degree >= chart.dim:
        raise FormDegreeError(f"d of a {alpha.degree}-form on a {chart.dim}-dimensional chart")
    out = {}
    for idx, c in alpha.terms.items():
        for i in range(chart.dim):
            if i in idx or not c.depends_on(i):
                continue
            pos = sum(1 for j in idx if j < i)
            key = idx[:pos] + (i,) + idx[pos:]
            term = c.diff(i)
            if pos % 2:
                term = -term
            out[key] = out[key] + term if key in out else term
    return ExtForm(chart, alpha.degree + 1, out)


def wedge(alpha, beta):
    _same_chart(alpha, beta)
    degree = alpha.degree + beta.degree
    if degree > alpha.chart.dim:
        return ExtForm.zero(alpha.chart, degree)
    out = {}
    for i_idx, a in alpha.terms.items():
        for j_idx, b in beta.terms.items():
            sign = _merge_sign(i_idx, j_idx)
            if not sign:
                continue
            key = tuple(sorted(i_idx + j_idx))
            term = a * b if sign > 0 else -(a * b)
            out[key] = out[key] + term if key in out else term
    return ExtForm(alpha.chart, degree, out)


def interior_product(X, alpha):
    _same_chart(X, alpha)
    if alpha.degree < 1:
        raise FormDegreeError("interior product of a 0-form")
    out = {}
    for idx, c in alpha.terms.items():
        for a, i in enumerate(idx):
            comp = X.components[i]
            if comp.is_zero():
                continue
            key = idx[:a] + idx[a + 1:]
            term = comp * c
            if a % 2:
                term = -term
            out[key] = out[key] + term if key in out else term
    return ExtForm(alpha.chart, alpha.degree - 1, out)


@dataclass(frozen=True)
class RationalPoint:
    chart: Chart
    coords: tuple

    def __post_init__(self):
        coords = tuple(config.as_fraction(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) != self.chart.dim:
            raise ValueError(f"{len(coords)} coordinates on a chart of dim {self.chart.dim}")

    @classmethod
    def origin(cls, chart):
        return cls(chart, (0,) * chart.dim)

    def as_floats(self):
        return np.array([float(c) for c in self.coords])

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def evaluate(obj, point):
    """Exact value at a point: a vector for fields, {index: value} for forms, a Fraction for scalars."""
    if isinstance(obj, PolyScalar):
        _same_chart(obj, point)
        return obj.evaluate(point.coords)
    return obj.evaluate(point)


def covector_rows(forms, point):
    """Dense rows of evaluated 1-forms."""
    rows = []
    for f in forms:
        if f.degree != 1:
            raise FormDegreeError("expected 1-forms")
        vals = f.evaluate(point)
        rows.append([vals.get((i,), Fraction(0)) for i in range(point.chart.dim)])
    return rows


def two_form_matrix(form, point):
    """Antisymmetric matrix of an evaluated 2-form."""
    if form.degree != 2:
        raise FormDegreeError("expected a 2-form")
    n = point.chart.dim
    m = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), v in form.evaluate(point).items():
        m[i][j] = v
        m[j][i] = -v
    return m


def bilinear(matrix, u, v):
    return sum((u[i] * matrix[i][j] * v[j] for i in range(len(u)) if u[i] for j in range(len(v)) if v[j]), Fraction(0))


def form_vector_rows(forms, point):
    """Coefficient rows of evaluated k-forms over the union of their indices."""
    values = [f.evaluate(point) for f in forms]
    keys = sorted({k for v in values for k in v})
    return [[v.get(k, Fraction(0)) for k in keys] for v in values]
