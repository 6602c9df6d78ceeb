"""Generalized Engel verdicts: the flag conditions and the Pfaffian form criteria."""
import logging
from dataclasses import dataclass, field

from . import exact_linalg as xl
from .distributions import (
    Distribution, PfaffianSystem, cauchy_characteristic, flag_generators,
    map_points, polynomial_nullspace, pointwise_rank, regularity, sample_points,
    subspace_compare, symbolic_annihilator,
)
from .errors import CriteriaInputError, DependentFormsError, NoPolynomialAnnihilator
from .exterior import ExtForm, PolyScalar, VectorField, covector_rows, form_vector_rows, wedge

logger = logging.getLogger(__name__)

FLAG_CONDITIONS = ("even_corank", "E_corank1", "D3_full", "L_in_D", "L_corank1_in_D")
PFAFFIAN_CONDITIONS = ("eta_independent", "omega_theta_vanish", "theta_nondegenerate", "theta_degenerate_next")


def _point_json(p):
    return [str(c) for c in p.coords]


def _field_text(chart, v):
    return str(VectorField.from_vector(chart, v))


@dataclass
class FlagReport:
    dim: int
    corank_D: int | None = None
    corank_E: int | None = None
    corank_L_in_D: int | None = None
    cond_even_corank: bool | None = None
    cond_E_corank1: bool | None = None
    cond_D3_full: bool | None = None
    cond_L_in_D: bool | None = None
    cond_L_corank1_in_D: bool | None = None
    witnesses: list = field(default_factory=list)
    singular_witnesses: list = field(default_factory=list)
    regular: bool = True
    verdict: bool | None = None
    probabilistic: bool = True

    def conditions(self):
        return {
            "even_corank": self.cond_even_corank,
            "E_corank1": self.cond_E_corank1,
            "D3_full": self.cond_D3_full,
            "L_in_D": self.cond_L_in_D,
            "L_corank1_in_D": self.cond_L_corank1_in_D,
        }

    def failed_conditions(self):
        """Conditions evaluated and false; a condition that does not apply is not a failure."""
        return [name for name, ok in self.conditions().items() if ok is False]

    def to_dict(self):
        return {
            "kind": "flag_report",
            "dim": self.dim,
            "corank_D": self.corank_D,
            "corank_E": self.corank_E,
            "corank_L_in_D": self.corank_L_in_D,
            "conditions": {
                name: {"pass": ok, "applicable": ok is not None}
                for name, ok in self.conditions().items()
            },
            "failed": self.failed_conditions(),
            "regular": self.regular,
            "probabilistic": self.probabilistic,
            "singular_witnesses": [
                {"point": _point_json(p), "signature": list(sig)} for p, sig in self.singular_witnesses
            ],
            "witnesses": [{"point": _point_json(p), **ev} for p, ev in self.witnesses],
            "verdict": self.verdict,
        }


@dataclass
class PfaffianReport:
    k: int
    l: int
    eta_independent: bool = False
    omega_theta_vanish: bool = False
    theta_nondegenerate: bool = False
    theta_degenerate_next: bool = False
    witnesses: list = field(default_factory=list)
    verdict: bool = False

    def conditions(self):
        return {name: getattr(self, name) for name in PFAFFIAN_CONDITIONS}

    def failed_conditions(self):
        return [name for name, ok in self.conditions().items() if not ok]

    def to_dict(self):
        return {
            "kind": "pfaffian_report",
            "k": self.k,
            "l": self.l,
            "conditions": {name: {"pass": ok} for name, ok in self.conditions().items()},
            "failed": self.failed_conditions(),
            "witnesses": [{"point": _point_json(p), **ev} for p, ev in self.witnesses],
            "verdict": self.verdict,
        }


# ---------------------------------------------------------------- flag conditions

def _engel_point(D, E, D3, p):
    chart = D.chart
    dim = chart.dim
    d_basis = D.basis_at(p)
    rank_d = len(d_basis)
    rank_e = pointwise_rank(E.generators, p)
    rank_d3 = pointwise_rank(D3.generators, p)
    ev = {"rank_D": rank_d, "rank_E": rank_e, "rank_D3": rank_d3, "rank_L": None,
          "L_in_D": None, "L_outside_D": []}
    if dim - rank_e == 1:
        L = cauchy_characteristic(E, p)
        ev["rank_L"] = L.rank
        ev["L_in_D"] = subspace_compare(L.basis, d_basis) in ("equal", "A_subset_B")
        ev["L_outside_D"] = [_field_text(chart, v) for v in L.basis if not xl.contains(d_basis, v, dim)]
    return ev


def check_generalized_engel(D, points=None):
    """Flag report for the five conditions at every sample point."""
    chart = D.chart
    points = list(points) if points else sample_points(chart)
    E = flag_generators(D, 2)
    D3 = flag_generators(D, 3)
    evals = map_points(lambda p: _engel_point(D, E, D3, p), points)
    signatures = [(ev["rank_D"], ev["rank_E"], ev["rank_D3"], ev["rank_L"], ev["L_in_D"]) for ev in evals]
    reg = regularity(signatures, points)
    report = FlagReport(dim=chart.dim, witnesses=list(zip(points, evals)), regular=reg.regular)
    if not reg.regular:
        report.singular_witnesses = reg.singular_witnesses
        logger.warning("flag ranks vary over the sample; verdict left undefined")
        return report

    rank_d, rank_e, rank_d3, rank_l, l_in_d = reg.majority
    report.corank_D = chart.dim - rank_d
    report.corank_E = chart.dim - rank_e
    report.cond_even_corank = report.corank_D % 2 == 0
    report.cond_E_corank1 = report.corank_E == 1
    report.cond_D3_full = rank_d3 == chart.dim
    if rank_l is not None:
        report.cond_L_in_D = l_in_d
        if l_in_d:
            report.corank_L_in_D = rank_d - rank_l
            report.cond_L_corank1_in_D = report.corank_L_in_D == 1
    report.verdict = all(ok is True for ok in report.conditions().values())
    logger.info("generalized Engel verdict %s, failed %s", report.verdict, report.failed_conditions())
    return report


# ---------------------------------------------------------------- Pfaffian criteria

def _wedge_all(forms):
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def check_pfaffian_criteria(theta, omegas, points=None):
    """Four form criteria for theta and k = 2l+1 forms omega.

    Vanishing conditions are decided on the coefficients; independence and
    non-vanishing are decided at the sample points.
    """
    omegas = list(omegas)
    k = len(omegas)
    if k % 2 == 0:
        raise CriteriaInputError(f"k = {k} must be odd")
    l = (k - 1) // 2
    chart = theta.chart
    if k + 3 > chart.dim:
        raise CriteriaInputError(f"eta forms have degree {k + 3} > dim {chart.dim}")
    points = list(points) if points else sample_points(chart)

    base = wedge(_wedge_all(omegas), theta)
    etas = [wedge(base, w.d()) for w in omegas]
    dtheta = theta.d()
    top = wedge(theta, dtheta.power(l + 1))
    next_top = wedge(theta, dtheta.power(l + 2)) if 2 * l + 5 <= chart.dim else ExtForm.zero(chart, 2 * l + 5)

    report = PfaffianReport(k=k, l=l)
    report.omega_theta_vanish = all(wedge(w, top).is_zero() for w in omegas)
    report.theta_degenerate_next = next_top.is_zero()

    def at(p):
        return {
            "eta_rank": xl.rank(form_vector_rows(etas, p)),
            "theta_nondegenerate": any(v != 0 for v in top.evaluate(p).values()),
        }

    evals = map_points(at, points)
    report.witnesses = list(zip(points, evals))
    report.eta_independent = all(ev["eta_rank"] == k for ev in evals)
    report.theta_nondegenerate = all(ev["theta_nondegenerate"] for ev in evals)
    report.verdict = all(report.conditions().values())
    logger.info("Pfaffian criteria k=%d verdict %s", k, report.verdict)
    return report


# ---------------------------------------------------------------- forms <-> distributions

@dataclass
class FormsKernel:
    distribution: Distribution | None
    pointwise: list
    symbolic: bool


@dataclass
class PfaffianPair:
    theta: ExtForm | None
    omegas: list
    pointwise: list
    symbolic: bool


def _require_independent(forms, points):
    for p in points:
        if xl.rank(covector_rows(forms, p)) != len(forms):
            raise DependentFormsError(f"forms are dependent at {p}")


def forms_to_distribution(theta, omegas, points=None):
    """Common kernel of theta and the omegas, symbolically when a polynomial basis exists."""
    forms = [theta] + list(omegas)
    chart = theta.chart
    points = list(points) if points else sample_points(chart)
    _require_independent(forms, points)
    pointwise = [(p, xl.nullspace(covector_rows(forms, p), chart.dim)) for p in points]
    zero = PolyScalar.zero(chart)
    rows = [[f.terms.get((i,), zero) for i in range(chart.dim)] for f in forms]
    try:
        vectors, locus = polynomial_nullspace(rows, chart)
    except NoPolynomialAnnihilator:
        vectors = []
    if vectors:
        fields = [VectorField(chart, v) for v in vectors]
        D = Distribution(chart, fields)
        if all(xl.same_span(D.rows(p), basis, chart.dim) for p, basis in pointwise) and \
                all(f.pair([X]).is_zero() for f in forms for X in fields):
            return FormsKernel(D, pointwise, True)
    logger.info("no polynomial kernel basis; pointwise kernels only")
    return FormsKernel(None, pointwise, False)


def distribution_to_forms(D, points=None):
    """theta spanning ann(D^2) and omegas completing it to ann(D)."""
    chart = D.chart
    points = list(points) if points else sample_points(chart)
    E = flag_generators(D, 2)
    pointwise = []
    for p in points:
        theta_p = xl.nullspace(E.rows(p), chart.dim)
        ann_d = xl.nullspace(D.rows(p), chart.dim)
        pointwise.append((p, theta_p, _complete(theta_p, ann_d, chart.dim)))
    try:
        theta_sys = symbolic_annihilator(E, points[:6])
        d_sys = symbolic_annihilator(D, points[:6])
    except NoPolynomialAnnihilator:
        logger.info("falling back to per-point covectors")
        return PfaffianPair(None, [], pointwise, False)
    if len(theta_sys.forms) != 1:
        return PfaffianPair(None, [], pointwise, False)
    theta = theta_sys.forms[0]
    # the symbolic bases only span off their vanishing loci
    loci = (theta_sys.vanishing_locus, d_sys.vanishing_locus)
    generic = [p for p in points if all(f.evaluate(p.coords) != 0 for f in loci)] or points
    omegas = []
    for f in d_sys.forms:
        cand = [theta] + omegas + [f]
        if all(xl.rank(covector_rows(cand, p)) == len(cand) for p in generic):
            omegas.append(f)
    if len(omegas) + 1 != len(d_sys.forms):
        return PfaffianPair(None, [], pointwise, False)
    return PfaffianPair(theta, omegas, pointwise, True)


def _complete(start, candidates, dim):
    out = []
    for v in candidates:
        if xl.rank(start + out + [v]) > len(start) + len(out):
            out.append(v)
    return out


def as_pfaffian_system(theta, omegas):
    return PfaffianSystem(theta.chart, [theta] + list(omegas))
