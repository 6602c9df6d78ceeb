import numpy as np
import pytest

from EngelFlagPy import exact_linalg as xl
from EngelFlagPy.constructions import cartan_prolongation, fixture, standard_engel
from EngelFlagPy.distributions import (
    Distribution, PfaffianSystem, annihilator, cauchy_by_brackets, cauchy_characteristic,
    classify_corank_one, dedupe, derived_flag, flag_generators, flag_ranks, is_involutive,
    map_points, pointwise_rank, regularity, sample_points, subspace_compare, symbolic_annihilator,
)
from EngelFlagPy.errors import CorankError, EmptyInputError, NoPolynomialAnnihilator
from EngelFlagPy.exterior import Chart, ExtForm, PolyScalar, RationalPoint, VectorField, covector_rows, wedge

from conftest import random_field

R3 = Chart(("x", "y", "z"))


def c(chart, name):
    return PolyScalar.coordinate(chart, name)


def v(chart, name):
    return VectorField.coordinate(chart, name)


def d(chart, name):
    return ExtForm.differential(chart, name)


def unit_span(chart, names):
    return [[int(n == m) for m in chart.names] for n in names]


# ---------------------------------------------------------------- ranks and growth vectors

def test_pointwise_rank_examples(chart4):
    a, b = fixture("a"), fixture("b")
    assert pointwise_rank(a.distribution.generators, RationalPoint.origin(a.distribution.chart)) == 4
    assert pointwise_rank([v(chart4, "x"), 2 * v(chart4, "x")], RationalPoint.origin(chart4)) == 1
    assert pointwise_rank(flag_generators(b.distribution, 2).generators, RationalPoint.origin(b.distribution.chart)) == 7


def test_pointwise_rank_of_nothing_is_an_error(chart4):
    with pytest.raises(EmptyInputError):
        pointwise_rank([], RationalPoint.origin(chart4))
    with pytest.raises(EmptyInputError):
        Distribution(chart4, [])


def test_growth_vector_examples(chart4):
    origin4 = RationalPoint.origin(chart4)
    assert derived_flag(standard_engel(), origin4).ranks == (2, 3, 4)
    flat = Distribution(chart4, [v(chart4, "x"), v(chart4, "y")])
    assert derived_flag(flat, origin4).ranks == (2,)
    fx = fixture("c")
    assert derived_flag(fx.distribution, RationalPoint.origin(fx.distribution.chart)).ranks == (4, 7, 8)


def test_max_depth_must_be_positive():
    with pytest.raises(ValueError):
        derived_flag(standard_engel(), RationalPoint.origin(standard_engel().chart), max_depth=0)


def test_growth_vectors_stabilise(chart4):
    rng = np.random.default_rng(5)
    for _ in range(5):
        D = Distribution(chart4, [random_field(rng, chart4), random_field(rng, chart4)])
        p = sample_points(chart4, count=1)[0]
        ranks = derived_flag(D, p, max_depth=4).ranks
        assert list(ranks) == sorted(ranks) and ranks[-1] <= 4
        if len(ranks) < 4 and ranks[-1] < 4:
            for depth in range(len(ranks) + 1, 5):
                assert pointwise_rank(flag_generators(D, depth).generators, p) == ranks[-1]


def test_dedupe_drops_zero_and_multiples(chart4):
    X = v(chart4, "x") + c(chart4, "y") * v(chart4, "z")
    out = dedupe([X, VectorField.zero(chart4), 3 * X, v(chart4, "w")])
    assert out == [X, v(chart4, "w")]


# ---------------------------------------------------------------- annihilators

def test_pointwise_annihilator():
    D = Distribution(R3, [v(R3, "x") + c(R3, "y") * v(R3, "z")])
    for p in sample_points(R3, count=10):
        expected = covector_rows([d(R3, "y"), d(R3, "z") - c(R3, "y") * d(R3, "x")], p)
        assert xl.same_span(annihilator(D, p), expected, 3)


def test_symbolic_annihilator_of_prolonged_contact_structure():
    pro = cartan_prolongation(1)
    ann = symbolic_annihilator(pro.E)
    assert len(ann.forms) == 1
    assert wedge(ann.forms[0], pro.theta).is_zero()
    assert not ann.vanishing_locus.is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_prolongation_annihilator_has_no_vanishing_locus(n):
    pro = cartan_prolongation(n)
    ann = symbolic_annihilator(pro.D)
    assert ann.vanishing_locus.is_constant() and not ann.vanishing_locus.is_zero()
    assert len(ann.forms) == pro.chart.dim - len(pro.D.generators)
    origin = RationalPoint.origin(pro.chart)
    assert xl.same_span(covector_rows(ann.forms, origin), annihilator(pro.D, origin), pro.chart.dim)


def test_annihilator_of_first_r8_example_at_origin():
    fx = fixture("a")
    E = flag_generators(fx.distribution, 2)
    origin = RationalPoint.origin(E.chart)
    assert xl.same_span(annihilator(E, origin), covector_rows([fx.theta], origin), E.chart.dim)


def test_symbolic_annihilator_of_full_tangent_space_fails(chart4):
    D = Distribution(chart4, [v(chart4, n) for n in chart4.names])
    with pytest.raises(NoPolynomialAnnihilator):
        symbolic_annihilator(D)


# ---------------------------------------------------------------- Cauchy characteristic

def test_cauchy_characteristic_examples():
    a = fixture("a")
    E = flag_generators(a.distribution, 2)
    origin = RationalPoint.origin(E.chart)
    L = cauchy_characteristic(E, origin)
    assert L.rank == 5
    assert xl.same_span(L.basis, unit_span(E.chart, ["x", "y", "z", "x1", "y1"]), 8)

    cfx = fixture("c")
    L = cauchy_characteristic(flag_generators(cfx.distribution, 2), RationalPoint.origin(cfx.distribution.chart))
    assert xl.same_span(L.basis, unit_span(cfx.distribution.chart, ["w"]), 8)

    flat = cauchy_characteristic(PfaffianSystem(R3, [d(R3, "z")]), RationalPoint.origin(R3))
    assert flat.rank == 2


def test_cauchy_characteristic_needs_corank_one():
    D = standard_engel()
    with pytest.raises(CorankError):
        cauchy_characteristic(D, RationalPoint.origin(D.chart))


@pytest.mark.parametrize("name", ["a", "b", "c"])
def test_bracket_definition_agrees_with_dtheta(name):
    fx = fixture(name)
    E = flag_generators(fx.distribution, 2)
    for p in sample_points(E.chart, count=8):
        by_brackets = cauchy_by_brackets(E, p)
        by_theta = cauchy_characteristic(E, p, theta=fx.theta)
        assert xl.same_span(by_brackets.basis, by_theta.basis, 8)


def test_cauchy_characteristic_ignores_rescaling_of_theta():
    fx = fixture("c")
    chart = fx.distribution.chart
    f = 1 + c(chart, "w") ** 2 + c(chart, "x1") ** 2
    for p in sample_points(chart, count=10):
        plain = cauchy_characteristic(PfaffianSystem(chart, [fx.theta]), p)
        scaled = cauchy_characteristic(PfaffianSystem(chart, [f * fx.theta]), p)
        assert xl.same_span(plain.basis, scaled.basis, 8)


@pytest.mark.parametrize("n", [1, 2])
def test_prolongation_characteristic_is_the_vertical_line(n):
    pro = cartan_prolongation(n)
    E = flag_generators(pro.D, 2)
    for p in sample_points(pro.chart, count=6):
        assert xl.same_span(cauchy_characteristic(E, p).basis, pro.L.rows(p), pro.chart.dim)


def test_characteristic_and_subdistributions_are_integrable():
    pts = sample_points(fixture("c").distribution.chart, count=50)
    assert is_involutive(fixture("c").expected["integrable"], pts)
    pro = cartan_prolongation(2)
    assert is_involutive(pro.L, sample_points(pro.chart, count=50))
    assert not is_involutive(standard_engel(), sample_points(standard_engel().chart, count=5))


# ---------------------------------------------------------------- comparisons and classification

def test_subspace_compare_examples():
    assert subspace_compare([[1, 0]], [[1, 0], [0, 1]]) == "A_subset_B"
    assert subspace_compare([[1, 0], [0, 1]], [[1, 0]]) == "B_subset_A"
    assert subspace_compare([[1, 1]], [[2, 2]]) == "equal"
    for name, expected in (("b", "incomparable"), ("c", "A_subset_B")):
        fx = fixture(name)
        origin = RationalPoint.origin(fx.distribution.chart)
        L = cauchy_characteristic(flag_generators(fx.distribution, 2), origin)
        assert subspace_compare(L.basis, fx.distribution.basis_at(origin)) == expected


def test_classify_corank_one(chart4):
    contact = Distribution(R3, [v(R3, "x") + c(R3, "y") * v(R3, "z"), v(R3, "y")])
    assert classify_corank_one(contact, sample_points(R3, count=8)) == "contact"
    assert classify_corank_one(flag_generators(standard_engel(), 2), sample_points(chart4, count=8)) == "even_contact"
    fx = fixture("c")
    E = flag_generators(fx.distribution, 2)
    assert classify_corank_one(E, sample_points(E.chart, count=5)) == "even_contact"
    assert classify_corank_one(standard_engel(), sample_points(chart4, count=3)) == "other"


def test_flag_ranks_of_prolongation():
    pro = cartan_prolongation(2)
    p = sample_points(pro.chart, count=1)[0]
    assert flag_ranks(pro.D, p) == pro.expected_ranks


# ---------------------------------------------------------------- sampling

def test_sampling_is_deterministic_and_keeps_user_points(chart4):
    origin = RationalPoint.origin(chart4)
    first = sample_points(chart4, extra=[origin])
    assert first[0] == origin
    assert len(first) == 26
    assert first == sample_points(chart4, extra=[origin])
    assert first[1:] != sample_points(chart4, seed=1)
    for p in first[1:]:
        assert all(abs(x) <= 3 and x.denominator in (1, 2, 3) for x in p.coords)


def test_parallel_map_keeps_point_order(chart4):
    pts = sample_points(chart4, count=12)
    D = standard_engel()
    serial = map_points(lambda p: derived_flag(D, p).ranks, pts, parallel=False)
    assert map_points(lambda p: derived_flag(D, p).ranks, pts, parallel=True) == serial


def test_regularity_reports_singular_witnesses(chart4):
    pts = sample_points(chart4, count=4)
    rep = regularity([2, 2, 1, 2], pts)
    assert rep.majority == 2 and not rep.regular
    assert rep.singular_witnesses == [(pts[2], 1)]


def test_singular_locus_is_witnessed():
    chart = Chart(("x", "y"))
    D = Distribution(chart, [v(chart, "x"), c(chart, "x") * v(chart, "y")])
    pts = [RationalPoint(chart, (0, 1))] + sample_points(chart, count=5)
    ranks = [pointwise_rank(D.generators, p) for p in pts]
    rep = regularity(ranks, pts)
    assert rep.majority == 2
    assert pts[0] in [p for p, _ in rep.singular_witnesses]
