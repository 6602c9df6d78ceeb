import pytest

from EngelFlagPy import exact_linalg as xl
from EngelFlagPy.constructions import (
    cartan_prolongation, engel_local_forms, fixture, normal_form, counterexample_fixtures,
)
from EngelFlagPy.distributions import derived_flag, flag_generators, flag_ranks, sample_points
from EngelFlagPy.engel import check_generalized_engel, check_pfaffian_criteria
from EngelFlagPy.exterior import ExtForm, PolyScalar, RationalPoint, VectorField, covector_rows, lie_bracket


@pytest.mark.parametrize("n", [1, 2, 3])
def test_prolongations_are_generalized_engel(n):
    pro = cartan_prolongation(n)
    assert pro.chart.dim == 4 * n
    pts = sample_points(pro.chart)
    assert check_generalized_engel(pro.D, pts).verdict
    for p in pts[:5]:
        assert flag_ranks(pro.D, p) == pro.expected_ranks


def test_first_prolongation_is_engel():
    pro = cartan_prolongation(1)
    p = sample_points(pro.chart, count=1)[0]
    assert derived_flag(pro.D, p).ranks == (2, 3, 4)


def test_second_prolongation_growth_vector():
    pro = cartan_prolongation(2)
    assert pro.expected_ranks == (3, 4, 7, 8)
    for p in sample_points(pro.chart, count=5):
        assert derived_flag(pro.D, p).ranks == (4, 7, 8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_prolongation_brackets_fill_e(n):
    pro = cartan_prolongation(n)
    for i in range(1, n + 1):
        a = VectorField.coordinate(pro.chart, f"a{i}")
        assert lie_bracket(pro.Z, a) == -VectorField.coordinate(pro.chart, f"y{i}")
    for j in range(1, n):
        b = VectorField.coordinate(pro.chart, f"b{j}")
        assert lie_bracket(pro.Z, b) == -pro.P[j - 1]
    E = flag_generators(pro.D, 2)
    for p in sample_points(pro.chart, count=4):
        assert xl.same_span(E.rows(p), pro.E.rows(p), pro.chart.dim)


def test_prolongation_needs_positive_n():
    with pytest.raises(ValueError):
        cartan_prolongation(0)


@pytest.mark.parametrize("l", [0, 1, 2])
@pytest.mark.parametrize("r", [0, 1])
def test_normal_forms_pass_the_criteria(l, r):
    nf = normal_form(l, r)
    assert nf.chart.dim == 2 * nf.k + 2 + r
    assert len(nf.Omegas) == 2 * l + 1
    report = check_pfaffian_criteria(nf.Theta, nf.Omegas, sample_points(nf.chart, count=6))
    assert report.verdict, report.failed_conditions()


def test_smallest_normal_form():
    nf = normal_form(0)
    chart = nf.chart
    assert chart.names == ("x1", "y1", "z", "c1")
    d = lambda n: ExtForm.differential(chart, n)
    assert nf.Theta == d("z") - PolyScalar.coordinate(chart, "y1") * d("x1")
    assert nf.Omegas == (d("x1") + PolyScalar.coordinate(chart, "c1") * d("y1"),)


def test_smallest_normal_form_is_the_normal_engel_model():
    # (x1, y1, z, c1) -> (x, y, z, -w)
    nf = normal_form(0)
    theta, omegas = engel_local_forms("normal")
    for p in sample_points(theta.chart, count=10):
        x, y, z, w = p.coords
        q = RationalPoint(nf.chart, (x, y, z, -w))
        assert covector_rows((nf.Theta,) + nf.Omegas, q) == covector_rows([theta] + omegas, p)


def test_inert_coordinates_do_not_enter_the_forms():
    nf = normal_form(0, 2)
    assert nf.chart.names[-2:] == ("q1", "q2")
    for form in (nf.Theta,) + nf.Omegas:
        assert not any(c.depends_on(nf.chart.index("q1")) for c in form.terms.values())


def test_fixtures_are_named_and_on_r8():
    names = [fx.name for fx in counterexample_fixtures()]
    assert names == ["a", "b", "c"]
    for fx in counterexample_fixtures():
        assert fx.distribution.chart.dim == 8 and len(fx.distribution) == 4
    with pytest.raises(KeyError):
        fixture("d")


def test_second_fixture_misses_d_y3():
    fx = fixture("b")
    D = fx.distribution
    origin = RationalPoint.origin(D.chart)
    assert not xl.contains(D.basis_at(origin), VectorField.coordinate(D.chart, "y3").evaluate(origin), 8)


def test_third_fixture_has_an_integrable_hyperplane():
    sub = fixture("c").expected["integrable"]
    gens = sub.generators
    for i, X in enumerate(gens):
        for Y in gens[i + 1:]:
            assert lie_bracket(X, Y).is_zero()


def test_engel_variants():
    intro, normal = engel_local_forms("intro"), engel_local_forms("normal")
    assert intro[0] == normal[0]
    assert intro[1] != normal[1]
    with pytest.raises(ValueError):
        engel_local_forms("other")
