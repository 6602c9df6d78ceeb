from fractions import Fraction

import numpy as np
import pytest

from EngelFlagPy import config
from EngelFlagPy.constructions import cartan_prolongation, normal_form
from EngelFlagPy.errors import ChartMismatchError, DegreeOverflowError, FormDegreeError
from EngelFlagPy.exterior import (
    Chart, ExtForm, PolyScalar, RationalPoint, VectorField, covector_rows, evaluate,
    exterior_derivative, interior_product, lie_bracket, wedge,
)

from conftest import random_field, random_form, random_poly

R8A = Chart(("x", "y", "z", "w", "x1", "y1", "z1", "t"))
R8B = Chart(("w", "x1", "x2", "x3", "y1", "y2", "y3", "z"))


def c(chart, name):
    return PolyScalar.coordinate(chart, name)


def v(chart, name):
    return VectorField.coordinate(chart, name)


def d(chart, name):
    return ExtForm.differential(chart, name)


def random_point(rng, chart):
    return RationalPoint(chart, tuple(Fraction(int(a), int(b)) for a, b in
                                      zip(rng.integers(-3, 4, chart.dim), rng.integers(1, 4, chart.dim))))


# ---------------------------------------------------------------- worked examples

def test_coordinate_fields_commute(chart4):
    assert lie_bracket(v(chart4, "x"), v(chart4, "y")).is_zero()


def test_bracket_of_first_r8_distribution():
    V = v(R8A, "w") + c(R8A, "x") * v(R8A, "x1") + c(R8A, "y") * v(R8A, "y1") \
        + c(R8A, "z") * v(R8A, "z1") + c(R8A, "z1") * v(R8A, "t")
    assert lie_bracket(v(R8A, "x"), V) == v(R8A, "x1")


def test_bracket_of_second_r8_distribution():
    X = v(R8B, "x1") + c(R8B, "w") * v(R8B, "y1") + c(R8B, "y1") * v(R8B, "z")
    assert lie_bracket(v(R8B, "w"), X) == v(R8B, "y1")


def test_bracket_rejects_mixed_charts(chart4):
    with pytest.raises(ChartMismatchError):
        lie_bracket(v(chart4, "x"), v(R8A, "x"))


def test_exterior_derivative_examples(chart4):
    theta = d(chart4, "z") - c(chart4, "y") * d(chart4, "x")
    dxdy = wedge(d(chart4, "x"), d(chart4, "y"))
    assert theta.d() == dxdy
    assert (c(chart4, "x") * d(chart4, "y")).d() == dxdy
    nf = normal_form(1)
    assert nf.Theta.d().d().is_zero()


def test_exterior_derivative_of_top_form_is_refused(chart4):
    top = d(chart4, "x").wedge(d(chart4, "y")).wedge(d(chart4, "z")).wedge(d(chart4, "w"))
    with pytest.raises(FormDegreeError):
        exterior_derivative(top)


def test_wedge_examples(chart4):
    dx = d(chart4, "x")
    assert wedge(dx, dx).is_zero()
    theta = d(chart4, "z") - c(chart4, "y") * dx
    got = wedge(theta, wedge(dx, d(chart4, "y")))
    assert got == ExtForm(chart4, 3, {(0, 1, 2): 1})
    nf = normal_form(0)
    assert wedge(nf.Theta, nf.Theta.d().power(2)).is_zero()


def test_wedge_past_dimension_is_the_zero_form(chart4):
    dxdydz = d(chart4, "x").wedge(d(chart4, "y")).wedge(d(chart4, "z"))
    out = wedge(dxdydz, d(chart4, "x").wedge(d(chart4, "w")))
    assert out.degree == 5 and out.is_zero()


def test_interior_product_examples(chart4):
    assert interior_product(v(chart4, "w"), wedge(d(chart4, "x"), d(chart4, "w"))) == -d(chart4, "x")
    theta = d(chart4, "z") - c(chart4, "y") * d(chart4, "x")
    assert interior_product(v(chart4, "x"), theta) == ExtForm.function(-c(chart4, "y"))
    pro = cartan_prolongation(1)
    assert not interior_product(pro.Z, pro.theta.d()).is_zero()


def test_interior_product_of_a_function_is_refused(chart4):
    with pytest.raises(FormDegreeError):
        interior_product(v(chart4, "x"), ExtForm.function(c(chart4, "x")))


def test_evaluate_examples():
    chart = Chart(("x", "y", "z"))
    p = RationalPoint(chart, (0, 3, 1))
    assert evaluate(c(chart, "y") * v(chart, "z"), p) == (0, 0, 3)
    theta = d(chart, "z") - c(chart, "y") * d(chart, "x")
    assert covector_rows([theta], RationalPoint(chart, (0, 2, 0))) == [[-2, 0, 1]]


def test_eta_of_first_r8_distribution_is_nonzero_at_origin():
    dw = d(R8A, "w")
    omegas = [d(R8A, "x1") - c(R8A, "x") * dw, d(R8A, "y1") - c(R8A, "y") * dw,
              d(R8A, "z1") - c(R8A, "z") * dw]
    theta = d(R8A, "t") - c(R8A, "z1") * dw
    eta = omegas[0].wedge(omegas[1]).wedge(omegas[2]).wedge(theta).wedge(omegas[0].d())
    assert any(val != 0 for val in eta.evaluate(RationalPoint.origin(R8A)).values())


def test_degree_cap_is_enforced(chart4):
    config.configure(max_degree=3)
    with pytest.raises(DegreeOverflowError):
        c(chart4, "x") ** 4


def test_string_form(chart4):
    theta = d(chart4, "z") - c(chart4, "y") * d(chart4, "x")
    assert str(theta) == "-y*dx + dz"
    assert str(wedge(d(chart4, "x"), d(chart4, "y"))) == "dx&dy"


# ---------------------------------------------------------------- algebraic identities on random data

@pytest.mark.parametrize("seed", range(100))
def test_bracket_antisymmetry_and_jacobi(seed):
    rng = np.random.default_rng(seed)
    chart = Chart(("x", "y", "z", "u", "s")[: 3 + seed % 3])
    X, Y, Z = (random_field(rng, chart) for _ in range(3))
    assert (lie_bracket(X, Y) + lie_bracket(Y, X)).is_zero()
    jacobi = lie_bracket(lie_bracket(X, Y), Z) + lie_bracket(lie_bracket(Y, Z), X) \
        + lie_bracket(lie_bracket(Z, X), Y)
    assert jacobi.is_zero()


@pytest.mark.parametrize("seed", range(100))
def test_d_squared_and_leibniz(seed, chart4):
    rng = np.random.default_rng(1000 + seed)
    for degree in (0, 1, 2):
        assert random_form(rng, chart4, degree).d().d().is_zero()
    a = random_form(rng, chart4, 1)
    b = random_form(rng, chart4, 1)
    f = ExtForm.function(random_poly(rng, chart4))
    assert wedge(a, b).d() == wedge(a.d(), b) - wedge(a, b.d())
    assert wedge(f, a).d() == wedge(f.d(), a) + wedge(f, a.d())


@pytest.mark.parametrize("seed", range(100))
def test_cartan_formula_on_one_forms(seed, chart4):
    rng = np.random.default_rng(2000 + seed)
    alpha = random_form(rng, chart4, 1)
    X, Y = random_field(rng, chart4), random_field(rng, chart4)
    lhs = alpha.d().pair([X, Y])
    rhs = X.apply(alpha.pair([Y])) - Y.apply(alpha.pair([X])) - alpha.pair([lie_bracket(X, Y)])
    p = random_point(rng, chart4)
    assert evaluate(lhs, p) == evaluate(rhs, p)
    assert lhs == rhs


def test_interior_product_squares_to_zero(rng, chart4):
    for _ in range(20):
        X = random_field(rng, chart4)
        alpha = random_form(rng, chart4, 2)
        assert interior_product(X, interior_product(X, alpha)).is_zero()


def test_evaluate_commutes_with_wedge(rng, chart4):
    for _ in range(20):
        a, b = random_form(rng, chart4, 1), random_form(rng, chart4, 2)
        p = random_point(rng, chart4)
        const = lambda form: ExtForm(chart4, form.degree, form.evaluate(p))
        assert ExtForm(chart4, 3, wedge(a, b).evaluate(p)) == wedge(const(a), const(b))


def test_d_matches_finite_differences(rng, chart4):
    h = 1e-6
    for _ in range(10):
        alpha = random_form(rng, chart4, 1)
        p = random_point(rng, chart4).as_floats()
        coeff = [alpha.terms.get((i,), PolyScalar.zero(chart4)) for i in range(4)]
        dalpha = alpha.d()
        for i in range(4):
            for j in range(i + 1, 4):
                e_i, e_j = np.eye(4)[i] * h, np.eye(4)[j] * h
                fd = (coeff[j].evaluate_float(p + e_i) - coeff[j].evaluate_float(p - e_i)
                      - coeff[i].evaluate_float(p + e_j) + coeff[i].evaluate_float(p - e_j)) / (2 * h)
                exact = dalpha.terms.get((i, j), PolyScalar.zero(chart4)).evaluate_float(p)
                assert abs(fd - exact) < 1e-6 * max(1.0, abs(exact))
