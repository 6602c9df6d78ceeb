from fractions import Fraction

import numpy as np
import pytest

from EngelFlagPy import config
from EngelFlagPy import exact_linalg as xl
from EngelFlagPy.constructions import (
    cartan_prolongation, constant_family, engel_local_forms, engel_quadratic_family,
    engel_translation_family, sliding_engel_family, tilted_contact_family,
)
from EngelFlagPy.distributions import sample_points
from EngelFlagPy.errors import FlowTruncated, HypothesisViolation
from EngelFlagPy.exterior import ExtForm, PolyScalar, RationalPoint
from EngelFlagPy.moser import (
    OneParamFamily, even_contact_moser_field_at, integrate_even_contact_flow, integrate_moser_flow,
    kernel_distributions, moser_field_at, trajectory_difference, verify_stability_pipeline,
)

P0 = (0.2, -0.1, 0.3, 0.5)


def random_times(rng, count):
    return [Fraction(int(rng.integers(0, 9)), int(rng.integers(1, 5))) for _ in range(count)]


# ---------------------------------------------------------------- exact Moser field

def test_translation_family_field_is_minus_d_w(rng):
    fam = engel_translation_family()
    pts = sample_points(fam.base, count=20)
    for t, p in zip(random_times(rng, 20), pts):
        res = moser_field_at(fam, t, p)
        assert res.X == (0, 0, 0, -1)
        assert res.residual_zero and res.membership_L
        assert str(res.field()) == "-d_w"


def test_constant_family_field_vanishes():
    theta, omegas = engel_local_forms("intro")
    fam = constant_family(theta, omegas)
    for p in sample_points(fam.base, count=5):
        assert moser_field_at(fam, Fraction(1, 3), p).X == (0, 0, 0, 0)


def test_field_ignores_the_choice_of_defining_forms(rng):
    fam = engel_translation_family()
    chart = fam.chart
    x, t = PolyScalar.coordinate(chart, "x"), PolyScalar.coordinate(chart, "t")
    variants = [
        fam.scaled(f=1 + x ** 2),
        fam.scaled(matrix=[[1 + t ** 2]]),
        fam.scaled(f=1 + t ** 2, matrix=[[2 + x ** 2 + t]]),
    ]
    for t_val, p in zip(random_times(rng, 8), sample_points(fam.base, count=8)):
        base = moser_field_at(fam, t_val, p).X
        for other in variants:
            assert moser_field_at(other, t_val, p).X == base


def test_moving_hyperplane_violates_fixed_e():
    fam = tilted_contact_family()
    with pytest.raises(HypothesisViolation):
        moser_field_at(fam, Fraction(1, 2), (1, 1, 1, 1))


def test_family_rejects_dt_components():
    fam = engel_translation_family()
    dt = ExtForm.differential(fam.chart, "t")
    with pytest.raises(ValueError):
        OneParamFamily(fam.base, fam.theta + dt)


# ---------------------------------------------------------------- kernel distributions

def test_translation_family_kernel_ranks(rng):
    fam = engel_translation_family()
    for t, p in zip(random_times(rng, 10), sample_points(fam.base, count=10)):
        kb = kernel_distributions(fam, t, p)
        ranks = kb.ranks()
        assert ranks["W"] == 0 and ranks["J"] == [1]
        assert ranks["L"] - ranks["K"][0] == 1
        assert kb.w_consistent


def test_prolongation_kernel_rank_laws(rng):
    fam = cartan_prolongation(2).family()
    dim = fam.base.dim
    for t, p in zip(random_times(rng, 10), sample_points(fam.base, count=10)):
        kb = kernel_distributions(fam, t, p)
        for K, J in zip(kb.K, kb.J):
            assert all(xl.contains(kb.L, vec, dim) for vec in K)
            assert len(kb.L) - len(K) == 1
            assert len(J) == len(kb.W) + 1
        assert kb.w_consistent


# ---------------------------------------------------------------- even-contact field

def test_even_contact_field_of_sliding_family(rng):
    fam = sliding_engel_family()
    for t, p in zip(random_times(rng, 6), sample_points(fam.base, count=6)):
        res = even_contact_moser_field_at(fam, t, p)
        assert res.X == (0, -1, 0, 0)
        assert res.residual_zero


def test_even_contact_field_of_constant_theta_vanishes():
    fam = engel_translation_family()
    assert even_contact_moser_field_at(fam, Fraction(1, 2), (1, 2, 3, 4)).X == (0, 0, 0, 0)


def test_moving_characteristic_line_is_rejected():
    with pytest.raises(HypothesisViolation):
        even_contact_moser_field_at(tilted_contact_family(), 0, (1, 0, 0, 0))


# ---------------------------------------------------------------- flows

def test_translation_flow_acceptance():
    flow = integrate_moser_flow(engel_translation_family(), P0)
    angles = flow.max_angles()
    assert not flow.truncated
    assert angles["D"] <= 1e-6
    assert angles["L"] <= 1e-8
    assert abs(flow.final_point[3] + 0.5) <= 1e-8
    assert np.allclose(flow.final_point[:3], P0[:3], atol=1e-10)
    assert [cp["t"] for cp in flow.checkpoints] == ["0", "1/2", "1"]
    assert all(cp["drift"] < 1e-8 for cp in flow.checkpoints)


def test_constant_family_flow_is_the_identity():
    theta, omegas = engel_local_forms("intro")
    flow = integrate_moser_flow(constant_family(theta, omegas), P0, steps=20, checkpoints=False)
    assert np.allclose(flow.trajectory, np.array(P0), atol=1e-14)
    assert flow.max_angle <= 1e-12


def test_flow_has_fourth_order_convergence():
    fam = engel_quadratic_family()
    errors = []
    for steps in (10, 20):
        flow = integrate_moser_flow(fam, P0, steps=steps, checkpoints=False)
        w = flow.final_point[3]
        errors.append(abs(w + w ** 2 - P0[3]))
    assert errors[1] * 8 <= errors[0]


def test_flow_is_deterministic():
    fam = engel_translation_family()
    a = integrate_moser_flow(fam, P0, steps=25, checkpoints=False)
    b = integrate_moser_flow(fam, P0, steps=25, checkpoints=False)
    assert np.array_equal(a.trajectory, b.trajectory)
    assert a.subspace_angles == b.subspace_angles


def test_leaving_the_chart_box_truncates():
    config.configure(chart_box=1.0)
    start = (0.2, -0.1, 0.3, -0.5)
    flow = integrate_moser_flow(engel_translation_family(), start, steps=100)
    assert flow.truncated
    assert flow.checkpoints == []
    assert flow.t_grid[-1] < 1.0
    with pytest.raises(FlowTruncated):
        integrate_moser_flow(engel_translation_family(), start, steps=100, strict=True)


def test_flow_tables(tmp_path):
    flow = integrate_moser_flow(engel_translation_family(), P0, steps=10, checkpoints=False)
    frame = flow.to_frame()
    assert list(frame.columns) == ["t", "x", "y", "z", "w", "angle_D", "angle_E", "angle_L"]
    assert len(frame) == 11
    path = tmp_path / "flow.csv"
    flow.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,x,y,z,w,angle_D,angle_E,angle_L"
    out = flow.to_dict()
    assert out["steps"] == 10 and out["metric"] == "euclidean"


def test_even_contact_flow_normalises_e():
    flow = integrate_even_contact_flow(sliding_engel_family(), P0, steps=100)
    assert flow.max_angles()["E"] <= 1e-6
    assert abs(flow.final_point[1] - (P0[1] - 1)) <= 1e-8


# ---------------------------------------------------------------- two-stage pipeline

def test_pipeline_on_sliding_family():
    flow = verify_stability_pipeline(sliding_engel_family(), P0, steps=100)
    assert flow.max_angle <= 1e-4
    assert abs(flow.final_point[1] - (P0[1] - 1)) <= 1e-6
    assert abs(flow.final_point[3] - (P0[3] - 1)) <= 1e-6


def test_pipeline_reduces_to_stage_two_for_constant_theta():
    fam = engel_translation_family()
    piped = verify_stability_pipeline(fam, P0, steps=50)
    direct = integrate_moser_flow(fam, P0, steps=50, checkpoints=False)
    assert trajectory_difference(piped, direct) <= 1e-10


def test_pipeline_tags_the_failing_stage():
    with pytest.raises(HypothesisViolation) as info:
        verify_stability_pipeline(tilted_contact_family(), P0, steps=10)
    assert info.value.stage == "stage1-even-contact"
