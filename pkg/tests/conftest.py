import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "scripts"))

from EngelFlagPy import config  # noqa: E402
from EngelFlagPy.exterior import Chart, ExtForm, PolyScalar, VectorField  # noqa: E402


@pytest.fixture(autouse=True)
def default_settings():
    saved = config.SETTINGS
    config.SETTINGS = config.Settings()
    yield
    config.SETTINGS = saved


@pytest.fixture
def chart4():
    return Chart(("x", "y", "z", "w"))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_poly(rng, chart, max_deg=2, terms=3):
    out = {}
    for _ in range(terms):
        exps = [0] * chart.dim
        for _ in range(int(rng.integers(0, max_deg + 1))):
            exps[int(rng.integers(0, chart.dim))] += 1
        out[tuple(exps)] = out.get(tuple(exps), 0) + int(rng.integers(-3, 4))
    return PolyScalar(chart, out)


def random_field(rng, chart):
    return VectorField(chart, [random_poly(rng, chart) for _ in range(chart.dim)])


def random_form(rng, chart, degree):
    from itertools import combinations
    idxs = list(combinations(range(chart.dim), degree))
    picks = rng.choice(len(idxs), size=min(2, len(idxs)), replace=False)
    return ExtForm(chart, degree, {idxs[int(i)]: random_poly(rng, chart) for i in picks})
