"""Canonical objects: Cartan prolongations, normal-form systems, example fixtures and families."""
from dataclasses import dataclass, field

from .distributions import Distribution
from .exterior import Chart, ExtForm, PolyScalar, VectorField
from .moser import OneParamFamily


def _c(chart, name):
    return PolyScalar.coordinate(chart, name)


def _v(chart, name):
    return VectorField.coordinate(chart, name)


def _d(chart, name):
    return ExtForm.differential(chart, name)


@dataclass(frozen=True)
class ProlongationChart:
    n: int
    chart: Chart
    L: Distribution
    D: Distribution
    E: Distribution
    theta: ExtForm
    omegas: tuple
    Z: VectorField
    P: tuple

    @property
    def expected_ranks(self):
        n = self.n
        return (2 * n - 1, 2 * n, 4 * n - 1, 4 * n)

    def family(self):
        return OneParamFamily.from_forms(self.theta, self.omegas, fixed_L=self.L.generators)


def cartan_prolongation(n):
    """Affine chart of the prolongation of the standard contact structure on R^(2n+1).

    Coordinates (x_1..x_n, y_1..y_n, z, a_1..a_n, b_1..b_{n-1}); the line is
    spanned by Z = P_n + sum a_i d_y_i + sum b_j P_j with P_i = d_x_i + y_i d_z.
    """
    if n < 1:
        raise ValueError("n must be positive")
    xs = [f"x{i}" for i in range(1, n + 1)]
    ys = [f"y{i}" for i in range(1, n + 1)]
    as_ = [f"a{i}" for i in range(1, n + 1)]
    bs = [f"b{j}" for j in range(1, n)]
    chart = Chart(tuple(xs + ys + ["z"] + as_ + bs))
    P = [_v(chart, x) + _c(chart, y) * _v(chart, "z") for x, y in zip(xs, ys)]
    Z = P[-1]
    for a, y in zip(as_, ys):
        Z = Z + _c(chart, a) * _v(chart, y)
    for b, Pj in zip(bs, P):
        Z = Z + _c(chart, b) * Pj
    L = [_v(chart, a) for a in as_] + [_v(chart, b) for b in bs]
    D = L + [Z]
    E = D + [_v(chart, y) for y in ys] + P[:-1]
    theta = _d(chart, "z")
    for x, y in zip(xs, ys):
        theta = theta - _c(chart, y) * _d(chart, x)
    dxn = _d(chart, xs[-1])
    omegas = [_d(chart, y) - _c(chart, a) * dxn for y, a in zip(ys, as_)]
    omegas += [_d(chart, x) - _c(chart, b) * dxn for x, b in zip(xs, bs)]
    return ProlongationChart(
        n, chart, Distribution(chart, L), Distribution(chart, D), Distribution(chart, E),
        theta, tuple(omegas), Z, tuple(P),
    )


@dataclass(frozen=True)
class NormalFormSystem:
    l: int
    r: int
    chart: Chart
    Theta: ExtForm
    Omegas: tuple

    @property
    def k(self):
        return 2 * self.l + 1


def normal_form(l, r=0):
    """Theta = dz - sum y_i dx_i with Omega^i = dx_i + c_i dy_{l+1} (i <= l+1), dy_{i-l-1} + c_i dy_{l+1} after."""
    if l < 0 or r < 0:
        raise ValueError("l and r must be non-negative")
    k = 2 * l + 1
    xs = [f"x{i}" for i in range(1, l + 2)]
    ys = [f"y{i}" for i in range(1, l + 2)]
    cs = [f"c{i}" for i in range(1, k + 1)]
    qs = [f"q{i}" for i in range(1, r + 1)]
    chart = Chart(tuple(xs + ys + ["z"] + cs + qs))
    theta = _d(chart, "z")
    for x, y in zip(xs, ys):
        theta = theta - _c(chart, y) * _d(chart, x)
    dy_last = _d(chart, ys[-1])
    omegas = []
    for i in range(1, k + 1):
        head = _d(chart, xs[i - 1]) if i <= l + 1 else _d(chart, ys[i - l - 2])
        omegas.append(head + _c(chart, cs[i - 1]) * dy_last)
    return NormalFormSystem(l, r, chart, theta, tuple(omegas))


@dataclass(frozen=True)
class Fixture:
    name: str
    distribution: Distribution
    expected_failed: tuple
    theta: ExtForm | None = None
    expected: dict = field(default_factory=dict, hash=False, compare=False)
    note: str = ""


def _fixture_a():
    chart = Chart(("x", "y", "z", "w", "x1", "y1", "z1", "t"))
    c = lambda n: _c(chart, n)
    v = lambda n: _v(chart, n)
    V = v("w") + c("x") * v("x1") + c("y") * v("y1") + c("z") * v("z1") + c("z1") * v("t")
    D = Distribution(chart, [v("x"), v("y"), v("z"), V])
    theta = _d(chart, "t") - c("z1") * _d(chart, "w")
    return Fixture("a", D, ("L_in_D",), theta, {"cauchy_rank": 5, "growth": (4, 7, 8)},
                   "L has rank 5 and is not contained in D")


def _fixture_b():
    chart = Chart(("w", "x1", "x2", "x3", "y1", "y2", "y3", "z"))
    c = lambda n: _c(chart, n)
    v = lambda n: _v(chart, n)
    gens = [
        v("w"),
        v("x1") + c("w") * v("y1") + c("y1") * v("z"),
        v("x2") + c("w") * v("y2") + c("y2") * v("z"),
        v("x3") + c("w") * v("y3"),
    ]
    theta = _d(chart, "z") - c("y1") * _d(chart, "x1") - c("y2") * _d(chart, "x2")
    return Fixture("b", Distribution(chart, gens), ("L_in_D",), theta,
                   {"cauchy_rank": 3, "outside_witness": "d_y3", "growth": (4, 7, 8)},
                   "d_y3 lies in L but not in D")


def _fixture_c():
    chart = Chart(("w", "x1", "x2", "x3", "y1", "y2", "y3", "z"))
    c = lambda n: _c(chart, n)
    v = lambda n: _v(chart, n)
    vs = [v(f"x{i}") + c("w") * v(f"y{i}") + c(f"y{i}") * v("z") for i in (1, 2, 3)]
    theta = _d(chart, "z")
    for i in (1, 2, 3):
        theta = theta - c(f"y{i}") * _d(chart, f"x{i}")
    return Fixture("c", Distribution(chart, [v("w")] + vs), ("L_corank1_in_D",), theta,
                   {"cauchy_rank": 1, "corank_L_in_D": 3, "growth": (4, 7, 8),
                    "integrable": Distribution(chart, vs)},
                   "L = <d_w> has corank 3 in D")


def counterexample_fixtures():
    """The three rank-4 distributions on R^8, each failing one flag condition."""
    return [_fixture_a(), _fixture_b(), _fixture_c()]


def fixture(name):
    for f in counterexample_fixtures():
        if f.name == name:
            return f
    raise KeyError(f"unknown fixture {name!r}")


def standard_engel():
    """D = <d_w, d_x + w d_y + y d_z> on (x, y, z, w)."""
    chart = Chart(("x", "y", "z", "w"))
    X = _v(chart, "x") + _c(chart, "w") * _v(chart, "y") + _c(chart, "y") * _v(chart, "z")
    return Distribution(chart, [_v(chart, "w"), X])


def engel_local_forms(variant="intro"):
    """(theta, [omega]) for the two Engel models on (x, y, z, w).

    "intro": dz - y dx, dy - w dx.  "normal": dz - y dx, dx - w dy.
    They differ by a swap of the roles of x and y in omega.
    """
    chart = Chart(("x", "y", "z", "w"))
    theta = _d(chart, "z") - _c(chart, "y") * _d(chart, "x")
    if variant == "intro":
        omega = _d(chart, "y") - _c(chart, "w") * _d(chart, "x")
    elif variant == "normal":
        omega = _d(chart, "x") - _c(chart, "w") * _d(chart, "y")
    else:
        raise ValueError(f"unknown Engel variant {variant!r}")
    return theta, [omega]


# ---------------------------------------------------------------- families on (x, y, z, w) x t

def _family_chart():
    base = Chart(("x", "y", "z", "w"))
    return base, base.extend("t")


def engel_translation_family():
    """theta = dz - y dx, omega_t = dy - (w + t) dx; the Moser field is -d_w."""
    base, ext = _family_chart()
    c = lambda n: _c(ext, n)
    theta = _d(ext, "z") - c("y") * _d(ext, "x")
    omega = _d(ext, "y") - (c("w") + c("t")) * _d(ext, "x")
    return OneParamFamily(base, theta, (omega,))


def engel_quadratic_family():
    """omega_t = dy - (w + t w^2) dx; along the flow w + t w^2 stays equal to w(0)."""
    base, ext = _family_chart()
    c = lambda n: _c(ext, n)
    theta = _d(ext, "z") - c("y") * _d(ext, "x")
    omega = _d(ext, "y") - (c("w") + c("t") * c("w") ** 2) * _d(ext, "x")
    return OneParamFamily(base, theta, (omega,))


def sliding_engel_family():
    """theta_t = dz - (y + t) dx, omega_t = dy - (w + t) dx; composed field -d_y - d_w."""
    base, ext = _family_chart()
    c = lambda n: _c(ext, n)
    theta = _d(ext, "z") - (c("y") + c("t")) * _d(ext, "x")
    omega = _d(ext, "y") - (c("w") + c("t")) * _d(ext, "x")
    return OneParamFamily(base, theta, (omega,))


def tilted_contact_family():
    """theta_t = dz - y dx - t dw; its characteristic line t d_z + d_w moves with t."""
    base, ext = _family_chart()
    theta = _d(ext, "z") - _c(ext, "y") * _d(ext, "x") - _c(ext, "t") * _d(ext, "w")
    return OneParamFamily(base, theta, ())


def constant_family(theta, omegas=()):
    return OneParamFamily.from_forms(theta, omegas)
