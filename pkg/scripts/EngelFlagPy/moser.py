"""Moser fields for one-parameter families and numerical flow verification.

Exact solves happen at rational (t, p). Flows run in floating point on the
compiled coefficients; exact solves at rational checkpoints record the drift
of the float field.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy import linalg as sla

from . import config
from . import exact_linalg as xl
from .distributions import PfaffianSystem, cauchy_characteristic, pairing_kernel
from .errors import FlowTruncated, HypothesisViolation
from .exterior import ExtForm, RationalPoint, VectorField, bilinear, covector_rows, two_form_matrix

logger = logging.getLogger(__name__)

CHECKPOINT_TIMES = (Fraction(0), Fraction(1, 2), Fraction(1))


@dataclass(frozen=True)
class OneParamFamily:
    """theta_t and omega_t as forms on base + (t,), with no dt components."""

    base: object
    theta: ExtForm
    omegas: tuple = ()
    t_name: str = "t"
    fixed_L: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(self.omegas))
        object.__setattr__(self, "fixed_L", tuple(self.fixed_L))
        if self.t_name in self.base.names:
            raise ValueError(f"parameter {self.t_name!r} clashes with a coordinate")
        for f in (self.theta,) + self.omegas:
            if f.chart != self.chart or f.degree != 1:
                raise ValueError(f"{f} is not a 1-form on {self.chart!r}")
            if any(self.t_index in idx for idx in f.terms):
                raise ValueError(f"{f} has a d{self.t_name} component")

    @classmethod
    def from_forms(cls, theta, omegas=(), t_name="t", fixed_L=()):
        """Family from forms on either the base chart (constant) or base + t."""
        base = theta.chart
        if t_name in base.names:
            base = type(base)(tuple(n for n in base.names if n != t_name))
        chart = base.extend(t_name)
        return cls(base, theta.rechart(chart), tuple(w.rechart(chart) for w in omegas), t_name, fixed_L)

    @property
    def chart(self):
        return self.base.extend(self.t_name)

    @property
    def t_index(self):
        return self.base.dim

    @property
    def k(self):
        return len(self.omegas)

    def theta_is_constant(self):
        return all(not c.depends_on(self.t_index) for c in self.theta.terms.values())

    def at(self, t):
        """(theta_t, omegas_t, dtheta/dt, domega/dt) on the base chart."""
        return _instant(self, Fraction(t))

    def scaled(self, f=1, matrix=None):
        """Same distributions, other defining forms: f*theta and matrix @ omegas (scalars on self.chart)."""
        omegas = self.omegas
        if matrix is not None:
            omegas = tuple(
                sum((a * w for a, w in zip(row, self.omegas)), ExtForm.zero(self.chart, 1))
                for row in matrix
            )
        return OneParamFamily(self.base, f * self.theta, omegas, self.t_name, self.fixed_L)


@lru_cache(maxsize=256)
def _instant(fam, t):
    i, base = fam.t_index, fam.base
    theta = fam.theta.specialize(i, t, base)
    omegas = tuple(w.specialize(i, t, base) for w in fam.omegas)
    theta_dot = fam.theta.coefficient_diff(i).specialize(i, t, base)
    omega_dots = tuple(w.coefficient_diff(i).specialize(i, t, base) for w in fam.omegas)
    return theta, omegas, theta_dot, omega_dots


def _as_point(fam, p):
    return p if isinstance(p, RationalPoint) else RationalPoint(fam.base, p)


def _d_basis(forms, p, t):
    rows = covector_rows(forms, p)
    if xl.rank(rows) != len(forms):
        raise HypothesisViolation(f"instantaneous system is not regular at t={t}, p={p}")
    return xl.nullspace(rows, p.chart.dim)


def _l_basis(fam, theta, p):
    if fam.fixed_L:
        return xl.row_basis([list(X.evaluate(p)) for X in fam.fixed_L], p.chart.dim)
    return [list(v) for v in cauchy_characteristic(PfaffianSystem(fam.base, [theta]), p).basis]


def _fmt_vector(v):
    return [str(c) for c in v]


# ---------------------------------------------------------------- kernel distributions

@dataclass
class KernelBases:
    t: Fraction
    point: RationalPoint
    D: list
    L: list
    K: list
    J: list
    W: list
    w_consistent: bool

    def ranks(self):
        return {
            "D": len(self.D),
            "L": len(self.L),
            "K": [len(b) for b in self.K],
            "J": [len(b) for b in self.J],
            "W": len(self.W),
        }

    def to_dict(self):
        return {
            "t": str(self.t),
            "point": _fmt_vector(self.point.coords),
            "ranks": self.ranks(),
            "L": [_fmt_vector(v) for v in self.L],
            "W": [_fmt_vector(v) for v in self.W],
            "w_consistent": self.w_consistent,
        }


def kernel_distributions(fam, t, p):
    """K^i = ker d(omega^i)|_D, J^i = L cut by the other K^j, W = all K^j cut together."""
    t = Fraction(t)
    p = _as_point(fam, p)
    dim = fam.base.dim
    theta, omegas, _, _ = fam.at(t)
    D = _d_basis([theta] + list(omegas), p, t)
    L = _l_basis(fam, theta, p)
    K = [pairing_kernel(two_form_matrix(w.d(), p), D, dim) for w in omegas]
    J = []
    for i in range(len(K)):
        acc = L
        for j, kj in enumerate(K):
            if j != i:
                acc = xl.intersect(acc, kj, dim)
        J.append(acc)
    W = xl.row_basis(D, dim)
    for kj in K:
        W = xl.intersect(W, kj, dim)
    consistent = all(xl.same_span(W, xl.intersect(J[i], K[i], dim), dim) for i in range(len(K)))
    logger.debug("kernel ranks at t=%s p=%s: L=%d W=%d", t, p, len(L), len(W))
    return KernelBases(t, p, D, L, K, J, W, consistent)


# ---------------------------------------------------------------- exact Moser solves

@dataclass
class MoserSolveResult:
    point: RationalPoint
    t: Fraction
    X: tuple
    residual_zero: bool
    membership_L: bool

    def field(self):
        return VectorField.from_vector(self.point.chart, self.X)

    def to_dict(self):
        return {
            "t": str(self.t),
            "point": _fmt_vector(self.point.coords),
            "X": _fmt_vector(self.X),
            "field": str(self.field()),
            "residual_zero": self.residual_zero,
            "membership_L": self.membership_L,
        }


def _check_fixed_E(theta, theta_dot, omegas, D, p, t):
    if xl.rank(covector_rows([theta, theta_dot], p)) > 1:
        raise HypothesisViolation(f"d/dt theta is not a multiple of theta at t={t}, p={p}")
    dtheta = two_form_matrix(theta.d(), p)
    domegas = [two_form_matrix(w.d(), p) for w in omegas]
    brackets = []
    for a in range(len(D)):
        for b in range(a + 1, len(D)):
            if bilinear(dtheta, D[a], D[b]) != 0:
                raise HypothesisViolation(f"D_t^2 leaves ker theta at t={t}, p={p}")
            brackets.append([bilinear(m, D[a], D[b]) for m in domegas])
    if omegas and xl.rank(brackets) != len(omegas):
        raise HypothesisViolation(f"D_t^2 is not ker theta at t={t}, p={p}")


def moser_field_at(fam, t, p, check_fixed_E=True):
    """Minimum-norm X in L with d(omega^i)(X, Y) = -(d/dt omega^i)(Y) for Y in D_t."""
    t = Fraction(t)
    p = _as_point(fam, p)
    dim = fam.base.dim
    theta, omegas, theta_dot, omega_dots = fam.at(t)
    D = _d_basis([theta] + list(omegas), p, t)
    if check_fixed_E:
        _check_fixed_E(theta, theta_dot, omegas, D, p, t)
    L = _l_basis(fam, theta, p)
    mats = [two_form_matrix(w.d(), p) for w in omegas]
    dots = covector_rows(omega_dots, p) if omega_dots else []
    rows, rhs = [], []
    for m, wd in zip(mats, dots):
        for y in D:
            rows.append([bilinear(m, b, y) for b in L])
            rhs.append(-xl.dot(wd, y))
    if not L:
        u0, kernel = ([], []) if not any(rhs) else (None, [])
    else:
        u0, kernel = xl.solve(rows, rhs, len(L))
    if u0 is None:
        raise HypothesisViolation(f"family violates stability hypotheses at (t={t}, p={p})")
    x0 = xl.combine(u0, L, dim)
    X = xl.min_norm_point(x0, [xl.combine(c, L, dim) for c in kernel], dim)
    residual = all(
        bilinear(m, X, y) + xl.dot(wd, y) == 0 for m, wd in zip(mats, dots) for y in D
    )
    return MoserSolveResult(p, t, tuple(X), residual, xl.contains(L, X, dim))


@dataclass
class EvenContactSolveResult:
    point: RationalPoint
    t: Fraction
    X: tuple
    residual_zero: bool
    L: list

    def field(self):
        return VectorField.from_vector(self.point.chart, self.X)

    def to_dict(self):
        return {
            "t": str(self.t),
            "point": _fmt_vector(self.point.coords),
            "X": _fmt_vector(self.X),
            "field": str(self.field()),
            "residual_zero": self.residual_zero,
            "L": [_fmt_vector(v) for v in self.L],
            "metric": "euclidean",
        }


def _check_constant_L(fam, p, L, t):
    dim = fam.base.dim
    for s in CHECKPOINT_TIMES:
        if s == t:
            continue
        other = _l_basis(fam, fam.at(s)[0], p)
        if not xl.same_span(L, other, dim):
            raise HypothesisViolation(f"L_t is not constant in t at p={p} (t={t} vs t={s})")


def even_contact_moser_field_at(fam, t, p, check_constant_L=True):
    """The X in V = L-perp inside E_t with d(theta)(X, .)|_V = -(d/dt theta)|_V."""
    t = Fraction(t)
    p = _as_point(fam, p)
    dim = fam.base.dim
    theta, _, theta_dot, _ = fam.at(t)
    L = _l_basis(fam, theta, p)
    if check_constant_L:
        _check_constant_L(fam, p, L, t)
    V = xl.nullspace(covector_rows([theta], p) + [list(v) for v in L], dim)
    m = two_form_matrix(theta.d(), p)
    gram = [[bilinear(m, a, b) for b in V] for a in V]
    if xl.rank(gram) != len(V):
        raise HypothesisViolation(f"d theta_t is degenerate on V at t={t}, p={p}")
    td = covector_rows([theta_dot], p)[0]
    u, _ = xl.solve(xl.transpose(gram), [-xl.dot(td, b) for b in V], len(V))
    X = xl.combine(u, V, dim)
    residual = all(bilinear(m, X, b) + xl.dot(td, b) == 0 for b in V)
    return EvenContactSolveResult(p, t, tuple(X), residual, L)


# ---------------------------------------------------------------- float machinery

class _FloatForm:
    """Coefficients of a form compiled into one monomial table."""

    def __init__(self, form, n):
        self.n = n
        self.degree = form.degree
        self.keys = sorted(form.terms)
        exps, coeffs, target = [], [], []
        for slot, idx in enumerate(self.keys):
            for e, c in form.terms[idx].terms.items():
                exps.append(e)
                coeffs.append(float(c))
                target.append(slot)
        width = form.chart.dim
        self.exps = np.array(exps, dtype=float).reshape(-1, width)
        self.coeffs = np.array(coeffs)
        self.target = np.array(target, dtype=int)

    def values(self, x):
        if not len(self.coeffs):
            return np.zeros(len(self.keys))
        mono = np.prod(np.power(x, self.exps), axis=1)
        return np.bincount(self.target, weights=self.coeffs * mono, minlength=len(self.keys))

    def covector(self, x):
        out = np.zeros(self.n)
        for (i,), v in zip(self.keys, self.values(x)):
            out[i] = v
        return out

    def matrix(self, x):
        out = np.zeros((self.n, self.n))
        for (i, j), v in zip(self.keys, self.values(x)):
            out[i, j] = v
            out[j, i] = -v
        return out


def _spatial_d(form, t_index):
    full = form.d()
    return ExtForm(form.chart, 2, {idx: c for idx, c in full.terms.items() if t_index not in idx})


def _tail_basis(rows, k):
    """Orthonormal basis (columns) of the k right-singular directions with the smallest singular values."""
    rows = np.atleast_2d(rows)
    n = rows.shape[1]
    if k == 0:
        return np.zeros((n, 0))
    _, _, vt = sla.svd(rows, full_matrices=True)
    return vt[n - k:].T


class FloatSystem:
    """Float evaluation of a family: frames, Moser and even-contact fields."""

    def __init__(self, fam, rank_L):
        n = fam.base.dim
        ti = fam.t_index
        self.fam = fam
        self.n = n
        self.k = fam.k
        self.rank_L = rank_L
        self.theta = _FloatForm(fam.theta, n)
        self.dtheta = _FloatForm(_spatial_d(fam.theta, ti), n)
        self.theta_dot = _FloatForm(fam.theta.coefficient_diff(ti), n)
        self.omegas = [_FloatForm(w, n) for w in fam.omegas]
        self.domegas = [_FloatForm(_spatial_d(w, ti), n) for w in fam.omegas]
        self.omega_dots = [_FloatForm(w.coefficient_diff(ti), n) for w in fam.omegas]
        self.fixed_L = [[c.rechart(fam.chart) for c in X.components] for X in fam.fixed_L]

    @staticmethod
    def _x(p, t):
        return np.append(np.asarray(p, dtype=float), t)

    def frames(self, p, t):
        """Orthonormal bases (columns) of D, E and L at (p, t)."""
        x = self._x(p, t)
        th = self.theta.covector(x)
        rows = np.vstack([th] + [w.covector(x) for w in self.omegas])
        D = _tail_basis(rows, self.n - 1 - self.k)
        E = _tail_basis(th, self.n - 1)
        if self.fixed_L:
            cols = np.array([[c.evaluate_float(x) for c in X] for X in self.fixed_L]).T
            L = sla.orth(cols)
        else:
            m = E.T @ self.dtheta.matrix(x) @ E
            L = E @ _tail_basis(m, self.rank_L)
        return D, E, L

    def moser(self, p, t, extra=None):
        """Float Moser field; extra(D, x) adds per-form terms to the right-hand side."""
        x = self._x(p, t)
        D, _, L = self.frames(p, t)
        if self.rank_L == 0 or not self.k:
            return np.zeros(self.n)
        blocks, rhs = [], []
        for i in range(self.k):
            om = self.domegas[i].matrix(x)
            blocks.append((L.T @ om @ D).T)
            r = -(self.omega_dots[i].covector(x) @ D)
            if extra is not None:
                r = r - extra(i, om, D, x)
            rhs.append(r)
        a = np.vstack(blocks)
        b = np.concatenate(rhs)
        u, _, _, _ = sla.lstsq(a, b)
        if np.linalg.norm(a @ u - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
            raise HypothesisViolation(f"Moser system inconsistent at t={t:.6g}")
        return L @ u

    def even_contact(self, p, t):
        x = self._x(p, t)
        _, _, L = self.frames(p, t)
        th = self.theta.covector(x)
        V = sla.null_space(np.vstack([th, L.T]))
        g = V.T @ self.dtheta.matrix(x) @ V
        if V.shape[1] and np.linalg.cond(g) > 1e12:
            raise HypothesisViolation(f"d theta_t is degenerate on V at t={t:.6g}")
        if not V.shape[1]:
            return np.zeros(self.n)
        u = sla.solve(g.T, -(self.theta_dot.covector(x) @ V))
        return V @ u

    def omega_values(self, p, t, Y):
        x = self._x(p, t)
        return np.array([w.covector(x) @ Y for w in self.omegas])


def _jacobian(fn, p, t, eps):
    n = len(p)
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = eps
        cols.append((fn(p + e, t) - fn(p - e, t)) / (2 * eps))
    return np.array(cols).T


def rk4_step(f, t, y, h):
    """One classical fourth-order step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0


def _max_angle(a, b):
    if a.shape[1] == 0 and b.shape[1] == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(a, b)))


# ---------------------------------------------------------------- flows

@dataclass
class FlowVerification:
    t_grid: list
    trajectory: np.ndarray
    jacobians: np.ndarray
    subspace_angles: dict
    coords: tuple = ()
    truncated: bool = False
    stage: str = "moser"
    checkpoints: list = field(default_factory=list)
    metric: str = "euclidean"

    @property
    def max_angle(self):
        return max(self.subspace_angles["D"], default=0.0)

    def max_angles(self):
        return {name: max(vals, default=0.0) for name, vals in self.subspace_angles.items()}

    @property
    def final_point(self):
        return self.trajectory[-1]

    def to_dict(self):
        return {
            "kind": "flow_verification",
            "stage": self.stage,
            "steps": len(self.t_grid) - 1,
            "t_end": self.t_grid[-1],
            "coords": list(self.coords),
            "initial_point": [float(v) for v in self.trajectory[0]],
            "final_point": [float(v) for v in self.final_point],
            "max_angles": self.max_angles(),
            "max_angle": self.max_angle,
            "truncated": self.truncated,
            "metric": self.metric,
            "checkpoints": self.checkpoints,
        }

    def to_frame(self):
        """One row per grid time: coordinates then one angle column per flag level."""
        frame = pd.DataFrame(self.trajectory, columns=list(self.coords) or None)
        frame.insert(0, "t", self.t_grid[:len(frame)])
        for name, vals in self.subspace_angles.items():
            frame[f"angle_{name}"] = vals
        return frame

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def _grid(steps, h, t_end):
    s = config.SETTINGS
    if steps is None:
        h = s.step if h is None else h
        steps = max(1, int(round(t_end / h)))
    return steps, t_end / steps


def _rational(p0):
    return tuple(Fraction(float(v)).limit_denominator(10 ** 6) for v in p0)


def _integrate(system, velocity, p0, steps, h, stage, strict):
    """RK4 on (p, J) with dJ/dt = (dX/dp) J; angles of pushed D, E, L frames at every grid time."""
    s = config.SETTINGS
    n = system.n
    eps = s.fd_step

    def dyn(t, y):
        p = y[:n]
        J = y[n:].reshape(n, n)
        A = _jacobian(velocity, p, t, eps)
        return np.concatenate([velocity(p, t), (A @ J).reshape(-1)])

    p0 = np.asarray(p0, dtype=float)
    y = np.concatenate([p0, np.eye(n).reshape(-1)])
    D0, E0, L0 = system.frames(p0, 0.0)
    ts, traj, jacs = [0.0], [p0.copy()], [np.eye(n)]
    angles = {"D": [0.0], "E": [0.0], "L": [0.0]}
    truncated = False
    t = 0.0
    for step in range(steps):
        y = rk4_step(dyn, t, y, h)
        t = (step + 1) * h
        p = y[:n]
        if not np.all(np.isfinite(p)) or np.max(np.abs(p)) > s.chart_box:
            truncated = True
            logger.warning("trajectory left the chart box at t=%.4g", t)
            if strict:
                raise FlowTruncated(f"trajectory left the chart box at t={t:.4g}")
            break
        J = y[n:].reshape(n, n)
        Dt, Et, Lt = system.frames(p, t)
        angles["D"].append(_max_angle(J @ D0, Dt))
        angles["E"].append(_max_angle(J @ E0, Et))
        angles["L"].append(_max_angle(J @ L0, Lt))
        ts.append(t)
        traj.append(p.copy())
        jacs.append(J.copy())
    coords = tuple(system.fam.base.names)
    return FlowVerification(ts, np.array(traj), np.array(jacs), angles, coords, truncated, stage)


def _exact_rank_L(fam, p0):
    p = RationalPoint(fam.base, _rational(p0))
    theta = fam.at(0)[0]
    return len(_l_basis(fam, theta, p))


def _checkpoints(fam, flow, system, velocity, exact):
    """Exact solves at rational approximations of grid points near the checkpoint times."""
    out = []
    if flow.truncated:
        return out
    t_end = flow.t_grid[-1]
    for target in CHECKPOINT_TIMES:
        idx = int(np.argmin(np.abs(np.array(flow.t_grid) - float(target) * t_end)))
        t = Fraction(flow.t_grid[idx]).limit_denominator(10 ** 6)
        p = RationalPoint(fam.base, _rational(flow.trajectory[idx]))
        X = np.array([float(v) for v in exact(fam, t, p).X])
        drift = float(np.max(np.abs(velocity(np.array([float(c) for c in p.coords]), float(t)) - X)))
        out.append({"t": str(t), "drift": drift})
    return out


def integrate_moser_flow(fam, p0, steps=None, h=None, t_end=1.0, strict=False, checkpoints=True):
    """Flow of the Moser field from p0 with pushed-frame angles for D, E and L."""
    steps, h = _grid(steps, h, t_end)
    system = FloatSystem(fam, _exact_rank_L(fam, p0))
    flow = _integrate(system, system.moser, p0, steps, h, "moser", strict)
    if checkpoints:
        flow.checkpoints = _checkpoints(fam, flow, system, system.moser, moser_field_at)
    logger.info("Moser flow: %d steps, max D angle %.3g", steps, flow.max_angle)
    return flow


def integrate_even_contact_flow(fam, p0, steps=None, h=None, t_end=1.0, strict=False, checkpoints=True):
    """Stage-one flow alone: normalises E_t; D angles are reported but not expected to vanish."""
    steps, h = _grid(steps, h, t_end)
    p_rat = RationalPoint(fam.base, _rational(p0))
    _check_constant_L(fam, p_rat, _l_basis(fam, fam.at(0)[0], p_rat), Fraction(0))
    system = FloatSystem(fam, _exact_rank_L(fam, p0))
    flow = _integrate(system, system.even_contact, p0, steps, h, "even_contact", strict)
    if checkpoints:
        flow.checkpoints = _checkpoints(fam, flow, system, system.even_contact, even_contact_moser_field_at)
    return flow


def composed_velocity(system):
    """Y_t + X_t with Y the even-contact field and X the stage-two Moser field in original coordinates."""
    lie_step = 100 * config.SETTINGS.fd_step

    def velocity(p, t):
        Y = system.even_contact(p, t)

        def extra(i, om, D, x):
            # (i_Y d omega)(V) + V(omega(Y)) for V in the D frame
            out = Y @ om @ D
            for b in range(D.shape[1]):
                v = D[:, b] * lie_step
                hi = system.omega_values(p + v, t, system.even_contact(p + v, t))[i]
                lo = system.omega_values(p - v, t, system.even_contact(p - v, t))[i]
                out[b] += (hi - lo) / (2 * lie_step)
            return out

        return Y + system.moser(p, t, extra)

    return velocity


def verify_stability_pipeline(fam, p0, steps=None, h=None, t_end=1.0, strict=False):
    """Both stages composed: E_t normalised by the even-contact field, then D_t by the Moser field."""
    steps, h = _grid(steps, h, t_end)
    p_rat = RationalPoint(fam.base, _rational(p0))
    try:
        for t in CHECKPOINT_TIMES:
            even_contact_moser_field_at(fam, t, p_rat)
    except HypothesisViolation as e:
        raise HypothesisViolation(str(e.args[0]), stage="stage1-even-contact") from e
    system = FloatSystem(fam, _exact_rank_L(fam, p0))
    try:
        flow = _integrate(system, composed_velocity(system), p0, steps, h, "pipeline", strict)
    except HypothesisViolation as e:
        raise HypothesisViolation(str(e.args[0]), stage="stage2-moser") from e
    logger.info("pipeline: %d steps, max D angle %.3g", steps, flow.max_angle)
    return flow


def trajectory_difference(a, b):
    n = min(len(a.trajectory), len(b.trajectory))
    return float(np.max(np.abs(a.trajectory[:n] - b.trajectory[:n])))
