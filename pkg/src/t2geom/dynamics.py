"""Craig-Synge trajectories: the flow of the canonical semispray.

The third-order system x''' + 6 G(x, x', x''/2) = 0 is integrated as the
first-order system on T²M

    dx/dt = y1,   dy1/dt = 2 y2,   dy2/dt = −3 G(x, y1, y2)

with classical fixed-step RK4. Monitors are computed afterwards from the
samples (time derivatives by second-order finite differences), so they are
independent checks of the integration.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .calculus import batch_derivatives
from .errors import ConfigError, DegenerateLagrangian, StepError
from .jets import Jet2Point
from .local import REGULARITY_TOL, reciprocal_condition

MONITORS = ("craig_synge_residual", "energy_identity", "nabla2_xdot", "L1", "L2")


# -- semispray field, batched over states -----------------------------------


def semispray_G_batch(L, states: np.ndarray, rcond_tol: float = REGULARITY_TOL) -> np.ndarray:
    """G at each row of ``states`` (shape (Q, 3n)), from second partials of L."""
    states = np.atleast_2d(states)
    n = states.shape[1] // 3
    _, grad, hess = batch_derivatives(L, states)
    y1, y2 = states[:, n : 2 * n], states[:, 2 * n :]
    p1 = grad[:, n : 2 * n]
    X = hess[:, :n, 2 * n :]  # ∂²L/∂x^a∂y2^b
    C = hess[:, n : 2 * n, 2 * n :]  # ∂²L/∂y1^a∂y2^b
    g = 0.5 * hess[:, 2 * n :, 2 * n :]
    for k, gk in enumerate(g):
        rc = reciprocal_condition(gk)
        if not rc > rcond_tol:
            raise DegenerateLagrangian(f"metric reciprocal condition {rc:.3e} at state {states[k]}", rc)
    dT_p2 = np.einsum("qa,qab->qb", y1, X) + 2.0 * np.einsum("qa,qab->qb", y2, C)
    return np.linalg.solve(g, (dT_p2 - p1)[..., None])[..., 0] / 6.0


def semispray_field(L, rcond_tol: float = REGULARITY_TOL):
    """Right-hand side ``f(state) -> d state/dt`` of the semispray flow."""

    def f(state):
        n = len(state) // 3
        G = semispray_G_batch(L, state[None, :], rcond_tol)[0]
        return np.concatenate([state[n : 2 * n], 2.0 * state[2 * n :], -3.0 * G])

    return f


# -- trajectories -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    dt: float
    monitors: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def n(self) -> int:
        return self.states.shape[1] // 3

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.n]

    @property
    def y1(self) -> np.ndarray:
        return self.states[:, self.n : 2 * self.n]

    @property
    def y2(self) -> np.ndarray:
        return self.states[:, 2 * self.n :]

    def __len__(self):
        return len(self.t)

    def points(self) -> list:
        return [Jet2Point.from_array(s, self.n) for s in self.states]

    def with_monitors(self, **channels) -> "Trajectory":
        merged = dict(self.monitors)
        for name, values in channels.items():
            values = np.asarray(values, dtype=float)
            if values.shape != self.t.shape:
                raise ValueError(f"monitor {name} has shape {values.shape}, expected {self.t.shape}")
            merged[name] = values
        return replace(self, monitors=merged)

    def header(self) -> list:
        n = self.n
        cols = ["t"] + [f"{b}_{i + 1}" for b in ("x", "y1", "y2") for i in range(n)]
        return cols + list(self.monitors)

    def rows(self):
        cols = [self.t[:, None], self.states] + [v[:, None] for v in self.monitors.values()]
        return np.hstack(cols)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow(["%.17g" % v for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dt": self.dt,
            "columns": self.header(),
            "rows": self.rows().tolist(),
            "error": self.error,
        }


def integrate_craig_synge(L, p0: Jet2Point, t_span, dt: float, rcond_tol: float = REGULARITY_TOL) -> Trajectory:
    """Fixed-step RK4 integration of the semispray flow.

    On a mid-flight failure the raised DegenerateLagrangian or StepError
    carries the partial trajectory (with ``error`` set) as ``.trajectory``.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    steps = int(round((t1 - t0) / dt))
    if steps < 1 or abs(steps * dt - (t1 - t0)) > 1e-9 * max(1.0, abs(t1 - t0)):
        raise ValueError("t_span length must be a whole number of steps")
    f = semispray_field(L, rcond_tol)
    state = p0.as_array().astype(float)
    f(state)  # regularity at the initial point is a precondition, not a runtime failure
    out = np.empty((steps + 1, len(state)))
    out[0] = state
    for k in range(steps):
        try:
            k1 = f(state)
            k2 = f(state + 0.5 * dt * k1)
            k3 = f(state + 0.5 * dt * k2)
            k4 = f(state + dt * k3)
            state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state)):
                raise StepError(f"nonfinite state at t={t0 + (k + 1) * dt}")
        except (DegenerateLagrangian, StepError, FloatingPointError, OverflowError) as exc:
            err = exc if isinstance(exc, (DegenerateLagrangian, StepError)) else StepError(str(exc))
            partial = Trajectory(t0 + dt * np.arange(k + 1), out[: k + 1].copy(), dt, {}, str(err))
            err.trajectory = partial
            raise err from (None if err is exc else exc)
        out[k + 1] = state
    return Trajectory(t0 + dt * np.arange(steps + 1), out, dt)


# -- monitors -----------------------------------------------------------------


def _ddt(values: np.ndarray, dt: float) -> np.ndarray:
    return np.gradient(values, dt, axis=0, edge_order=2)


def craig_synge_residual(L, traj: Trajectory) -> np.ndarray:
    """max_i |∂L/∂y1_i − d/dt ∂L/∂y2_i| per sample (time derivative by differences)."""
    n = traj.n
    _, grad, _ = batch_derivatives(L, traj.states)
    return np.abs(grad[:, n : 2 * n] - _ddt(grad[:, 2 * n :], traj.dt)).max(axis=1)


def sl2_along(L, traj: Trajectory) -> np.ndarray:
    """Pointwise |S(∂L/∂y2) − ∂L/∂y1| along the samples."""
    n = traj.n
    _, grad, hess = batch_derivatives(L, traj.states)
    G = semispray_G_batch(L, traj.states)
    S = np.hstack([traj.y1, 2.0 * traj.y2, -3.0 * G])
    Sp2 = np.einsum("qm,qmb->qb", S, hess[:, :, 2 * n :])
    return np.abs(Sp2 - grad[:, n : 2 * n]).max(axis=1)


def _metric_spec(L):
    spec = getattr(L, "metric_spec", None)
    if spec is None:
        raise ConfigError(f"monitor needs a semi-Riemannian Lagrangian; {getattr(L, 'name', L)!r} is not one")
    return spec


def _stack_nested(nested, depth: int, Q: int) -> np.ndarray:
    """Nested lists (``depth`` levels) of scalars/arrays -> array with samples first."""
    if depth == 0:
        return np.broadcast_to(np.asarray(nested, dtype=float), (Q,))
    return np.stack([_stack_nested(v, depth - 1, Q) for v in nested], axis=1)


def _metric_along(spec, x: np.ndarray):
    """g[q] and gamma[q] along samples, evaluated with vectorized expressions."""
    cols = [x[:, i] for i in range(spec.n)]
    Q = len(x)
    return _stack_nested(spec.metric(cols), 2, Q), _stack_nested(spec.christoffel_generic(cols), 3, Q)


def covariant_velocity(spec, traj: Trajectory):
    """∇ẋ = dẋ/dt + γ(ẋ, ẋ) = 2 y2 + γ(y1, y1) = 2 z2, pointwise."""
    _, gam = _metric_along(spec, traj.x)
    return 2.0 * traj.y2 + np.einsum("qijk,qj,qk->qi", gam, traj.y1, traj.y1)


def nabla2_xdot_vector(spec, traj: Trajectory) -> np.ndarray:
    """(∇∘∇)ẋ along the curve with the Levi-Civita derivative."""
    _, gam = _metric_along(spec, traj.x)
    W = covariant_velocity(spec, traj)
    return _ddt(W, traj.dt) + np.einsum("qijk,qj,qk->qi", gam, traj.y1, W)


def nabla2_xdot(L, traj: Trajectory) -> np.ndarray:
    return craig_synge_is_nabla2_zero(traj, _metric_spec(L))


def energy_identity(L, traj: Trajectory) -> np.ndarray:
    return monitor_energy_identity(traj, _metric_spec(L))


def craig_synge_is_nabla2_zero(traj: Trajectory, spec) -> np.ndarray:
    """max_i |(∇∘∇ẋ)ⁱ| per sample."""
    return np.abs(nabla2_xdot_vector(spec, traj)).max(axis=1)


def monitor_energy_identity(traj: Trajectory, spec) -> np.ndarray:
    """d²/dt² g(ẋ,ẋ) − 2 g(∇ẋ,∇ẋ) − 2 g(ẋ, ∇∇ẋ) per sample."""
    g, _ = _metric_along(spec, traj.x)
    v = traj.y1
    W = covariant_velocity(spec, traj)
    A = nabla2_xdot_vector(spec, traj)
    norm2 = np.einsum("qij,qi,qj->q", g, v, v)
    d2 = _ddt(_ddt(norm2, traj.dt), traj.dt)
    return d2 - 2.0 * np.einsum("qij,qi,qj->q", g, W, W) - 2.0 * np.einsum("qij,qi,qj->q", g, v, A)


def L1_along(L, traj: Trajectory) -> np.ndarray:
    g, _ = _metric_along(_metric_spec(L), traj.x)
    return np.einsum("qij,qi,qj->q", g, traj.y1, traj.y1)


def L2_along(L, traj: Trajectory) -> np.ndarray:
    return batch_derivatives(L, traj.states)[0]


_MONITOR_FUNCS = {
    "craig_synge_residual": craig_synge_residual,
    "energy_identity": energy_identity,
    "nabla2_xdot": nabla2_xdot,
    "L1": L1_along,
    "L2": L2_along,
}


def attach_monitors(L, traj: Trajectory, names) -> Trajectory:
    channels = {}
    for name in names:
        if name not in _MONITOR_FUNCS:
            raise ConfigError(f"unknown monitor {name!r}; known: {', '.join(MONITORS)}")
        channels[name] = _MONITOR_FUNCS[name](L, traj)
    return traj.with_monitors(**channels)


def geodesic_initial_point(spec, x, y1) -> Jet2Point:
    """Initial 2-jet with y2 = −½ γ(y1, y1), i.e. z2 = 0."""
    from .semiriemann import christoffels

    x = np.asarray(x, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = -0.5 * np.einsum("ijk,j,k->i", christoffels(spec, x), y1, y1)
    return Jet2Point(x, y1, y2)


# -- variational check -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VariationField:
    """V(t) = sum_k c_k sin(k π t) (+ t·b); vanishes at both ends when b = 0."""

    coeffs: np.ndarray  # shape (K, n)
    endpoint: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.atleast_2d(np.asarray(self.coeffs, dtype=float)))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, t, deriv: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.arange(1, len(self.coeffs) + 1) * np.pi
        arg = np.outer(t, k)
        basis = [np.sin, np.cos, lambda a: -np.sin(a), lambda a: -np.cos(a)][deriv % 4](arg) * k**deriv
        out = basis @ self.coeffs
        if self.endpoint is not None:
            b = np.asarray(self.endpoint, dtype=float)
            if deriv == 0:
                out = out + np.outer(t, b)
            elif deriv == 1:
                out = out + b
        return out


@dataclass(frozen=True, eq=False)
class PolynomialCurve:
    """x(t) = sum_k a_k t^k with ``coeffs`` of shape (degree+1, n)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.atleast_2d(np.asarray(self.coeffs, dtype=float)))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, t, deriv: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack(
            [np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(c, deriv) if deriv else c)
             for c in self.coeffs.T],
            axis=-1,
        )


@dataclass(frozen=True, eq=False)
class SolutionCurve:
    """Dense Craig-Synge solution on [t0, t1] from a high-order adaptive integrator."""

    L: object
    sol: object

    @property
    def n(self) -> int:
        return self.L.n

    def state(self, t) -> np.ndarray:
        return np.atleast_2d(self.sol.sol(np.asarray(t, dtype=float)).T)

    def __call__(self, t, deriv: int = 0) -> np.ndarray:
        n = self.n
        s = self.state(t)
        if deriv == 0:
            return s[:, :n]
        if deriv == 1:
            return s[:, n : 2 * n]
        if deriv == 2:
            return 2.0 * s[:, 2 * n :]
        if deriv == 3:
            return -6.0 * semispray_G_batch(self.L, s)
        raise ValueError("only derivatives up to order 3 are available")


def solution_curve(L, p0: Jet2Point, t_span=(0.0, 1.0), rtol: float = 1e-12, atol: float = 1e-12) -> SolutionCurve:
    f = semispray_field(L)
    sol = solve_ivp(lambda t, s: f(s), t_span, p0.as_array(), method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise StepError(sol.message)
    return SolutionCurve(L, sol)


def gauss_nodes(quad_n: int, panels: int | None = None, a: float = 0.0, b: float = 1.0):
    """Composite Gauss-Legendre nodes and weights with ``quad_n`` nodes in total."""
    if panels is None:
        panels = max(1, quad_n // 8)
    per = quad_n // panels
    if per * panels != quad_n:
        raise ValueError("quad_n must be divisible by the number of panels")
    x, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(a, b, panels + 1)
    nodes = np.concatenate([0.5 * (hi - lo) * x + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _lift(curve, t):
    return curve(t, 0), curve(t, 1), 0.5 * curve(t, 2)


def action(L, curve, V, eps: float, nodes, weights) -> float:
    """I(c_eps) with only the velocity-type components varied."""
    x, y1, y2 = _lift(curve, nodes)
    y1 = y1 + eps * V(nodes, 0)
    y2 = y2 + eps * V(nodes, 1)
    n = x.shape[1]
    vals = L([x[:, i] for i in range(n)], [y1[:, i] for i in range(n)], [y2[:, i] for i in range(n)])
    return float(np.broadcast_to(vals, nodes.shape) @ weights)


def craig_synge_bracket(L, curve, t) -> np.ndarray:
    """∂L/∂y1 − d/dt(∂L/∂y2) along the holonomic lift, by the chain rule."""
    x, y1, y2 = _lift(curve, t)
    n = x.shape[1]
    _, grad, hess = batch_derivatives(L, np.hstack([x, y1, y2]))
    velocity = np.hstack([curve(t, 1), curve(t, 2), 0.5 * curve(t, 3)])
    dp2 = np.einsum("qm,qmb->qb", velocity, hess[:, :, 2 * n :])
    return grad[:, n : 2 * n] - dp2


def boundary_term(L, curve, V, t0: float = 0.0, t1: float = 1.0) -> float:
    """(∂L/∂y2 · V) evaluated between the endpoints."""
    t = np.array([t0, t1])
    x, y1, y2 = _lift(curve, t)
    _, grad, _ = batch_derivatives(L, np.hstack([x, y1, y2]))
    n = x.shape[1]
    vals = np.einsum("qi,qi->q", grad[:, 2 * n :], V(t, 0))
    return float(vals[1] - vals[0])


def action_variation_check(L, curve, V, quad_n: int = 64, eps: float = 1e-5):
    """(lhs, rhs): centered difference of the action and the bracket integral."""
    nodes, weights = gauss_nodes(quad_n)
    lhs = (action(L, curve, V, eps, nodes, weights) - action(L, curve, V, -eps, nodes, weights)) / (2.0 * eps)
    bracket = craig_synge_bracket(L, curve, nodes)
    rhs = float(np.einsum("qi,qi,q->", bracket, V(nodes, 0), weights))
    return lhs, rhs


# -- convergence ------------------------------------------------------------------


def endpoint(L, p0: Jet2Point, t1: float, dt: float) -> np.ndarray:
    return integrate_craig_synge(L, p0, (0.0, t1), dt).states[-1]


def rk4_order(L, p0: Jet2Point, t1: float = 1.0, dts=(1e-2, 5e-3, 2.5e-3), reference_dt: float | None = None):
    """Observed convergence orders log2(e(h)/e(h/2)) of the endpoint.

    With ``reference_dt`` errors are measured against a finer run; without it
    successive differences e(h) = |y(h) − y(h/2)| are used, which needs one
    extra (coarser) level and no reference.
    """
    ends = [endpoint(L, p0, t1, dt) for dt in dts]
    if reference_dt is not None:
        ref = endpoint(L, p0, t1, reference_dt)
        errs = [float(np.abs(e - ref).max()) for e in ends]
    else:
        errs = [float(np.abs(a - b).max()) for a, b in zip(ends, ends[1:])]
    orders = [float(np.log2(a / b)) for a, b in zip(errs, errs[1:])]
    return orders, errs
