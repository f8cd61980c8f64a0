"""Second-order Lagrangians, their metric tensor and Cartan-Poincaré forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex
from .errors import DegenerateLagrangian
from .jets import CotangentVecT2M, Jet2Point, TangentVecT2M
from .jetscalar import Jet
from .local import REGULARITY_TOL, local_jets, reciprocal_condition

DEFAULT_BOX = {"x": (-1.0, 1.0), "y1": (-1.0, 1.0), "y2": (-1.0, 1.0)}


class LagrangianSpec:
    """A scalar function on T²M, callable on generic scalars.

    Instances are immutable and hash by identity, which lets per-point
    results be cached safely.
    """

    name: str
    n: int
    box: dict

    kind = "builtin"

    def __call__(self, x, y1, y2):
        raise NotImplementedError

    def value(self, p: Jet2Point) -> float:
        return float(self(list(p.x), list(p.y1), list(p.y2)))

    def sample_points(self, count: int, seed: int = 0, box: dict | None = None) -> list:
        """Reproducible uniform samples from the sampling box."""
        box = {**DEFAULT_BOX, **(self.box or {}), **(box or {})}
        rng = np.random.default_rng(seed)
        pts = []
        for _ in range(count):
            blocks = []
            for name in ("x", "y1", "y2"):
                lo, hi = box[name]
                lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.n,))
                hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.n,))
                blocks.append(rng.uniform(lo, hi))
            pts.append(Jet2Point(*blocks))
        return pts


@dataclass(frozen=True, eq=False)
class ExpressionLagrangian(LagrangianSpec):
    expr: ex.Node
    n: int
    name: str = "expression"
    box: dict = field(default_factory=dict)

    kind = "expression"

    def __post_init__(self):
        for kind, idx in ex.variables(self.expr):
            if idx > self.n:
                raise ex.VariableIndexError(f"{kind}_{idx} exceeds n={self.n}")
        object.__setattr__(self, "_f", ex.compile_expr(self.expr))

    @classmethod
    def parse(cls, src: str, n: int, name: str | None = None, box: dict | None = None, params: dict | None = None):
        return cls(ex.parse_expression(src, n, params), n, name or src, box or {})

    @property
    def source(self) -> str:
        return ex.to_source(self.expr)

    def __call__(self, x, y1, y2):
        return self._f(x, y1, y2)


@dataclass(frozen=True, eq=False)
class BuiltinLagrangian(LagrangianSpec):
    name: str
    n: int
    func: Callable
    params: tuple = ()
    box: dict = field(default_factory=dict)
    # semi-Riemannian spec this Lagrangian was built from, if any
    metric_spec: object = None

    def __call__(self, x, y1, y2):
        return self.func(x, y1, y2)


@dataclass(frozen=True, eq=False)
class PullbackLagrangian(LagrangianSpec):
    """L ∘ Φ where Φ is the map induced on T²M by a coordinate change."""

    base: LagrangianSpec
    diffeo: object
    box: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.base.n

    @property
    def name(self):
        return f"pullback({self.base.name})"

    def __call__(self, x, y1, y2):
        return self.base(*self.diffeo.map_jet(x, y1, y2))


@dataclass(frozen=True)
class Metric:
    g: np.ndarray
    ginv: np.ndarray | None = None
    rcond: float | None = None


@dataclass(frozen=True, eq=False)
class TwoFormT2M:
    """Skew 3n×3n component matrix ``omega(d_mu, d_nu)`` in the natural frame."""

    base: Jet2Point
    matrix: np.ndarray

    def __call__(self, v: TangentVecT2M, w: TangentVecT2M) -> float:
        return float(v.components() @ self.matrix @ w.components())

    def interior(self, v: TangentVecT2M) -> CotangentVecT2M:
        """i_v omega."""
        return CotangentVecT2M.from_components(self.base, v.components() @ self.matrix)

    def rank(self, tol: float = 1e-10) -> int:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.count_nonzero(s > tol))


def metric_tensor(L, p: Jet2Point) -> Metric:
    """g_ij = 1/2 ∂²L/∂y2^i∂y2^j (symmetrized)."""
    loc = local_jets(L, p)
    g = np.array(loc.g.value)
    return Metric(g, None, reciprocal_condition(g))


def check_regularity(L, p: Jet2Point, tol: float = REGULARITY_TOL) -> Metric:
    m = metric_tensor(L, p)
    if not m.rcond > tol:
        raise DegenerateLagrangian(
            f"metric reciprocal condition {m.rcond:.3e} <= {tol:.1e} at {p}", m.rcond
        )
    return Metric(m.g, np.linalg.inv(m.g), m.rcond)


def _cotangent(p, comps) -> CotangentVecT2M:
    return CotangentVecT2M.from_components(p, np.asarray(comps, dtype=float))


def differential(L, p: Jet2Point) -> CotangentVecT2M:
    return _cotangent(p, local_jets(L, p).dL.value)


def theta1(L, p: Jet2Point) -> CotangentVecT2M:
    """J*(dL) = ∂L/∂y1 dx + ∂L/∂y2 dy1."""
    loc = local_jets(L, p)
    return _cotangent(p, np.concatenate([loc.p1.value, loc.p2.value, np.zeros(p.n)]))


def theta2(L, p: Jet2Point) -> CotangentVecT2M:
    """(J*)²(dL) = ∂L/∂y2 dx."""
    loc = local_jets(L, p)
    return _cotangent(p, np.concatenate([loc.p2.value, np.zeros(2 * p.n)]))


def theta1_jet(loc) -> Jet:
    zero = loc.p2 * 0.0
    return Jet.stack([*loc.p1, *loc.p2, *zero])


def theta2_jet(loc) -> Jet:
    zero = loc.p2 * 0.0
    return Jet.stack([*loc.p2, *zero, *zero])


def exterior_derivative(theta: Jet) -> Jet:
    """Components ∂_mu θ_nu − ∂_nu θ_mu of d(theta) as a jet matrix."""
    m = theta.shape[0]
    grad = Jet.stack([Jet.stack([theta[nu].derivative(mu) for nu in range(m)]) for mu in range(m)])
    return grad - grad.T


def omega2(L, p: Jet2Point) -> TwoFormT2M:
    loc = local_jets(L, p)
    return TwoFormT2M(p, np.array(exterior_derivative(theta2_jet(loc)).value))


def omega1(L, p: Jet2Point) -> TwoFormT2M:
    loc = local_jets(L, p)
    return TwoFormT2M(p, np.array(exterior_derivative(theta1_jet(loc)).value))
