"""Per-point jet bundle shared by the geometric modules.

Everything at a point is derived from one Taylor expansion of L in all 3n
coordinates. With expansion order 4 the derived jets have these orders::

    dL      3    g, d_T(dL/dy2)    2    G, S     2
    N1      1    S(g)              1    S²(g)    0

which is exactly what the connection needs.
"""
from __future__ import annotations

import functools
from functools import cached_property

import numpy as np

from . import jetscalar as js
from .calculus import taylor
from .errors import DegenerateLagrangian
from .jets import Jet2Point
from .jetscalar import Jet

REGULARITY_TOL = 1e-10


def reciprocal_condition(g: np.ndarray) -> float:
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0 or not np.all(np.isfinite(s)):
        return 0.0
    return float(s[-1] / s[0])


class LocalJets:
    def __init__(self, L, p: Jet2Point, order: int = 4, rcond_tol: float = REGULARITY_TOL):
        if getattr(L, "n", p.n) != p.n:
            raise ValueError(f"Lagrangian has n={L.n} but the point has n={p.n}")
        self.L = L
        self.p = p
        self.n = p.n
        self.order = order
        self.rcond_tol = rcond_tol
        self.T = taylor(L, p, order)
        m = 3 * self.n
        self.coords = Jet.stack([Jet.variable(v, k, m, order) for k, v in enumerate(p.as_array())])

    # coordinate function jets
    @property
    def y1(self) -> Jet:
        return self.coords[self.n : 2 * self.n]

    @property
    def y2(self) -> Jet:
        return self.coords[2 * self.n :]

    @cached_property
    def dL(self) -> Jet:
        return Jet.stack([self.T.derivative(k) for k in range(3 * self.n)])

    @property
    def px(self) -> Jet:
        return self.dL[: self.n]

    @property
    def p1(self) -> Jet:
        """dL/dy1."""
        return self.dL[self.n : 2 * self.n]

    @property
    def p2(self) -> Jet:
        """dL/dy2."""
        return self.dL[2 * self.n :]

    @cached_property
    def g(self) -> Jet:
        n = self.n
        rows = [Jet.stack([self.p2[i].derivative(2 * n + j) for j in range(n)]) for i in range(n)]
        h = Jet.stack(rows) * 0.5
        return (h + h.T) * 0.5

    @cached_property
    def rcond(self) -> float:
        return reciprocal_condition(np.asarray(self.g.value))

    def require_regular(self, tol: float | None = None):
        tol = self.rcond_tol if tol is None else tol
        if not self.rcond > tol:
            raise DegenerateLagrangian(
                f"metric reciprocal condition {self.rcond:.3e} <= {tol:.1e} at {self.p}", self.rcond
            )

    @cached_property
    def ginv(self) -> Jet:
        self.require_regular()
        return js.inverse(self.g)

    def total_derivative(self, f: Jet) -> Jet:
        """Tulczyjew operator applied to a (possibly array) jet."""
        n = self.n
        out = None
        for k in range(n):
            term = self.y1[k] * f.derivative(k) + self.y2[k] * f.derivative(n + k) * 2.0
            out = term if out is None else out + term
        return out

    @cached_property
    def G(self) -> Jet:
        rhs = self.total_derivative(self.p2) - self.p1
        return js.matmul(self.ginv, rhs) * (1.0 / 6.0)

    def semispray(self, G: Jet | None = None) -> Jet:
        G = self.G if G is None else G
        return Jet.stack([*self.y1, *(self.y2 * 2.0), *(G * -3.0)])

    @cached_property
    def S(self) -> Jet:
        return self.semispray()

    def perturbed_G(self, eps: float) -> Jet:
        """G + eps (1 + y2): shifts both the value and the y2-derivatives of G."""
        return self.G + (self.y2 + 1.0) * eps

    @staticmethod
    def apply(S: Jet, f: Jet) -> Jet:
        """Derivative of ``f`` along the vector-field jet ``S``."""
        out = None
        for mu in range(S.shape[0]):
            term = S[mu] * f.derivative(mu)
            out = term if out is None else out + term
        return out


@functools.lru_cache(maxsize=512)
def local_jets(L, p: Jet2Point, order: int = 4, rcond_tol: float = REGULARITY_TOL) -> LocalJets:
    return LocalJets(L, p, order, rcond_tol)
