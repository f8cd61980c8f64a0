"""Coordinates on T²M and the canonical structures living there.

A point of T²M is stored as three n-vectors ``(x, y1, y2)`` where
``y1 = dx/dt`` and ``y2 = (1/2) d²x/dt²`` for a curve through ``x``. Tangent
and cotangent vectors carry their components in the natural frame
``(d/dx, d/dy1, d/dy2)`` and coframe ``(dx, dy1, dy2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import SingularJacobian


def _vec(v) -> np.ndarray:
    a = np.array(v, dtype=float).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Jet2Point:
    x: np.ndarray
    y1: np.ndarray
    y2: np.ndarray

    def __post_init__(self):
        x, y1, y2 = _vec(self.x), _vec(self.y1), _vec(self.y2)
        if not (len(x) == len(y1) == len(y2)) or len(x) < 1:
            raise ValueError("x, y1, y2 must be nonempty with equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
            raise ValueError("point components must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "y2", y2)

    @property
    def n(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y1, self.y2])

    @classmethod
    def from_array(cls, arr, n: int | None = None) -> "Jet2Point":
        arr = np.asarray(arr, dtype=float).reshape(-1)
        if n is None:
            if len(arr) % 3:
                raise ValueError("length must be a multiple of 3")
            n = len(arr) // 3
        if len(arr) != 3 * n:
            raise ValueError(f"expected {3 * n} coordinates, got {len(arr)}")
        return cls(arr[:n], arr[n : 2 * n], arr[2 * n :])

    def key(self) -> tuple:
        return tuple(self.as_array().tolist())

    def __eq__(self, other):
        return isinstance(other, Jet2Point) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Jet2Point(x={self.x.tolist()}, y1={self.y1.tolist()}, y2={self.y2.tolist()})"


@dataclass(frozen=True, eq=False)
class TangentVecT2M:
    base: Jet2Point
    cx: np.ndarray
    cy1: np.ndarray
    cy2: np.ndarray

    def __post_init__(self):
        for name in ("cx", "cy1", "cy2"):
            v = _vec(getattr(self, name))
            if len(v) != self.base.n:
                raise ValueError(f"{name} has length {len(v)}, expected {self.base.n}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def components(self) -> np.ndarray:
        return np.concatenate([self.cx, self.cy1, self.cy2])

    @classmethod
    def from_components(cls, base: Jet2Point, comps) -> "TangentVecT2M":
        n = base.n
        comps = np.asarray(comps, dtype=float)
        return cls(base, comps[:n], comps[n : 2 * n], comps[2 * n :])

    def __repr__(self):
        return f"TangentVecT2M(cx={self.cx.tolist()}, cy1={self.cy1.tolist()}, cy2={self.cy2.tolist()})"


@dataclass(frozen=True, eq=False)
class CotangentVecT2M:
    base: Jet2Point
    ax: np.ndarray
    ay1: np.ndarray
    ay2: np.ndarray

    def __post_init__(self):
        for name in ("ax", "ay1", "ay2"):
            v = _vec(getattr(self, name))
            if len(v) != self.base.n:
                raise ValueError(f"{name} has length {len(v)}, expected {self.base.n}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def components(self) -> np.ndarray:
        return np.concatenate([self.ax, self.ay1, self.ay2])

    @classmethod
    def from_components(cls, base: Jet2Point, comps) -> "CotangentVecT2M":
        n = base.n
        comps = np.asarray(comps, dtype=float)
        return cls(base, comps[:n], comps[n : 2 * n], comps[2 * n :])

    def __call__(self, v: TangentVecT2M) -> float:
        return float(self.components() @ v.components())

    def __repr__(self):
        return f"CotangentVecT2M(ax={self.ax.tolist()}, ay1={self.ay1.tolist()}, ay2={self.ay2.tolist()})"


def apply_J(v: TangentVecT2M) -> TangentVecT2M:
    """Vertical endomorphism: (cx, cy1, cy2) -> (0, cx, cy1)."""
    return TangentVecT2M(v.base, np.zeros(v.base.n), v.cx, v.cy1)


def apply_Jstar(w: CotangentVecT2M) -> CotangentVecT2M:
    """Adjoint of J: (ax, ay1, ay2) -> (ay1, ay2, 0)."""
    return CotangentVecT2M(w.base, w.ay1, w.ay2, np.zeros(w.base.n))


def J_matrix(n: int) -> np.ndarray:
    """Matrix of J acting on natural-frame component columns."""
    J = np.zeros((3 * n, 3 * n))
    J[n : 2 * n, :n] = np.eye(n)
    J[2 * n :, n : 2 * n] = np.eye(n)
    return J


def liouville_C2(p: Jet2Point) -> TangentVecT2M:
    return TangentVecT2M(p, np.zeros(p.n), p.y1, 2.0 * p.y2)


def liouville_C1(p: Jet2Point) -> TangentVecT2M:
    return TangentVecT2M(p, np.zeros(p.n), np.zeros(p.n), p.y1)


class Diffeo2:
    """Coordinate change x -> phi(x) given by expressions.

    First and second derivatives are obtained by symbolic differentiation of
    the component expressions, so they evaluate on floats and on jets alike.
    """

    def __init__(self, components: Sequence, n: int | None = None, det_tol: float = 1e-12):
        nodes = []
        for c in components:
            if isinstance(c, str):
                if n is None:
                    n = len(components)
                c = ex.parse_expression(c, n)
            nodes.append(c)
        self.n = len(nodes)
        if n is not None and n != self.n:
            raise ValueError("a diffeomorphism must map R^n to R^n")
        self.det_tol = det_tol
        self.components = tuple(nodes)
        self.jacobian_exprs = tuple(
            tuple(ex.differentiate(c, "x", j + 1) for j in range(self.n)) for c in nodes
        )
        self.hessian_exprs = tuple(
            tuple(tuple(ex.differentiate(dj, "x", k + 1) for k in range(self.n)) for dj in row)
            for row in self.jacobian_exprs
        )
        self._f = [ex.compile_expr(c) for c in self.components]
        self._df = [[ex.compile_expr(c) for c in row] for row in self.jacobian_exprs]
        self._d2f = [[[ex.compile_expr(c) for c in r2] for r2 in row] for row in self.hessian_exprs]

    @classmethod
    def identity(cls, n: int) -> "Diffeo2":
        return cls([f"x_{i + 1}" for i in range(n)], n)

    def __call__(self, x):
        return [f(x, (), ()) for f in self._f]

    def jacobian(self, x):
        return [[f(x, (), ()) for f in row] for row in self._df]

    def hessian(self, x):
        return [[[f(x, (), ()) for f in r2] for r2 in row] for row in self._d2f]

    def check_jacobian(self, x) -> np.ndarray:
        D = np.array(self.jacobian(list(np.asarray(x, dtype=float))), dtype=float)
        det = float(np.linalg.det(D))
        scale = max(1.0, float(np.abs(D).max()) ** self.n)
        if not np.isfinite(det) or abs(det) < self.det_tol * scale:
            raise SingularJacobian(f"Jacobian determinant {det:.3e} is singular at x={list(x)}", det)
        return D

    def compose(self, inner: "Diffeo2") -> "Diffeo2":
        """self ∘ inner."""
        mapping = {("x", i + 1): c for i, c in enumerate(inner.components)}
        return Diffeo2([ex.substitute(c, mapping) for c in self.components], self.n)

    def map_jet(self, x, y1, y2):
        """Induced map on 2-jets, over generic scalars."""
        n = self.n
        X = self(x)
        D = self.jacobian(x)
        H = self.hessian(x)
        Y1 = [sum(D[i][j] * y1[j] for j in range(n)) for i in range(n)]
        Y2 = [
            sum(D[i][j] * y2[j] for j in range(n))
            + 0.5 * sum(H[i][j][k] * y1[j] * y1[k] for j in range(n) for k in range(n))
            for i in range(n)
        ]
        return X, Y1, Y2


def jet_transform(phi: Diffeo2, p: Jet2Point) -> Jet2Point:
    """Image of a 2-jet under the coordinate change ``phi``."""
    if phi.n != p.n:
        raise ValueError("dimension mismatch")
    phi.check_jacobian(p.x)
    X, Y1, Y2 = phi.map_jet(list(p.x), list(p.y1), list(p.y2))
    return Jet2Point(np.array(X, dtype=float), np.array(Y1, dtype=float), np.array(Y2, dtype=float))
