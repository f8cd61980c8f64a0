"""Semi-Riemannian examples: base metrics g(x), their Christoffel symbols and
the Lagrangians L1 = g(y1, y1) and L2 = g(z2, z2).

Metric entries are expressions, so every derivative of g is symbolic and all
helpers here evaluate on floats, longdouble arrays and jets alike.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from . import jetscalar as js
from .errors import SingularMetric
from .jets import Diffeo2, Jet2Point
from .lagrangian import BuiltinLagrangian


def _generic_inverse(m: list, n: int) -> list:
    """Inverse of a small matrix of generic scalars (cofactor formula)."""
    if n == 1:
        return [[js.divide(1.0, m[0][0])]]
    if n == 2:
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        inv = js.divide(1.0, det)
        return [[m[1][1] * inv, -m[0][1] * inv], [-m[1][0] * inv, m[0][0] * inv]]
    if n == 3:
        c = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != i]
                s = [k for k in range(3) if k != j]
                minor = m[r[0]][s[0]] * m[r[1]][s[1]] - m[r[0]][s[1]] * m[r[1]][s[0]]
                c[i][j] = minor if (i + j) % 2 == 0 else -minor
        det = m[0][0] * c[0][0] + m[0][1] * c[0][1] + m[0][2] * c[0][2]
        inv = js.divide(1.0, det)
        return [[c[j][i] * inv for j in range(3)] for i in range(3)]
    raise ValueError("generic inverse implemented for n <= 3")


@dataclass(frozen=True, eq=False)
class SemiRiemannianSpec:
    """A metric g_ij(x) given by one expression per entry."""

    name: str
    n: int
    entries: tuple
    box: dict = field(default_factory=dict)
    det_tol: float = 1e-12

    def __post_init__(self):
        n = self.n
        rows = []
        for row in self.entries:
            rows.append(tuple(ex.parse_expression(e, n) if isinstance(e, str) else e for e in row))
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"metric must be {n}x{n}")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"metric entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")
        for row in rows:
            for e in row:
                if any(kind != "x" for kind, _ in ex.variables(e)):
                    raise ValueError("metric entries may depend on x only")
        dg = [[[ex.differentiate(rows[i][j], "x", k + 1) for j in range(n)] for i in range(n)] for k in range(n)]
        ddg = [
            [[[ex.differentiate(dg[k][i][j], "x", m + 1) for j in range(n)] for i in range(n)] for k in range(n)]
            for m in range(n)
        ]
        object.__setattr__(self, "entries", tuple(rows))
        object.__setattr__(self, "_g", [[ex.compile_expr(e) for e in r] for r in rows])
        object.__setattr__(self, "_dg", [[[ex.compile_expr(e) for e in r] for r in blk] for blk in dg])
        object.__setattr__(
            self, "_ddg", [[[[ex.compile_expr(e) for e in r] for r in blk] for blk in b2] for b2 in ddg]
        )

    def metric(self, x) -> list:
        return [[f(x, (), ()) for f in row] for row in self._g]

    def metric_derivative(self, x) -> list:
        """dg[k][i][j] = ∂_k g_ij."""
        return [[[f(x, (), ()) for f in row] for row in blk] for blk in self._dg]

    def metric_second_derivative(self, x) -> list:
        """ddg[m][k][i][j] = ∂_m ∂_k g_ij."""
        return [[[[f(x, (), ()) for f in row] for row in blk] for blk in b2] for b2 in self._ddg]

    def christoffel_generic(self, x) -> list:
        """gamma[i][j][k] over generic scalars (used inside Lagrangians)."""
        n = self.n
        ginv = _generic_inverse(self.metric(x), n)
        dg = self.metric_derivative(x)
        first = [
            [[0.5 * (dg[j][m][k] + dg[k][m][j] - dg[m][j][k]) for k in range(n)] for j in range(n)]
            for m in range(n)
        ]
        return [
            [[sum(ginv[i][m] * first[m][j][k] for m in range(n)) for k in range(n)] for j in range(n)]
            for i in range(n)
        ]


# -- numeric evaluation at a point --------------------------------------------


def _metric_arrays(spec: SemiRiemannianSpec, x):
    x = [float(v) for v in np.asarray(x, dtype=float).reshape(-1)]
    g = np.array(spec.metric(x), dtype=float)
    det = np.linalg.det(g)
    scale = max(1.0, float(np.abs(g).max()) ** spec.n)
    if not np.isfinite(det) or abs(det) < spec.det_tol * scale:
        raise SingularMetric(f"metric {spec.name} is singular at x={x} (det={det:.3e})")
    dg = np.array(spec.metric_derivative(x), dtype=float)
    return x, g, np.linalg.inv(g), dg


def metric_at(spec: SemiRiemannianSpec, x) -> np.ndarray:
    return _metric_arrays(spec, x)[1]


def christoffels(spec: SemiRiemannianSpec, x) -> np.ndarray:
    """gamma[i, j, k] of the Levi-Civita connection at x."""
    _, g, ginv, dg = _metric_arrays(spec, x)
    # first[m, j, k] = 1/2 (∂_j g_mk + ∂_k g_mj − ∂_m g_jk)
    first = 0.5 * (np.einsum("jmk->mjk", dg) + np.einsum("kmj->mjk", dg) - dg)
    return np.einsum("im,mjk->ijk", ginv, first)


def christoffel_derivative(spec: SemiRiemannianSpec, x) -> np.ndarray:
    """dgamma[m, i, j, k] = ∂_m gamma^i_jk."""
    x, g, ginv, dg = _metric_arrays(spec, x)
    ddg = np.array(spec.metric_second_derivative(x), dtype=float)
    first = 0.5 * (np.einsum("jmk->mjk", dg) + np.einsum("kmj->mjk", dg) - dg)
    dfirst = 0.5 * (
        np.einsum("pjmk->pmjk", ddg) + np.einsum("pkmj->pmjk", ddg) - ddg
    )
    dginv = -np.einsum("ia,pab,bl->pil", ginv, dg, ginv)
    return np.einsum("pil,ljk->pijk", dginv, first) + np.einsum("il,pljk->pijk", ginv, dfirst)


def z2(spec: SemiRiemannianSpec, p: Jet2Point) -> np.ndarray:
    """Covariant second-order acceleration y2 + 1/2 gamma(y1, y1)."""
    gam = christoffels(spec, p.x)
    return p.y2 + 0.5 * np.einsum("ijk,j,k->i", gam, p.y1, p.y1)


def closed_form_G(spec: SemiRiemannianSpec, p: Jet2Point) -> np.ndarray:
    gam = christoffels(spec, p.x)
    dgam = christoffel_derivative(spec, p.x)
    y, w = p.y1, p.y2
    cubic = np.einsum("mijk,j,k,m->i", dgam, y, y, y) + np.einsum("ipj,pkm,j,k,m->i", gam, gam, y, y, y)
    return (0.5 * cubic + 3.0 * np.einsum("ijk,j,k->i", gam, y, w)) / 3.0


def closed_form_N1(spec: SemiRiemannianSpec, p: Jet2Point) -> np.ndarray:
    return np.einsum("ijk,k->ij", christoffels(spec, p.x), p.y1)


def lagrangian_L2(spec: SemiRiemannianSpec, name: str | None = None) -> BuiltinLagrangian:
    n = spec.n

    def L2(x, y1, y2):
        g = spec.metric(x)
        gam = spec.christoffel_generic(x)
        z = [
            y2[i] + 0.5 * sum(gam[i][j][k] * y1[j] * y1[k] for j in range(n) for k in range(n))
            for i in range(n)
        ]
        return sum(g[i][j] * z[i] * z[j] for i in range(n) for j in range(n))

    return BuiltinLagrangian(name or spec.name, n, L2, (), dict(spec.box), metric_spec=spec)


def lagrangian_L1(spec: SemiRiemannianSpec):
    """Energy g_ij(x) y1^i y1^j as a callable ``(x, y1) -> scalar``."""
    n = spec.n

    def L1(x, y1):
        g = spec.metric(x)
        return sum(g[i][j] * y1[i] * y1[j] for i in range(n) for j in range(n))

    return L1


def pullback_metric(spec: SemiRiemannianSpec, phi: Diffeo2) -> SemiRiemannianSpec:
    """Metric Dφᵀ g(φ(x)) Dφ in the old coordinates, built symbolically."""
    n = spec.n
    sub = {("x", i + 1): c for i, c in enumerate(phi.components)}
    g_phi = [[ex.substitute(e, sub) for e in row] for row in spec.entries]
    D = phi.jacobian_exprs
    entries = []
    for a in range(n):
        row = []
        for b in range(n):
            acc = ex.ZERO
            for i in range(n):
                for j in range(n):
                    acc = ex.add(acc, ex.mul(ex.mul(D[i][a], g_phi[i][j]), D[j][b]))
            row.append(acc)
        entries.append(row)
    # make the lower triangle structurally equal to the upper one
    for a in range(n):
        for b in range(a):
            entries[a][b] = entries[b][a]
    return SemiRiemannianSpec(f"pullback({spec.name})", n, tuple(tuple(r) for r in entries), {}, spec.det_tol)


# -- shipped metrics ------------------------------------------------------------


def euclidean(n: int) -> SemiRiemannianSpec:
    return SemiRiemannianSpec(
        "euclidean", n, tuple(tuple("1" if i == j else "0" for j in range(n)) for i in range(n))
    )


def conformal1d() -> SemiRiemannianSpec:
    return SemiRiemannianSpec("conformal1d", 1, (("exp(2*x_1)",),))


def diag_exp(n: int = 2) -> SemiRiemannianSpec:
    rows = tuple(
        tuple(("exp(2*x_1)" if i == 0 else "1") if i == j else "0" for j in range(n)) for i in range(n)
    )
    return SemiRiemannianSpec("diag-exp", n, rows)


def polar2d() -> SemiRiemannianSpec:
    return SemiRiemannianSpec(
        "polar2d", 2, (("1", "0"), ("0", "x_1^2")), {"x": ([0.5, -1.0], [3.0, 1.0])}
    )


METRICS = {
    "euclidean": euclidean,
    "conformal1d": conformal1d,
    "diag-exp": diag_exp,
    "polar2d": polar2d,
}


def metric_entries_to_source(spec: SemiRiemannianSpec) -> list:
    return [[ex.to_source(e) for e in row] for row in spec.entries]


def along_curve_derivative(spec: SemiRiemannianSpec, x: np.ndarray, xdot: np.ndarray, V: np.ndarray, Vdot: np.ndarray):
    """Levi-Civita derivative dV/dt + gamma(xdot, V) along a curve."""
    return Vdot + np.einsum("ijk,j,k->i", christoffels(spec, x), xdot, V)

