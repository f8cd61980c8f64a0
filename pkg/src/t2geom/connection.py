"""The nonlinear connection singled out by the presymplectic form and ∇²g = 0.

Matrix conventions: ``N1[i, j]`` is N⁽¹⁾ⁱ_j (upper index = row = fiber
index); lowered coefficients are ``g @ N``. Frames act on natural-frame
component columns, so a bilinear form with natural matrix ``B`` has adapted
matrix ``F.T @ B @ F``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .calculus import seed
from .jets import Jet2Point
from .jetscalar import Jet
from .lagrangian import exterior_derivative, theta2_jet
from .local import LocalJets, local_jets


def _arr(j: Jet) -> np.ndarray:
    return np.array(j.value, dtype=float)


@dataclass(frozen=True, eq=False)
class ConnectionData:
    base: Jet2Point
    g: np.ndarray
    ginv: np.ndarray
    G: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    Sg: np.ndarray
    S2g: np.ndarray
    C: np.ndarray  # C[a, b] = ∂²L/∂y1^a∂y2^b
    X: np.ndarray  # X[a, b] = ∂²L/∂x^a∂y2^b

    @property
    def n(self) -> int:
        return self.base.n

    @cached_property
    def nabla_g(self) -> np.ndarray:
        return nabla_g(self)

    @cached_property
    def nabla2_g(self) -> np.ndarray:
        return nabla2_g(self)


def _second_blocks(loc: LocalJets):
    n = loc.n
    p2 = loc.p2
    C = np.array([[float(p2[b].derivative(n + a).value) for b in range(n)] for a in range(n)])
    X = np.array([[float(p2[b].derivative(a).value) for b in range(n)] for a in range(n)])
    return C, X


def n1_jet(loc: LocalJets) -> Jet:
    n = loc.n
    return Jet.stack([Jet.stack([loc.G[i].derivative(2 * n + j) for j in range(n)]) for i in range(n)])


def n1_coeffs(L, p: Jet2Point) -> np.ndarray:
    """N⁽¹⁾ⁱ_j = ∂Gⁱ/∂y2ʲ."""
    return _arr(n1_jet(local_jets(L, p)))


def _Sg(loc: LocalJets):
    Sg = LocalJets.apply(loc.S, loc.g)
    S2g = LocalJets.apply(loc.S, Sg)
    return _arr(Sg), _arr(S2g)


def n1_lowered_formula(g, Sg, C) -> np.ndarray:
    """N⁽¹⁾_ij = S(g_ij)/3 + L_{y2i y1j}/3 − L_{y2j y1i}/6, from condition 1."""
    return Sg / 3.0 + C.T / 3.0 - C / 6.0


def n1_from_condition(L, p: Jet2Point) -> np.ndarray:
    """Independent route to N⁽¹⁾: the lowered formula raised with g⁻¹."""
    loc = local_jets(L, p)
    loc.require_regular()
    Sg, _ = _Sg(loc)
    C, _ = _second_blocks(loc)
    g = _arr(loc.g)
    return np.linalg.solve(g, n1_lowered_formula(g, Sg, C))


def n2_parts(g, Sg, S2g, C, X, N1):
    """Right-hand sides A = 2(N2 + N2ᵀ) and B = 2(N2 − N2ᵀ) (lowered)."""
    SgN = Sg @ N1
    A = S2g - 2.0 * SgN - 2.0 * SgN.T + 2.0 * N1.T @ g @ N1
    NC = N1.T @ C
    B = X.T - X - NC.T + NC
    return A, B


def n2_coeffs(L, p: Jet2Point, N1: np.ndarray | None = None) -> np.ndarray:
    loc = local_jets(L, p)
    N1 = n1_coeffs(L, p) if N1 is None else np.asarray(N1, dtype=float)
    g = _arr(loc.g)
    Sg, S2g = _Sg(loc)
    C, X = _second_blocks(loc)
    A, B = n2_parts(g, Sg, S2g, C, X, N1)
    return np.linalg.solve(g, (A + B) / 4.0)


def connection(L, p: Jet2Point, perturb: float = 0.0) -> ConnectionData:
    """All connection data at ``p``; ``perturb`` adds a constant to every N⁽²⁾ entry."""
    loc = local_jets(L, p)
    loc.require_regular()
    n = p.n
    g = _arr(loc.g)
    ginv = _arr(loc.ginv)
    N1 = _arr(n1_jet(loc))
    Sg, S2g = _Sg(loc)
    C, X = _second_blocks(loc)
    A, B = n2_parts(g, Sg, S2g, C, X, N1)
    N2 = np.linalg.solve(g, (A + B) / 4.0)
    if perturb:
        N2 = N2 + perturb * np.ones((n, n))
    return ConnectionData(
        base=p, g=g, ginv=ginv, G=_arr(loc.G), N1=N1, N2=N2, M1=N1.copy(), M2=N2 + N1 @ N1,
        Sg=Sg, S2g=S2g, C=C, X=X,
    )


# -- adapted frame ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """Columns of ``frame`` are δ/δx, δ/δy1, ∂/∂y2; rows of ``coframe`` are dx, δy1, δy2."""

    frame: np.ndarray
    coframe: np.ndarray

    @property
    def n(self) -> int:
        return self.frame.shape[0] // 3


def adapted_frame(conn: ConnectionData) -> AdaptedFrame:
    n = conn.n
    I, Z = np.eye(n), np.zeros((n, n))
    F = np.block([[I, Z, Z], [-conn.N1, I, Z], [-conn.N2, -conn.N1, I]])
    coF = np.block([[I, Z, Z], [conn.M1, I, Z], [conn.M2, conn.M1, I]])
    return AdaptedFrame(F, coF)


def projectors(frame: AdaptedFrame):
    """(h, v1, v2) onto span δ/δx, span δ/δy1 and span ∂/∂y2."""
    n = frame.n
    out = []
    for k in range(3):
        D = np.zeros((3 * n, 3 * n))
        D[k * n : (k + 1) * n, k * n : (k + 1) * n] = np.eye(n)
        out.append(frame.frame @ D @ frame.coframe)
    return tuple(out)


def to_adapted(B: np.ndarray, frame: AdaptedFrame) -> np.ndarray:
    """Matrix of a bilinear form with respect to the adapted frame."""
    return frame.frame.T @ B @ frame.frame


# -- dynamical covariant derivatives -----------------------------------------


def _vector_field_jet(Xf, p: Jet2Point, order: int = 2) -> Jet:
    x, y1, y2, _ = seed(p, order)
    return Jet.coerce_array(Xf(x, y1, y2), 3 * p.n, order)


def _field_derivatives(L, Xf, p: Jet2Point):
    loc = local_jets(L, p)
    XT = _vector_field_jet(Xf, p)
    SX = LocalJets.apply(loc.S, XT)
    S2X = LocalJets.apply(loc.S, SX)
    return _arr(XT), _arr(SX), _arr(S2X)


def nabla1(L, Xf, p: Jet2Point, conn: ConnectionData | None = None) -> np.ndarray:
    """∇X = S(X) + M⁽¹⁾X for a d-vector field ``Xf(x, y1, y2) -> n scalars``."""
    conn = connection(L, p) if conn is None else conn
    X, SX, _ = _field_derivatives(L, Xf, p)
    return SX + conn.M1 @ X


def nabla2(L, Xf, p: Jet2Point, conn: ConnectionData | None = None) -> np.ndarray:
    """∇²X = S²(X) + 2M⁽¹⁾S(X) + 2M⁽²⁾X."""
    conn = connection(L, p) if conn is None else conn
    X, SX, S2X = _field_derivatives(L, Xf, p)
    return S2X + 2.0 * conn.M1 @ SX + 2.0 * conn.M2 @ X


def complete_lift(L, Xf, p: Jet2Point, conn: ConnectionData | None = None):
    """Xᶜ as natural components (X, S X, S²X/2) and as adapted ones (X, ∇X, ∇²X/2)."""
    conn = connection(L, p) if conn is None else conn
    X, SX, S2X = _field_derivatives(L, Xf, p)
    natural = np.concatenate([X, SX, 0.5 * S2X])
    adapted = np.concatenate([X, SX + conn.M1 @ X, 0.5 * (S2X + 2.0 * conn.M1 @ SX + 2.0 * conn.M2 @ X)])
    return natural, adapted


def nabla_g(conn: ConnectionData) -> np.ndarray:
    """S(g_ij) − N^k_i g_kj − N^k_j g_ik."""
    g, N1 = conn.g, conn.N1
    return conn.Sg - N1.T @ g - g @ N1


def nabla2_g(conn: ConnectionData) -> np.ndarray:
    g, N1, N2 = conn.g, conn.N1, conn.N2
    return (
        conn.S2g
        - 2.0 * N1.T @ conn.Sg
        - 2.0 * conn.Sg @ N1
        - 2.0 * N2.T @ g
        - 2.0 * g @ N2
        + 2.0 * N1.T @ g @ N1
    )


def _metric_blocks(g, a, b) -> np.ndarray:
    return np.block([[b, a, g], [a, g, np.zeros_like(g)], [g, np.zeros_like(g), np.zeros_like(g)]])


def gc_metric(conn: ConnectionData) -> np.ndarray:
    """Complete lift of g in the natural coframe."""
    return _metric_blocks(conn.g, conn.Sg, 0.5 * conn.S2g)


def gc_adapted_expected(conn: ConnectionData) -> np.ndarray:
    """The same metric written with ∇g and ∇²g in the adapted coframe."""
    return _metric_blocks(conn.g, conn.nabla_g, 0.5 * conn.nabla2_g)


# -- the presymplectic form in the adapted frame ------------------------------


def omega2_matrix(L, p: Jet2Point) -> np.ndarray:
    return _arr(exterior_derivative(theta2_jet(local_jets(L, p))))


def adapted_omega_expected(conn: ConnectionData) -> np.ndarray:
    """ω²(δ/δx_i, δ/δy1_j) = 2∇g_ij, ω²(∂/∂y2_j, δ/δx_i) = 2g_ij, other blocks 0."""
    n = conn.n
    W = np.zeros((3 * n, 3 * n))
    ng = conn.nabla_g
    W[:n, n : 2 * n] = 2.0 * ng
    W[n : 2 * n, :n] = -2.0 * ng.T
    W[2 * n :, :n] = 2.0 * conn.g.T
    W[:n, 2 * n :] = -2.0 * conn.g
    return W


def delta_y1_p2(conn: ConnectionData) -> np.ndarray:
    """(δ/δy1ⁱ)(∂L/∂y2ʲ); symmetric once N⁽¹⁾ is the right one."""
    return conn.C - 2.0 * conn.N1.T @ conn.g


def connection_condition_residuals(L, p: Jet2Point, conn: ConnectionData | None = None, perturb: float = 0.0) -> dict:
    """Residuals of the two defining connection conditions and of the adapted form of ω²."""
    conn = connection(L, p, perturb) if conn is None else conn
    n = p.n
    fr = adapted_frame(conn)
    Wad = to_adapted(omega2_matrix(L, p), fr)
    Gad = to_adapted(gc_metric(conn), fr)
    x, y1, y2 = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    cond1 = np.abs(Wad[x, y1] - 2.0 * Gad[x, y1]).max()
    dh = max(np.abs(Wad[x, x]).max(), np.abs(Wad[y1, y1]).max(), np.abs(Wad[y2, y2]).max())
    return {
        "thm2.cond1": float(cond1),
        "thm2.nabla2g": float(np.abs(conn.nabla2_g).max()),
        "thm2.dhtheta": float(dh),
        "thm2.adapted": float(np.abs(Wad - adapted_omega_expected(conn)).max()),
    }


def connection_identities(L, p: Jet2Point, conn: ConnectionData | None = None) -> dict:
    """Consistency checks among the coefficient formulas."""
    conn = connection(L, p) if conn is None else conn
    g, N1, C, Sg = conn.g, conn.N1, conn.C, conn.Sg
    low = g @ N1
    low2 = g @ conn.N2
    A, B = n2_parts(g, Sg, conn.S2g, C, conn.X, N1)
    sym = delta_y1_p2(conn)
    return {
        "prop2.n1": float(np.abs(N1 - np.linalg.solve(g, n1_lowered_formula(g, Sg, C))).max()),
        "n1.2n4n": float(np.abs(2.0 * low + 4.0 * low.T - 2.0 * Sg - C).max()),
        "n1.skew": float(np.abs(2.0 * (low - low.T) - (C.T - C)).max()),
        "n1.symmetry": float(np.abs(sym - sym.T).max()),
        "n2.sym": float(np.abs(2.0 * (low2 + low2.T) - A).max()),
        "n2.skew": float(np.abs(2.0 * (low2 - low2.T) - B).max()),
        "nm.relation": float(
            max(np.abs(conn.M1 - N1).max(), np.abs(conn.M2 - conn.N2 - N1 @ N1).max())
        ),
    }
