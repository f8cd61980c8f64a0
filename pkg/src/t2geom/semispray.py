"""The canonical semispray of a regular second-order Lagrangian.

``S = y1 ∂/∂x + 2 y2 ∂/∂y1 − 3 G ∂/∂y2`` with ``G`` fixed by requiring
``ℒ_S θ² = θ¹``. All derivatives along S are taken on local jets, so S(f)
and S²(f) are exact chain-rule expansions rather than nested differences.

Several functions accept ``shift``, a deformation of G used to probe
uniqueness: either a constant n-vector, or a callable ``(x, y1, y2) -> n
scalars`` evaluated on coordinate jets.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import taylor
from .jets import CotangentVecT2M, J_matrix, Jet2Point, TangentVecT2M, apply_J, liouville_C2
from .jetscalar import Jet
from .lagrangian import exterior_derivative, theta1_jet, theta2_jet
from .local import LocalJets, local_jets


@dataclass(frozen=True)
class SemisprayCoeffs:
    base: Jet2Point
    G: np.ndarray


def semispray_G(loc: LocalJets, shift=None) -> Jet:
    """Jet of G, optionally deformed by ``shift``."""
    if shift is None:
        return loc.G
    if callable(shift):
        n = loc.n
        c = list(loc.coords)
        vals = shift(c[:n], c[n : 2 * n], c[2 * n :])
        return loc.G + Jet.coerce_array(vals, 3 * n, loc.order)
    return loc.G + np.asarray(shift, dtype=float)


def semispray_jet(loc: LocalJets, shift=None) -> Jet:
    return loc.S if shift is None else loc.semispray(semispray_G(loc, shift))


def semispray_coeffs(L, p: Jet2Point) -> SemisprayCoeffs:
    """3 G = 1/2 g⁻¹ (d_T ∂L/∂y2 − ∂L/∂y1)."""
    return SemisprayCoeffs(p, np.array(local_jets(L, p).G.value))


def semispray_vector(L, p: Jet2Point, shift=None) -> TangentVecT2M:
    S = semispray_jet(local_jets(L, p), shift)
    return TangentVecT2M.from_components(p, np.array(S.value))


def _field_jet(f, loc: LocalJets, order: int) -> Jet:
    return taylor(f, loc.p, order)


def apply_S(L, f, p: Jet2Point, shift=None) -> float:
    """Derivative of the scalar field ``f`` along the semispray."""
    loc = local_jets(L, p)
    S = semispray_jet(loc, shift)
    return float(LocalJets.apply(S, _field_jet(f, loc, 1)).value)


def apply_S2(L, f, p: Jet2Point, shift=None) -> float:
    """S(S(f)); uses second partials of f and first partials of G."""
    loc = local_jets(L, p)
    S = semispray_jet(loc, shift)
    Sf = LocalJets.apply(S, _field_jet(f, loc, 2))
    return float(LocalJets.apply(S, Sf).value)


def lie_derivative_oneform(S: Jet, theta: Jet) -> Jet:
    """Components of ℒ_S θ: S^mu ∂_mu θ_nu + θ_mu ∂_nu S^mu."""
    m = S.shape[0]
    out = []
    for nu in range(m):
        acc = None
        for mu in range(m):
            term = S[mu] * theta[nu].derivative(mu) + theta[mu] * S[mu].derivative(nu)
            acc = term if acc is None else acc + term
        out.append(acc)
    return Jet.stack(out)


def interior(S: Jet, omega: Jet) -> Jet:
    """(i_S ω)_nu = S^mu ω_{mu nu}."""
    m = S.shape[0]
    acc = None
    for mu in range(m):
        term = omega[mu] * S[mu]
        acc = term if acc is None else acc + term
    return acc


def gradient_jet(f: Jet) -> Jet:
    return Jet.stack([f.derivative(k) for k in range(f.nvars)])


def liouville_C1_L(loc: LocalJets) -> Jet:
    return (loc.y1 * loc.p2).sum()


def liouville_C2_L(loc: LocalJets) -> Jet:
    return (loc.y1 * loc.p1).sum() + (loc.y2 * loc.p2).sum() * 2.0


def lie_theta2(L, p: Jet2Point, G=None) -> CotangentVecT2M:
    """Local formula for ℒ_S θ²; ``G`` overrides the semispray coefficients.

    dx-block d_T(∂L/∂y2) − 6 g G, dy1-block ∂L/∂y2, dy2-block 0.
    """
    loc = local_jets(L, p)
    Gv = np.array(loc.G.value) if G is None else np.asarray(G, dtype=float)
    g = np.array(loc.g.value)
    dx = np.array(loc.total_derivative(loc.p2).value) - 6.0 * g @ Gv
    return CotangentVecT2M(p, dx, np.array(loc.p2.value), np.zeros(p.n))


def lie_theta2_general(L, p: Jet2Point, shift=None) -> np.ndarray:
    """ℒ_S θ² from the general component formula (independent of the local one)."""
    loc = local_jets(L, p)
    return np.array(lie_derivative_oneform(semispray_jet(loc, shift), theta2_jet(loc)).value)


def solve_G_from_lie(L, p: Jet2Point) -> np.ndarray:
    """Recover G by solving dx-block(ℒ_S θ²) = dx-block(θ¹) for G.

    The dx-block is affine in G; its linear part is probed column by column.
    """
    n = p.n
    target = np.array(local_jets(L, p).p1.value)
    b0 = lie_theta2(L, p, np.zeros(n)).ax
    A = np.column_stack([lie_theta2(L, p, e).ax - b0 for e in np.eye(n)])
    return np.linalg.solve(A, target - b0)


def isomega_residual_vector(L, p: Jet2Point, shift=None) -> np.ndarray:
    """i_S ω² + d(𝔺₁ L) − θ¹ as a 3n component vector."""
    loc = local_jets(L, p)
    S = semispray_jet(loc, shift)
    om2 = exterior_derivative(theta2_jet(loc))
    lhs = interior(S, om2) + gradient_jet(liouville_C1_L(loc))
    return np.array((lhs - theta1_jet(loc)).value)


def verify_isomega(L, p: Jet2Point, shift=None) -> float:
    return float(np.abs(isomega_residual_vector(L, p, shift)).max())


def lie_omega2_equals_omega1(L, p: Jet2Point, shift=None) -> float:
    """max |d(i_S ω²) − ω¹| (ω² is closed, so ℒ_S ω² = d i_S ω²)."""
    loc = local_jets(L, p)
    S = semispray_jet(loc, shift)
    iS = interior(S, exterior_derivative(theta2_jet(loc)))
    lie = exterior_derivative(iS)
    om1 = exterior_derivative(theta1_jet(loc))
    return float(np.abs(np.array(lie.value) - np.array(om1.value)).max())


def lie_theta_residual(L, p: Jet2Point, shift=None) -> float:
    """max |ℒ_S θ² − θ¹| using both the local and the general formula."""
    loc = local_jets(L, p)
    th1 = np.array(theta1_jet(loc).value)
    general = lie_theta2_general(L, p, shift)
    G = np.array(semispray_G(loc, shift).value)
    local = lie_theta2(L, p, G).components()
    return float(max(np.abs(general - th1).max(), np.abs(local - th1).max()))


def semispray_identity_residuals(L, p: Jet2Point, shift=None) -> dict:
    """Residuals of the three Cartan-Poincaré identities (valid for any semispray)."""
    loc = local_jets(L, p)
    n = p.n
    J = J_matrix(n)
    J2 = J @ J
    th1, th2 = theta1_jet(loc), theta2_jet(loc)
    om1, om2 = exterior_derivative(th1), exterior_derivative(th2)
    O1, O2 = np.array(om1.value), np.array(om2.value)
    r1 = max(
        np.abs(J.T @ O2 @ J).max(),
        np.abs(J2.T @ O2 @ J2).max(),
        np.abs(J2.T @ O1 @ J2).max(),
    )

    S = semispray_jet(loc, shift)
    Sv = np.array(S.value)
    r2 = max(
        abs(float(np.array(th1.value) @ Sv) - float(liouville_C2_L(loc).value)),
        abs(float(np.array(th2.value) @ Sv) - float(liouville_C1_L(loc).value)),
    )

    r3 = 0.0
    for th, om, CL in ((th1, om1, liouville_C2_L(loc)), (th2, om2, liouville_C1_L(loc))):
        lhs = lie_derivative_oneform(S, th)
        rhs = interior(S, om) + gradient_jet(CL)
        r3 = max(r3, float(np.abs(np.array((lhs - rhs).value)).max()))
    return {"prop1.1": float(r1), "prop1.2": float(r2), "prop1.3": r3}


def s_c1_minus_c2(L, p: Jet2Point) -> float:
    """S(𝔺₁ L) − 𝔺₂ L."""
    loc = local_jets(L, p)
    return float(LocalJets.apply(loc.S, liouville_C1_L(loc)).value - liouville_C2_L(loc).value)


def sl2_residual(L, p: Jet2Point) -> float:
    """max |S(∂L/∂y2) − ∂L/∂y1|."""
    loc = local_jets(L, p)
    return float(np.abs(np.array((LocalJets.apply(loc.S, loc.p2) - loc.p1).value)).max())


def js_equals_c2(L, p: Jet2Point) -> float:
    return float(np.abs(apply_J(semispray_vector(L, p)).components() - liouville_C2(p).components()).max())

