"""Transformation laws of d-tensors under induced coordinate changes on T²M."""
from __future__ import annotations

import numpy as np

from .errors import SingularJacobian
from .jets import Diffeo2, Jet2Point, jet_transform
from .lagrangian import PullbackLagrangian, metric_tensor
from .semiriemann import SemiRiemannianSpec, pullback_metric, z2


def metric_law_deviation(L, phi: Diffeo2, p: Jet2Point) -> float:
    """max |g(Φ(p)) − Dφ⁻ᵀ g'(p) Dφ⁻¹| where g' is the metric of L∘Φ."""
    D = phi.check_jacobian(p.x)
    q = jet_transform(phi, p)
    g_old = metric_tensor(PullbackLagrangian(L, phi), p).g
    g_new = metric_tensor(L, q).g
    Dinv = np.linalg.inv(D)
    return float(np.abs(g_new - Dinv.T @ g_old @ Dinv).max())


def z2_law_deviation(spec: SemiRiemannianSpec, phi: Diffeo2, p: Jet2Point, pulled: SemiRiemannianSpec | None = None) -> float:
    """max |z2(Φ(p)) − Dφ z2'(p)|, z2' built from the pulled-back metric."""
    D = phi.check_jacobian(p.x)
    pulled = pullback_metric(spec, phi) if pulled is None else pulled
    z_old = z2(pulled, p)
    z_new = z2(spec, jet_transform(phi, p))
    return float(np.abs(z_new - D @ z_old).max())


def check_orientation(phi: Diffeo2, points) -> None:
    """Every Jacobian must be nonsingular and share one sign of det.

    A sign change between samples means det Dφ vanishes somewhere in the
    sampled region, so φ is not a diffeomorphism there.
    """
    signs = set()
    for p in points:
        D = phi.check_jacobian(p.x)
        signs.add(bool(np.linalg.det(D) > 0))
    if len(signs) > 1:
        raise SingularJacobian("Jacobian determinant changes sign across the sampled points", 0.0)
