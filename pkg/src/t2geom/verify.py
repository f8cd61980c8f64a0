"""Named invariant residuals, evaluated point by point."""
from __future__ import annotations

from .connection import connection, connection_identities, connection_condition_residuals
from .jets import Jet2Point
from .lagrangian import check_regularity
from .local import REGULARITY_TOL
from .semispray import (
    lie_omega2_equals_omega1,
    semispray_identity_residuals,
    sl2_residual,
    lie_theta_residual,
    verify_isomega,
)

VERIFY_NAMES = (
    "prop1.1",
    "prop1.2",
    "prop1.3",
    "thm1.lstheta",
    "cor.isomega",
    "cor.lieomega",
    "thm2.cond1",
    "thm2.nabla2g",
    "thm2.dhtheta",
    "prop2.n1",
    "sl2",
    "thm2.adapted",
)


def point_residuals(L, p: Jet2Point, perturb: float = 0.0, rcond_tol: float = REGULARITY_TOL) -> dict:
    """All suite residuals at one point. ``perturb`` only touches N⁽²⁾."""
    check_regularity(L, p, rcond_tol)
    out = dict(semispray_identity_residuals(L, p))
    out["thm1.lstheta"] = lie_theta_residual(L, p)
    out["cor.isomega"] = verify_isomega(L, p)
    out["cor.lieomega"] = lie_omega2_equals_omega1(L, p)
    out.update(connection_condition_residuals(L, p, connection(L, p, perturb)))
    out["prop2.n1"] = connection_identities(L, p)["prop2.n1"]
    out["sl2"] = sl2_residual(L, p)
    return {k: out[k] for k in VERIFY_NAMES}


def suite_max(L, points, perturb: float = 0.0, rcond_tol: float = REGULARITY_TOL) -> dict:
    """Max of every residual over ``points``, in point order."""
    best = dict.fromkeys(VERIFY_NAMES, 0.0)
    for p in points:
        for k, v in point_residuals(L, p, perturb, rcond_tol).items():
            best[k] = max(best[k], v)
    return best
