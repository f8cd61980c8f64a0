"""Semispray and nonlinear connection of a conformal metric at one point.

Run:  python3 demos/inspect_point.py
"""
import numpy as np

from t2geom import Jet2Point, builtin, check_regularity, connection, point_residuals
from t2geom.semiriemann import closed_form_G

L = builtin("conformal1d")
p = Jet2Point(np.array([0.3]), np.array([0.8]), np.array([-0.2]))

metric = check_regularity(L, p)
conn = connection(L, p)
print("g      =", conn.g)
print("G      =", conn.G, " closed form:", closed_form_G(L.metric_spec, p))
print("N1, N2 =", conn.N1, conn.N2)

# every identity residual at this point should sit near rounding level
for name, value in point_residuals(L, p).items():
    print(f"  {name:14s} {value:.2e}")

# a deliberately wrong N2 shows up only in the connection checks
bad = point_residuals(L, p, perturb=1e-3)
print("with N2 perturbed:", {k: f"{v:.1e}" for k, v in bad.items() if v > 1e-8})
