"""Compare the first variation of the action with the bracket integral.

On an arbitrary curve the two numbers agree; on a solution both vanish.
Run:  python3 demos/variational_check.py
"""
import numpy as np

from t2geom import Jet2Point, action_variation_check, builtin, solution_curve
from t2geom.dynamics import PolynomialCurve, VariationField

rng = np.random.default_rng(7)
L = builtin("warped2d")
V = VariationField(rng.normal(size=(3, 2)))

curve = PolynomialCurve(np.vstack([rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.5, 0.5, (3, 2))]))
lhs, rhs = action_variation_check(L, curve, V)
print(f"polynomial curve: dI/de = {lhs:+.10f}   bracket = {rhs:+.10f}")

p0 = Jet2Point(np.zeros(2), np.array([0.4, -0.2]), np.array([0.1, 0.0]))
lhs, rhs = action_variation_check(L, solution_curve(L, p0), V)
print(f"solution curve:   dI/de = {lhs:+.2e}   bracket = {rhs:+.2e}")
