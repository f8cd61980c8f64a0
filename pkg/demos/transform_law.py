"""The metric and the covariant acceleration transform as d-tensors.

Run:  python3 demos/transform_law.py
"""
from t2geom import Diffeo2, builtin, metric_law_deviation, z2_law_deviation

L = builtin("polar2d")
phi = Diffeo2(["x_1 + 0.1*x_2^2", "x_2 + 0.05*x_1^3"])
for p in L.sample_points(5, seed=3):
    print(f"metric law {metric_law_deviation(L, phi, p):.1e}   "
          f"z2 law {z2_law_deviation(L.metric_spec, phi, p):.1e}")
