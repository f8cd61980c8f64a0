"""Integrate the canonical semispray and watch the built-in monitors.

Run:  python3 demos/flow_and_monitors.py
"""
import numpy as np

from t2geom import attach_monitors, builtin, integrate_craig_synge
from t2geom.dynamics import geodesic_initial_point, rk4_order

L = builtin("conformal1d")
p0 = geodesic_initial_point(L.metric_spec, np.array([0.0]), np.array([0.6]))
traj = integrate_craig_synge(L, p0, (0.0, 1.0), 1e-3)
traj = attach_monitors(L, traj, ["nabla2_xdot", "energy_identity"])

print("final state:", traj.states[-1])
for name, series in traj.monitors.items():
    print(f"max |{name}| = {np.abs(series).max():.2e}")

orders, errs = rk4_order(L, p0, dts=(1e-2, 5e-3, 2.5e-3), reference_dt=6.25e-4)
print("observed RK4 orders:", np.round(orders, 3))
