"""The conformation tensor update in isolation, against closed forms.

Two classic sanity checks for the positivity-preserving semi-Lagrangian
update, both with a prescribed velocity field so no Stokes solve is
involved:

1. u = 0: pure relaxation toward the identity at the exact geometric rate
   (1 + dt/Wi)^-n.
2. simple shear u = (y, 0): the fixed point approaches the analytic
   steady state (1 + 2 Wi^2, Wi, 1) with first-order error in dt.
"""

import numpy as np

from oldroydb import ConfField, VectorField, build_uniform_mesh, conformation_update
from oldroydb.constitutive import UpdateParams

mesh = build_uniform_mesh(8)
xy = mesh.vertex_coords()
wi = 0.5

# --- relaxation ---------------------------------------------------------
u0 = VectorField(mesh, np.zeros((mesh.n_vertices, 2)))
conf = ConfField(mesh, np.tile([3.0, 1.0, 2.0], (mesh.n_vertices, 1)))
params = UpdateParams(wi=wi, dt=0.01)
start = conf.values[0].copy()
eye = np.array([1.0, 0.0, 1.0])
print("relaxation toward identity (u = 0):")
for n in range(1, 201):
    conf = conformation_update(conf, u0, params)
    if n % 50 == 0:
        exact = eye + (start - eye) / (1 + params.dt / wi) ** n
        err = np.abs(conf.values[0] - exact).max()
        print(f"  step {n:4d}: s11 = {conf.values[0, 0]:.6f}, "
              f"closed-form deviation = {err:.2e}")

# --- steady shear -------------------------------------------------------
shear = VectorField(mesh, np.column_stack([xy[:, 1], np.zeros(len(xy))]))
exact = np.array([1.0 + 2.0 * wi**2, wi, 1.0])
print(f"\nsteady simple shear, analytic sigma = {tuple(exact.tolist())}:")
for dt in (0.04, 0.02, 0.01, 0.005):
    conf = ConfField.identity(mesh)
    params = UpdateParams(wi=wi, dt=dt)
    prev = conf.values
    for _ in range(100000):
        conf = conformation_update(conf, shear, params)
        if np.abs(conf.values - prev).max() < 1e-15:
            break
        prev = conf.values
    err = np.abs(conf.values - exact).max()
    print(f"  dt = {dt:<6}: converged sigma11 = {conf.values[0, 0]:.6f}, "
          f"error = {err:.3e} (halves with dt)")
