"""Convergence of the stabilised Q1-Q1 Stokes solver.

Solves the Stokes problem with a manufactured divergence-free solution
(streamfunction sin^2(pi x) sin^2(pi y), pressure cos(pi x) cos(pi y)) on a
sequence of uniform meshes and reports nodal L2 errors.  The equal-order
pair with the parameter-free pressure-projection stabilisation gives
second-order velocities and super-first-order pressures.
"""

import numpy as np

from oldroydb import (
    ConfField,
    LidProfile,
    assemble_rhs,
    assemble_stokes_matrix,
    build_uniform_mesh,
    solve_stokes,
)

pi = np.pi


def u_exact(x, y):
    u1 = 2 * pi * np.sin(pi * x) ** 2 * np.sin(pi * y) * np.cos(pi * y)
    u2 = -2 * pi * np.sin(pi * x) * np.cos(pi * x) * np.sin(pi * y) ** 2
    return np.column_stack([u1, u2])


def body_force(x, y):
    # -laplace(u) + grad p for the manufactured pair above
    s2x, c2x = np.sin(2 * pi * x), np.cos(2 * pi * x)
    s2y, c2y = np.sin(2 * pi * y), np.cos(2 * pi * y)
    f1 = -2 * pi**3 * s2y * (2 * c2x - 1) - pi * np.sin(pi * x) * np.cos(pi * y)
    f2 = 2 * pi**3 * s2x * (2 * c2y - 1) - pi * np.cos(pi * x) * np.sin(pi * y)
    return f1, f2


print(f"{'n':>4} {'vel L2 error':>14} {'order':>7} {'prs L2 error':>14} {'order':>7}")
prev = None
for n in (8, 16, 32, 64, 128):
    mesh = build_uniform_mesh(n)
    sys = assemble_stokes_matrix(mesh, beta=1.0)
    rhs = assemble_rhs(sys, ConfField.identity(mesh), wi=1.0, t=-100.0,
                       profile=LidProfile(), body_force=body_force)
    u, p = solve_stokes(sys, rhs)
    xy = mesh.vertex_coords()
    w = sys.pressure_weights
    eu = np.sqrt(w @ ((u.values - u_exact(xy[:, 0], xy[:, 1])) ** 2).sum(axis=1))
    ep = np.sqrt(w @ (p.values - np.cos(pi * xy[:, 0]) * np.cos(pi * xy[:, 1])) ** 2)
    if prev is None:
        print(f"{n:>4} {eu:>14.4e} {'-':>7} {ep:>14.4e} {'-':>7}")
    else:
        print(f"{n:>4} {eu:>14.4e} {np.log2(prev[0] / eu):>7.2f} "
              f"{ep:>14.4e} {np.log2(prev[1] / ep):>7.2f}")
    prev = (eu, ep)
