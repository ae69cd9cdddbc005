"""Semi-Lagrangian, positivity-preserving conformation tensor update.

Per vertex and time step the update reads

    (1 + dt/Wi) S_new(x) = F S_old(y) F^T + (dt/Wi) I,

with F = I + dt * grad_u(x) built from the vertex-averaged velocity
gradient and y = x - dt * u(x) the backtracked departure point, evaluated
on the previous field by bilinear interpolation.  The update is explicit
and embarrassingly parallel over vertices; F S F^T is assembled from
symmetric component formulas so the stored triple stays exactly symmetric.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConformationError
from .fields import (
    ConfField,
    VectorField,
    _interpolate,
    sym_eigenvalues_components,
    vertex_averaged_gradient,
)

DEFAULT_CHECK_THRESHOLD = 0.5


@dataclass(frozen=True)
class UpdateParams:
    """Time step and Weissenberg number for one conformation update."""

    wi: float
    dt: float

    def __post_init__(self):
        if self.wi <= 0.0:
            raise ValueError(f"Weissenberg number must be positive, got {self.wi}")
        if self.dt <= 0.0:
            raise ValueError(f"time step must be positive, got {self.dt}")


def departure_points(pts, u_at_pts, dt):
    """Backtracked departure points, clamped into the closed unit square.

    Returns (clamped, unclamped, clamp_distance) for points of shape (m, 2).
    """
    pts = np.asarray(pts, dtype=float)
    raw = pts - dt * np.asarray(u_at_pts, dtype=float)
    clamped = np.clip(raw, 0.0, 1.0)
    dist = np.linalg.norm(clamped - raw, axis=-1)
    return clamped, raw, dist


def departure_point(x, u_at_x, dt):
    """Single-point variant; returns (clamped, unclamped, clamp_distance)."""
    c, r, d = departure_points(np.asarray(x, float)[None, :], np.asarray(u_at_x, float)[None, :], dt)
    return c[0], r[0], float(d[0])


def discrete_deformation_gradient(grad_u, dt):
    """F = I + dt * grad_u, broadcast over leading axes of (..., 2, 2)."""
    grad_u = np.asarray(grad_u, dtype=float)
    return np.eye(2) + dt * grad_u


@dataclass(frozen=True)
class TimeStepCheck:
    """Outcome of the dt admissibility check; measure = dt * M."""

    passed: bool
    measure: float
    threshold: float


def check_time_step(u: VectorField, dt, threshold=DEFAULT_CHECK_THRESHOLD, grad_u=None):
    """Check dt * max(|u|_inf, |grad u|_inf) against the threshold.

    The gradient is the vertex-averaged one; an already computed gradient
    array may be passed to avoid recomputation.
    """
    if grad_u is None:
        grad_u = vertex_averaged_gradient(u)
    m = max(np.abs(u.values).max(), np.abs(grad_u).max())
    measure = dt * float(m)
    return TimeStepCheck(passed=measure <= threshold, measure=measure, threshold=threshold)


def _require_spd(values):
    lo, _ = sym_eigenvalues_components(values[:, 0], values[:, 1], values[:, 2])
    bad = np.flatnonzero(lo <= 0.0)
    if bad.size:
        v = int(bad[0])
        raise ConformationError(
            f"conformation tensor not SPD at vertex {v} (lambda_min = {lo[v]:.3e})",
            vertex=v,
        )


def conformation_update(conf_prev: ConfField, u: VectorField, params: UpdateParams,
                        grad_u=None, diagnostics=None) -> ConfField:
    """One explicit update of the nodal conformation field.

    Raises ConformationError if the input field is not SPD at every
    vertex.  If ``diagnostics`` is a dict it receives 'max_clamp_distance'.
    """
    mesh = conf_prev.mesh
    _require_spd(conf_prev.values)
    if grad_u is None:
        grad_u = vertex_averaged_gradient(u)
    dt, wi = params.dt, params.wi
    f = discrete_deformation_gradient(grad_u, dt)  # (nv, 2, 2)
    pts = mesh.vertex_coords()
    y, _, clamp = departure_points(pts, u.values, dt)
    if diagnostics is not None:
        diagnostics["max_clamp_distance"] = float(clamp.max()) if clamp.size else 0.0
    s = _interpolate(mesh, conf_prev.values, y)  # (nv, 3)
    s11, s12, s22 = s[:, 0], s[:, 1], s[:, 2]
    f11, f12 = f[:, 0, 0], f[:, 0, 1]
    f21, f22 = f[:, 1, 0], f[:, 1, 1]
    # B = F S, then symmetric components of B F^T
    b11 = f11 * s11 + f12 * s12
    b12 = f11 * s12 + f12 * s22
    b21 = f21 * s11 + f22 * s12
    b22 = f21 * s12 + f22 * s22
    r = dt / wi
    scale = 1.0 / (1.0 + r)
    new = np.empty_like(s)
    new[:, 0] = (b11 * f11 + b12 * f12 + r) * scale
    new[:, 1] = (b11 * f21 + b12 * f22) * scale
    new[:, 2] = (b21 * f21 + b22 * f22 + r) * scale
    return ConfField(mesh, new)
