"""Benchmark quantities: cross-sections, midline stress peak, vortex centre."""

import math
from dataclasses import dataclass, asdict

import numpy as np

from .fields import ConfField, ScalarField, VectorField, sym_eigenvalues_components
from .mesh import locate_points


@dataclass
class Metrics:
    """Scalar benchmark outputs of a run."""

    max_ln_s11_midline: float
    max_s11_global: float
    vortex_center: tuple
    lambda_min_global: float
    lambda_max_global: float

    def as_dict(self):
        d = asdict(self)
        d["vortex_center"] = list(self.vortex_center)
        return d


def sample_cross_section(field, axis, coordinate, n_samples=512):
    """Sample a field along a horizontal or vertical line.

    ``axis='horizontal'`` samples the line y = coordinate, ``'vertical'``
    the line x = coordinate.  ``n_samples`` counts intervals, so
    n_samples + 1 equispaced points are returned and doubling n_samples
    keeps every existing abscissa.  Returns (s, values) with s the
    arc coordinate along the line.
    """
    if not 0.0 <= coordinate <= 1.0:
        raise ValueError(f"cross-section coordinate must lie in [0, 1], got {coordinate}")
    s = np.linspace(0.0, 1.0, n_samples + 1)
    if axis == "horizontal":
        pts = np.column_stack([s, np.full_like(s, coordinate)])
    elif axis == "vertical":
        pts = np.column_stack([np.full_like(s, coordinate), s])
    else:
        raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    return s, field.at(pts)


def _golden_refine(fun, a, b, tol=1e-12, max_iter=200):
    """Golden-section maximisation of a unimodal 1-D function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    m = 0.5 * (a + b)
    return m, fun(m)


def midline_max_log_sigma11(conf: ConfField, n_samples=4096):
    """ln of the maximum of s11 along the vertical midline x = 0.5."""
    s, vals = sample_cross_section(conf, "vertical", 0.5, n_samples)
    s11 = vals[:, 0]
    if np.any(s11 <= 0.0):
        raise ValueError("non-positive s11 encountered on the midline; field is not SPD")
    k = int(np.argmax(s11))
    lo = s[max(k - 1, 0)]
    hi = s[min(k + 1, len(s) - 1)]

    def fun(y):
        return float(conf.at(np.array([[0.5, y]]))[0, 0])

    _, peak = _golden_refine(fun, lo, hi)
    peak = max(peak, float(s11[k]))
    return float(np.log(peak))


def global_max_sigma11(conf: ConfField):
    """Maximum nodal s11 (bilinear fields attain extrema at vertices)."""
    return float(conf.values[:, 0].max())


def eigenvalue_fields(conf: ConfField):
    """Per-vertex eigenvalue fields (lambda_min, lambda_max)."""
    lo, hi = sym_eigenvalues_components(conf.values[:, 0], conf.values[:, 1], conf.values[:, 2])
    return ScalarField(conf.mesh, lo), ScalarField(conf.mesh, hi)


def _bilinear_jacobian(u: VectorField, p):
    """Elementwise velocity Jacobian of the interpolant at point p."""
    mesh = u.mesh
    ii, jj, xi, eta = locate_points(mesh, np.asarray(p, float)[None, :])
    i, j = int(ii[0]), int(jj[0])
    stride = mesh.n + 1
    v00 = j * stride + i
    c = [v00, v00 + 1, v00 + stride, v00 + stride + 1]
    vals = u.values[c]  # corner order (0,0), (1,0), (0,1), (1,1)
    dx = mesh.x_coords[i + 1] - mesh.x_coords[i]
    dy = mesh.y_coords[j + 1] - mesh.y_coords[j]
    t, sloc = float(eta[0]), float(xi[0])
    ddx = ((vals[1] - vals[0]) * (1 - t) + (vals[3] - vals[2]) * t) / dx
    ddy = ((vals[2] - vals[0]) * (1 - sloc) + (vals[3] - vals[1]) * sloc) / dy
    return np.column_stack([ddx, ddy])  # rows: components, cols: d/dx, d/dy


def _nodal_streamfunction(u: VectorField):
    """Streamfunction values at mesh vertices via line integration.

    psi is accumulated with the trapezoidal rule along the bottom row
    (psi_x = -u2) and then up each vertex column (psi_y = u1); exact for
    the bilinear interpolant along grid lines, no Poisson solve needed.
    """
    mesh = u.mesh
    npts = mesh.n + 1
    u1 = u.values[:, 0].reshape(npts, npts)  # [j, i]
    u2 = u.values[:, 1].reshape(npts, npts)
    dx, dy = mesh.element_widths()
    psi = np.zeros((npts, npts))
    psi[0, 1:] = np.cumsum(-0.5 * (u2[0, :-1] + u2[0, 1:]) * dx)
    psi[1:] = psi[0] + np.cumsum(0.5 * (u1[:-1] + u1[1:]) * dy[:, None], axis=0)
    return psi


def _newton_root(u, p, tol, max_iter):
    for _ in range(max_iter):
        v = u.at(p[None, :])[0]
        if np.linalg.norm(v) < tol:
            return p, True
        jac = _bilinear_jacobian(u, p)
        try:
            step = np.linalg.solve(jac, -v)
        except np.linalg.LinAlgError:
            break
        # damp to stay inside the domain
        alpha = 1.0
        for _ in range(30):
            q = p + alpha * step
            if 0.0 <= q[0] <= 1.0 and 0.0 <= q[1] <= 1.0:
                break
            alpha *= 0.5
        else:
            break
        p = p + alpha * step
    v = u.at(p[None, :])[0]
    return p, bool(np.linalg.norm(v) < 1e-8)


def vortex_center(u: VectorField, scan=200, tol=1e-12, max_iter=100):
    """Locate the interior stagnation point of the main vortex.

    The main vortex is the streamfunction extremum; starting the damped
    Newton iteration on the interpolated velocity from the interior vertex
    of largest |psi| keeps it away from the much weaker corner eddies and
    the exactly-zero wall elements, where |u| alone has spurious minima.
    Returns (point, converged); if the Newton iteration fails, the
    minimiser of |u| on a coarse interior scan grid is returned with
    converged=False.
    """
    mesh = u.mesh
    psi = np.abs(_nodal_streamfunction(u))[1:-1, 1:-1]
    j, i = np.unravel_index(int(np.argmax(psi)), psi.shape)
    start = np.array([mesh.x_coords[i + 1], mesh.y_coords[j + 1]])
    p, converged = _newton_root(u, start, tol, max_iter)
    if converged:
        return p, True
    g = np.linspace(0.0, 1.0, scan + 2)[1:-1]
    xx, yy = np.meshgrid(g, g)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    speed2 = (u.at(pts) ** 2).sum(axis=1)
    return pts[int(np.argmin(speed2))].copy(), False


def compute_metrics(u: VectorField, conf: ConfField) -> Metrics:
    """All Metrics fields from a velocity/conformation snapshot."""
    lo_f, hi_f = eigenvalue_fields(conf)
    center, _ = vortex_center(u)
    return Metrics(
        max_ln_s11_midline=midline_max_log_sigma11(conf),
        max_s11_global=global_max_sigma11(conf),
        vortex_center=(float(center[0]), float(center[1])),
        lambda_min_global=float(lo_f.values.min()),
        lambda_max_global=float(hi_f.values.max()),
    )
