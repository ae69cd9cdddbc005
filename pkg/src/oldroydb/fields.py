"""Nodal Q1 field containers and interpolation/averaging operators.

All fields store one value set per mesh vertex in lexicographic order
(x index fastest).  Symmetric 2x2 tensors are stored as the component
triple (s11, s12, s22) throughout the package and all file outputs.
"""

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, locate_points


def _corner_indices(mesh, ii, jj):
    """Global vertex indices of the four corners of elements (ii, jj)."""
    stride = mesh.n + 1
    v00 = jj * stride + ii
    return v00, v00 + 1, v00 + stride, v00 + stride + 1


def _interpolate(mesh, values, pts):
    """Bilinear interpolation of nodal data (n_vertices, k) at points (m, 2)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ii, jj, xi, eta = locate_points(mesh, pts)
    v00, v10, v01, v11 = _corner_indices(mesh, ii, jj)
    w00 = (1.0 - xi) * (1.0 - eta)
    w10 = xi * (1.0 - eta)
    w01 = (1.0 - xi) * eta
    w11 = xi * eta
    vals = np.asarray(values)
    if vals.ndim == 1:
        return w00 * vals[v00] + w10 * vals[v10] + w01 * vals[v01] + w11 * vals[v11]
    return (
        w00[:, None] * vals[v00]
        + w10[:, None] * vals[v10]
        + w01[:, None] * vals[v01]
        + w11[:, None] * vals[v11]
    )


def interpolation_weights(mesh, pts):
    """Corner indices and bilinear weights for query points (testing hook)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ii, jj, xi, eta = locate_points(mesh, pts)
    corners = np.stack(_corner_indices(mesh, ii, jj), axis=-1)
    weights = np.stack(
        [(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta], axis=-1
    )
    return corners, weights


class _NodalField:
    """Common checks for nodal fields."""

    components = 1

    def __init__(self, mesh: Mesh, values):
        values = np.asarray(values, dtype=float)
        expected = (mesh.n_vertices,) if self.components == 1 else (mesh.n_vertices, self.components)
        if values.shape != expected:
            raise ValueError(f"expected nodal array of shape {expected}, got {values.shape}")
        self.mesh = mesh
        self.values = values

    def copy(self):
        return type(self)(self.mesh, self.values.copy())


class ScalarField(_NodalField):
    """Continuous piecewise-bilinear scalar field."""

    components = 1

    def at(self, pts):
        return _interpolate(self.mesh, self.values, pts)


class VectorField(_NodalField):
    """Nodal 2-vector field (e.g. velocity)."""

    components = 2

    def at(self, pts):
        return _interpolate(self.mesh, self.values, pts)


class ConfField(_NodalField):
    """Nodal symmetric 2x2 tensor field stored as (s11, s12, s22)."""

    components = 3

    def at(self, pts):
        return _interpolate(self.mesh, self.values, pts)

    @classmethod
    def identity(cls, mesh):
        vals = np.zeros((mesh.n_vertices, 3))
        vals[:, 0] = 1.0
        vals[:, 2] = 1.0
        return cls(mesh, vals)


def eval_scalar(f: ScalarField, p):
    """Bilinear point evaluation of a scalar field."""
    return float(f.at(np.asarray(p, dtype=float))[0])


def eval_vector(f: VectorField, p):
    """Componentwise bilinear point evaluation of a vector field."""
    return f.at(np.asarray(p, dtype=float))[0]


def eval_conf(f: ConfField, p):
    """Evaluate a conformation field at a point, returned as a 2x2 matrix."""
    s11, s12, s22 = f.at(np.asarray(p, dtype=float))[0]
    return np.array([[s11, s12], [s12, s22]])


def _element_gradient_integrals(mesh, values):
    """Exact integrals of the bilinear gradient over each element.

    For nodal data of shape (n_vertices, k) returns (gx, gy), each of
    shape (n, n, k) with [j, i] indexing element (i, j).
    """
    n = mesh.n
    vals = np.asarray(values, dtype=float)
    k = 1 if vals.ndim == 1 else vals.shape[1]
    grid = vals.reshape(n + 1, n + 1, k)  # [j, i, comp]
    dx, dy = mesh.element_widths()
    # corner values per element
    v00 = grid[:-1, :-1]
    v10 = grid[:-1, 1:]
    v01 = grid[1:, :-1]
    v11 = grid[1:, 1:]
    gx = 0.5 * dy[:, None, None] * ((v10 + v11) - (v00 + v01))
    gy = 0.5 * dx[None, :, None] * ((v01 + v11) - (v00 + v10))
    return gx, gy


def _scatter_patch_sum(elem):
    """Sum element quantities (n, n, k) onto their corner vertices."""
    n = elem.shape[0]
    k = elem.shape[2]
    padded = np.zeros((n + 2, n + 2, k))
    padded[1:-1, 1:-1] = elem
    return (
        padded[:-1, :-1] + padded[1:, :-1] + padded[:-1, 1:] + padded[1:, 1:]
    ).reshape((n + 1) ** 2, k)


def vertex_averaged_gradient(u: VectorField):
    """Patch-averaged velocity gradient at every vertex, shape (nv, 2, 2).

    Each vertex gets the integral of the elementwise gradient over its
    patch of adjacent elements divided by the patch area; boundary
    vertices use their reduced patches.  Convention: G[i, j] = du_i/dx_j.
    """
    mesh = u.mesh
    n = mesh.n
    gx, gy = _element_gradient_integrals(mesh, u.values)
    dx, dy = mesh.element_widths()
    areas = np.outer(dy, dx)[:, :, None]  # [j, i]
    patch_area = _scatter_patch_sum(areas)  # (nv, 1)
    sums = _scatter_patch_sum(np.concatenate([gx, gy], axis=2))  # (nv, 4)
    grads = sums / patch_area
    out = np.empty((mesh.n_vertices, 2, 2))
    out[:, 0, 0] = grads[:, 0]  # du1/dx
    out[:, 1, 0] = grads[:, 1]  # du2/dx
    out[:, 0, 1] = grads[:, 2]  # du1/dy
    out[:, 1, 1] = grads[:, 3]  # du2/dy
    return out


def sym_eigenvalues_components(s11, s12, s22):
    """Closed-form eigenvalues of symmetric 2x2 tensors, vectorised."""
    m = 0.5 * (s11 + s22)
    r = np.sqrt((0.5 * (s11 - s22)) ** 2 + np.asarray(s12) ** 2)
    return m - r, m + r


def sym_eigenvalues(s):
    """(lambda_min, lambda_max) of a symmetric 2x2 matrix."""
    s = np.asarray(s, dtype=float)
    lo, hi = sym_eigenvalues_components(s[0, 0], s[0, 1], s[1, 1])
    return float(lo), float(hi)
