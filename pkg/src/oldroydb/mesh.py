"""Graded tensor-product quadrilateral meshes on the unit square.

Two constructions are provided: a mirrored geometric grading with a
constant contraction ratio towards each boundary, and a quadratic grading
whose finest vertical resolution sits at the top boundary (the lid).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Mesh:
    """Tensor-product rectangular mesh of the unit square.

    Element (i, j) spans [x[i], x[i+1]] x [y[j], y[j+1]].  Vertices are
    numbered lexicographically with the x index varying fastest:
    vertex (i, j) has global index j * (n + 1) + i.
    """

    x_coords: np.ndarray
    y_coords: np.ndarray
    n: int = field(default=0)

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x_coords, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y_coords, dtype=float))
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size < 2:
            raise ValueError("coordinate arrays must be 1-D of equal length >= 2")
        n = x.size - 1
        for name, c in (("x", x), ("y", y)):
            if abs(c[0]) > 1e-14 or abs(c[-1] - 1.0) > 1e-14:
                raise ValueError(f"{name}-coordinates must span [0, 1]")
            if np.any(np.diff(c) <= 0):
                raise ValueError(f"{name}-coordinates must be strictly increasing")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x_coords", x)
        object.__setattr__(self, "y_coords", y)
        object.__setattr__(self, "n", n)

    @property
    def n_vertices(self):
        return (self.n + 1) ** 2

    @property
    def n_elements(self):
        return self.n ** 2

    def vertex_coords(self):
        """All vertex coordinates, shape (n_vertices, 2), x fastest."""
        xx, yy = np.meshgrid(self.x_coords, self.y_coords)
        return np.column_stack([xx.ravel(), yy.ravel()])

    def element_widths(self):
        """(dx, dy) arrays of element widths per direction."""
        return np.diff(self.x_coords), np.diff(self.y_coords)

    def save_text(self, path):
        """Write the two coordinate arrays as two whitespace-separated lines."""
        with open(path, "w") as fh:
            fh.write(" ".join(f"{v:.17g}" for v in self.x_coords) + "\n")
            fh.write(" ".join(f"{v:.17g}" for v in self.y_coords) + "\n")

    @classmethod
    def load_text(cls, path):
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        if len(lines) != 2:
            raise ValueError(f"expected 2 coordinate lines in {path}, got {len(lines)}")
        x = np.array([float(v) for v in lines[0].split()])
        y = np.array([float(v) for v in lines[1].split()])
        return cls(x, y)


def _check_even(n):
    if n <= 0 or n % 2 != 0:
        raise ValueError(f"number of elements per direction must be even and positive, got {n}")


def build_ratio_graded_mesh(n, gamma=0.96):
    """Mesh with mirrored geometric grading, largest elements at the centre.

    Per direction the n/2 widths of one half form a geometric sequence with
    ratio ``gamma`` from the centre towards the boundary, normalised so each
    half sums to exactly 0.5; the other half is its mirror image.
    """
    _check_even(n)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"contraction ratio must lie in (0, 1), got {gamma}")
    m = n // 2
    widths = gamma ** np.arange(m)
    widths *= 0.5 / widths.sum()
    # centre outward on the right half; the left half mirrors it
    right = widths
    left = widths[::-1]
    all_widths = np.concatenate([left, right])
    coords = np.concatenate([[0.0], np.cumsum(all_widths)])
    coords[-1] = 1.0
    coords[m] = 0.5
    return Mesh(coords, coords.copy())


def build_quadratic_graded_mesh(n):
    """Mesh with quadratic grading; the top element row has height 1/n**2."""
    _check_even(n)
    i = np.arange(n + 1)
    x = np.empty(n + 1)
    half = n // 2
    x[: half + 1] = 2.0 * (i[: half + 1] / n) ** 2
    x[half + 1 :] = 1.0 - x[: half][::-1]
    y = 1.0 - (1.0 - i / n) ** 2
    x[0], x[-1] = 0.0, 1.0
    y[0], y[-1] = 0.0, 1.0
    return Mesh(x, y)


def build_uniform_mesh(n):
    """Uniform n x n mesh (handy for convergence studies)."""
    if n <= 0:
        raise ValueError(f"need a positive element count, got {n}")
    coords = np.linspace(0.0, 1.0, n + 1)
    return Mesh(coords, coords.copy())


@dataclass(frozen=True)
class LocatedPoint:
    """Element index plus reference coordinates of a located query point."""

    element: tuple
    local: tuple


def _locate_1d(coords, v):
    """Interval indices for values v in the coordinate array.

    Values on an internal edge go to the larger-index element; the end
    points map to the first/last interval with local coordinate 0/1.
    """
    idx = np.searchsorted(coords, v, side="right") - 1
    return np.clip(idx, 0, coords.size - 2)


def locate_points(mesh, pts):
    """Vectorised point location.

    Returns (ii, jj, xi, eta) arrays for query points of shape (m, 2).
    """
    pts = np.asarray(pts, dtype=float)
    px, py = pts[..., 0], pts[..., 1]
    if np.any(px < 0.0) or np.any(px > 1.0) or np.any(py < 0.0) or np.any(py > 1.0):
        raise DomainError("query point outside the closed unit square")
    x, y = mesh.x_coords, mesh.y_coords
    ii = _locate_1d(x, px)
    jj = _locate_1d(y, py)
    xi = (px - x[ii]) / (x[ii + 1] - x[ii])
    eta = (py - y[jj]) / (y[jj + 1] - y[jj])
    return ii, jj, xi, eta


def locate_point(mesh, p):
    """Locate a single point; see locate_points for the tie-break rule."""
    ii, jj, xi, eta = locate_points(mesh, np.asarray(p, dtype=float)[None, :])
    return LocatedPoint(element=(int(ii[0]), int(jj[0])), local=(float(xi[0]), float(eta[0])))


def local_to_physical(mesh, element, local):
    """Map element + reference coordinates back to physical coordinates."""
    i, j = element
    xi, eta = local
    x, y = mesh.x_coords, mesh.y_coords
    return np.array([x[i] + xi * (x[i + 1] - x[i]), y[j] + eta * (y[j + 1] - y[j])])


def mesh_statistics(mesh):
    """(h_min, h_max, n_elements) with h measured as element edge length."""
    dx, dy = mesh.element_widths()
    edges = np.concatenate([dx, dy])
    return float(edges.min()), float(edges.max()), mesh.n_elements
