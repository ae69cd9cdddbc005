"""Stabilised equal-order Q1-Q1 Stokes solver with conformation forcing.

The discrete bilinear form is

    2 beta (eps(u), eps(v)) - (p, div v) - (q, div u) - (p - P0 p, q - P0 q)

where P0 is the elementwise L2 projection onto constants.  The mean-zero
pressure gauge is enforced through a scalar Lagrange multiplier, which
keeps the saddle-point matrix symmetric.  Dirichlet velocity rows are
eliminated at solve time; the interior matrix is factorised once per
system and reused across time steps.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .fields import ScalarField, VectorField
from .mesh import Mesh

# 2x2 Gauss points/weights on [0, 1]; exact for all Q1 form terms on
# axis-aligned rectangles.
_GP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_QPTS = np.array([(a, b) for b in _GP for a in _GP])
_QWTS = np.full(4, 0.25)

# Q1 shape functions on the reference square, corner order
# (0,0), (1,0), (0,1), (1,1).
_SHAPE = np.stack(
    [
        (1 - _QPTS[:, 0]) * (1 - _QPTS[:, 1]),
        _QPTS[:, 0] * (1 - _QPTS[:, 1]),
        (1 - _QPTS[:, 0]) * _QPTS[:, 1],
        _QPTS[:, 0] * _QPTS[:, 1],
    ],
    axis=1,
)  # (4 qp, 4 nodes)
_DSHAPE_XI = np.stack(
    [-(1 - _QPTS[:, 1]), (1 - _QPTS[:, 1]), -_QPTS[:, 1], _QPTS[:, 1]], axis=1
)
_DSHAPE_ETA = np.stack(
    [-(1 - _QPTS[:, 0]), -_QPTS[:, 0], (1 - _QPTS[:, 0]), _QPTS[:, 0]], axis=1
)


@dataclass
class LidProfile:
    """Regularised moving-lid profile u_lid(x, t) = amp*(1+tanh(rate*(t-center)))*g(x).

    The 'standard' variant uses g(x) = x^2 (1-x)^2 (peak speed 1 after the
    ramp saturates); 'as-printed' uses g(x) = x^2 (1-x^2).  Both vanish at
    the corners so the flow stays tangential.
    """

    variant: str = "standard"
    amplitude: float = 8.0
    rate: float = 8.0
    center: float = 0.5

    def __post_init__(self):
        if self.variant not in ("standard", "as-printed"):
            raise ValueError(f"unknown lid profile variant {self.variant!r}")

    def shape(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == "standard":
            return x**2 * (1.0 - x) ** 2
        return x**2 * (1.0 - x**2)

    def ramp(self, t):
        return self.amplitude * (1.0 + np.tanh(self.rate * (t - self.center)))


def lid_velocity(x, t, profile: LidProfile):
    """Horizontal lid speed at position x and time t."""
    return profile.ramp(t) * profile.shape(x)


def _element_geometry(mesh):
    """Per-element quadrature arrays flattened over the element grid.

    Returns (conn, w, dndx, dndy) with shapes (ne, 4), (ne, 4qp),
    (ne, 4qp, 4), (ne, 4qp, 4).
    """
    n = mesh.n
    stride = n + 1
    dx, dy = mesh.element_widths()
    ii, jj = np.meshgrid(np.arange(n), np.arange(n))  # [j, i]
    v00 = (jj * stride + ii).ravel()
    conn = np.stack([v00, v00 + 1, v00 + stride, v00 + stride + 1], axis=1)
    ex = np.tile(dx, n)  # element dx, flattened [j, i]
    ey = np.repeat(dy, n)
    area = ex * ey
    w = area[:, None] * _QWTS[None, :]
    dndx = _DSHAPE_XI[None, :, :] / ex[:, None, None]
    dndy = _DSHAPE_ETA[None, :, :] / ey[:, None, None]
    return conn, w, dndx, dndy


def _boundary_vertex_mask(mesh):
    n = mesh.n
    idx = np.arange(mesh.n_vertices)
    i = idx % (n + 1)
    j = idx // (n + 1)
    return (i == 0) | (i == n) | (j == 0) | (j == n), (j == n)


@dataclass
class StokesSystem:
    """Assembled stabilised Stokes operator plus cached factorisation."""

    mesh: Mesh
    beta: float
    matrix: sp.csr_matrix
    forcing_op: sp.csr_matrix  # maps (s11, s12, s22) nodal stack to momentum rows
    dirichlet_dofs: np.ndarray
    free_dofs: np.ndarray
    lid_vertex_mask: np.ndarray  # vertices on the moving lid (row j = n)
    pressure_weights: np.ndarray = field(default=None, repr=False)
    _lu: object = field(default=None, repr=False)
    _a_fd: sp.csr_matrix = field(default=None, repr=False)
    _a_ff: sp.csr_matrix = field(default=None, repr=False)
    _c_free: np.ndarray = field(default=None, repr=False)
    _p_mask_free: np.ndarray = field(default=None, repr=False)
    _kpin: int = field(default=-1, repr=False)
    last_solve_info: dict = field(default_factory=dict, repr=False)

    @property
    def n_dofs(self):
        return self.matrix.shape[0]

    def factorize(self):
        """Prepare the cached factorisation of the interior block.

        The dense multiplier column would roughly double the LU fill, so
        the factorisation covers the interior (u, p) block with one
        pressure DOF pinned; solve_stokes recovers the exact solution of
        the full multiplier-constrained system from it (the pinned system
        is consistent because the constraint column spans the pressure
        kernel) and verifies the residual against the full matrix.
        """
        if self._lu is None:
            a = self.matrix.tocsc()
            self._a_fd = a[self.free_dofs][:, self.dirichlet_dofs].tocsr()
            a_ff = a[self.free_dofs][:, self.free_dofs].tocsc()
            self._a_ff = a_ff.tocsr()
            nv = self.mesh.n_vertices
            # free ordering is [interior u1, interior u2, all p, multiplier]
            nf = a_ff.shape[0]
            self._p_mask_free = np.zeros(nf, dtype=bool)
            self._p_mask_free[nf - 1 - nv : nf - 1] = True
            self._c_free = np.asarray(a_ff[:, -1].todense()).ravel()[: nf - 1]
            k = sp.lil_matrix(a_ff[: nf - 1, : nf - 1])
            kpin = nf - 2  # last pressure DOF
            k[kpin, :] = 0.0
            k[:, kpin] = 0.0
            k[kpin, kpin] = 1.0
            self._kpin = kpin
            self._lu = spla.splu(k.tocsc())
        return self._lu


def assemble_stokes_matrix(mesh: Mesh, beta: float) -> StokesSystem:
    """Assemble the stabilised Q1-Q1 saddle-point matrix.

    Unknown ordering: u1 nodal block, u2 nodal block, p nodal block, one
    scalar multiplier enforcing mean-zero pressure.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"solvent fraction beta must lie in (0, 1], got {beta}")
    nv = mesh.n_vertices
    conn, w, dndx, dndy = _element_geometry(mesh)
    shape = _SHAPE[None, :, :]  # (1, qp, 4)

    # element blocks, shape (ne, 4, 4)
    kxx = np.einsum("eq,eqa,eqb->eab", w, dndx, dndx)
    kyy = np.einsum("eq,eqa,eqb->eab", w, dndy, dndy)
    kyx = np.einsum("eq,eqa,eqb->eab", w, dndy, dndx)
    a11 = 2.0 * beta * (kxx + 0.5 * kyy)
    a22 = 2.0 * beta * (kyy + 0.5 * kxx)
    a12 = beta * kyx  # test u1 row, trial u2 column
    # pressure-velocity coupling: (q_a, div u): gpx[a, b] = int phi_a dphi_b/dx
    gpx = np.einsum("eq,eqa,eqb->eab", w, shape, dndx)
    gpy = np.einsum("eq,eqa,eqb->eab", w, shape, dndy)
    # stabilisation: elementwise mass minus rank-one mean projection
    mass = np.einsum("eq,eqa,eqb->eab", w, shape, shape)
    mvec = np.einsum("eq,eqa->ea", w, shape)  # int phi_a per element
    area = w.sum(axis=1)
    stab = mass - mvec[:, :, None] * mvec[:, None, :] / area[:, None, None]

    rows_ab = np.repeat(conn, 4, axis=1).ravel()
    cols_ab = np.tile(conn, (1, 4)).ravel()

    def block(mat, roff, coff):
        # mat[e, a, b]: a indexes test rows, b trial columns
        return mat.reshape(mat.shape[0], -1).ravel(), rows_ab + roff, cols_ab + coff

    data, rows, cols = [], [], []
    for mat, roff, coff in (
        (a11, 0, 0),
        (a22, nv, nv),
        (a12, 0, nv),
        (a12.transpose(0, 2, 1), nv, 0),
        (-gpx, 2 * nv, 0),  # pressure test rows vs u1
        (-gpy, 2 * nv, nv),
        (-gpx.transpose(0, 2, 1), 0, 2 * nv),  # momentum rows vs p
        (-gpy.transpose(0, 2, 1), nv, 2 * nv),
        (-stab, 2 * nv, 2 * nv),
    ):
        d, r, c = block(mat, roff, coff)
        data.append(d)
        rows.append(r)
        cols.append(c)

    # mean-zero pressure multiplier column/row
    c_full = np.zeros(nv)
    np.add.at(c_full, conn.ravel(), mvec.ravel())
    ndof = 3 * nv + 1
    p_idx = 2 * nv + np.arange(nv)
    rows.append(p_idx)
    cols.append(np.full(nv, 3 * nv))
    data.append(c_full)
    rows.append(np.full(nv, 3 * nv))
    cols.append(p_idx)
    data.append(c_full)

    a = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ndof, ndof),
    ).tocsr()

    # forcing operator: momentum rhs for nodal (s11, s12, s22)
    # row u1_a gets sum_q w (S11 dNdx_a + S12 dNdy_a), S interpolated via N_b
    q11 = np.einsum("eq,eqa,eqb->eab", w, dndx, shape)
    q12 = np.einsum("eq,eqa,eqb->eab", w, dndy, shape)
    fdata, frows, fcols = [], [], []
    for mat, roff, coff in (
        (q11, 0, 0),        # u1 <- s11
        (q12, 0, nv),       # u1 <- s12
        (q11, nv, nv),      # u2 <- s12
        (q12, nv, 2 * nv),  # u2 <- s22
    ):
        d, r, c = block(mat, roff, coff)
        fdata.append(d)
        frows.append(r)
        fcols.append(c)
    forcing = sp.coo_matrix(
        (np.concatenate(fdata), (np.concatenate(frows), np.concatenate(fcols))),
        shape=(2 * nv, 3 * nv),
    ).tocsr()

    boundary, lid_row = _boundary_vertex_mask(mesh)
    bidx = np.flatnonzero(boundary)
    dirichlet = np.concatenate([bidx, bidx + nv])
    free = np.setdiff1d(np.arange(ndof), dirichlet, assume_unique=False)
    return StokesSystem(
        mesh=mesh,
        beta=beta,
        matrix=a,
        forcing_op=forcing,
        dirichlet_dofs=dirichlet,
        free_dofs=free,
        lid_vertex_mask=lid_row,
        pressure_weights=c_full,
    )


def dirichlet_values(sys: StokesSystem, t, profile: LidProfile):
    """Prescribed velocity at the Dirichlet DOFs (nodal lid interpolation)."""
    nv = sys.mesh.n_vertices
    u1 = np.zeros(nv)
    lid = sys.lid_vertex_mask
    xs = sys.mesh.vertex_coords()[lid, 0]
    u1[lid] = lid_velocity(xs, t, profile)
    full = np.concatenate([u1, np.zeros(nv)])
    return full[sys.dirichlet_dofs]


def assemble_rhs(sys: StokesSystem, conf, wi, t, profile: LidProfile, body_force=None):
    """Right-hand side for one time step.

    Momentum rows get ((beta-1)/wi) * int S : eps(v) for the lagged
    conformation field; Dirichlet rows carry the interpolated lid values;
    continuity and multiplier rows are zero.  ``body_force`` is an optional
    callable f(x, y) -> (2,) used by manufactured-solution studies.
    """
    if wi <= 0.0:
        raise ValueError(f"Weissenberg number must be positive, got {wi}")
    nv = sys.mesh.n_vertices
    rhs = np.zeros(sys.n_dofs)
    coeff = (sys.beta - 1.0) / wi
    if coeff != 0.0:
        sig = np.concatenate([conf.values[:, 0], conf.values[:, 1], conf.values[:, 2]])
        rhs[: 2 * nv] = coeff * (sys.forcing_op @ sig)
    if body_force is not None:
        rhs[: 2 * nv] += assemble_body_force(sys.mesh, body_force)
    rhs[sys.dirichlet_dofs] = dirichlet_values(sys, t, profile)
    return rhs


def assemble_body_force(mesh: Mesh, f):
    """Momentum load vector int f . v via 3x3 Gauss quadrature."""
    n = mesh.n
    stride = n + 1
    g3, w3 = np.polynomial.legendre.leggauss(3)
    g3 = 0.5 * (g3 + 1.0)
    w3 = 0.5 * w3
    qpts = np.array([(a, b) for b in g3 for a in g3])
    qwts = np.array([wa * wb for wb in w3 for wa in w3])
    shape = np.stack(
        [
            (1 - qpts[:, 0]) * (1 - qpts[:, 1]),
            qpts[:, 0] * (1 - qpts[:, 1]),
            (1 - qpts[:, 0]) * qpts[:, 1],
            qpts[:, 0] * qpts[:, 1],
        ],
        axis=1,
    )
    dx, dy = mesh.element_widths()
    ii, jj = np.meshgrid(np.arange(n), np.arange(n))
    v00 = (jj * stride + ii).ravel()
    conn = np.stack([v00, v00 + 1, v00 + stride, v00 + stride + 1], axis=1)
    x0 = mesh.x_coords[ii.ravel()]
    y0 = mesh.y_coords[jj.ravel()]
    ex = np.tile(dx, n)
    ey = np.repeat(dy, n)
    out = np.zeros(2 * mesh.n_vertices)
    for q in range(qpts.shape[0]):
        px = x0 + qpts[q, 0] * ex
        py = y0 + qpts[q, 1] * ey
        fx, fy = f(px, py)
        wq = qwts[q] * ex * ey
        for a in range(4):
            np.add.at(out, conn[:, a], wq * shape[q, a] * fx)
            np.add.at(out, mesh.n_vertices + conn[:, a], wq * shape[q, a] * fy)
    return out


def solve_stokes(sys: StokesSystem, rhs, rel_tol=1e-10):
    """Solve the assembled system; returns (velocity, pressure).

    Dirichlet DOFs are eliminated against the cached LU factorisation of
    the interior block.  The pressure is re-centred to exact discrete mean
    zero after the solve to remove roundoff drift.
    """
    lu = sys.factorize()
    x = np.zeros(sys.n_dofs)
    x[sys.dirichlet_dofs] = rhs[sys.dirichlet_dofs]
    b_f = rhs[sys.free_dofs] - sys._a_fd @ x[sys.dirichlet_dofs]
    # multiplier value from summing the pressure-row equations
    lam = b_f[:-1][sys._p_mask_free[:-1]].sum()
    b_z = b_f[:-1] - lam * sys._c_free
    b_z[sys._kpin] = 0.0
    z = lu.solve(b_z)
    # shift the pressure constant so the mean-zero constraint row holds
    z[sys._p_mask_free[:-1]] -= sys._c_free @ z - b_f[-1]
    x_f = np.append(z, lam)
    norm_b = np.linalg.norm(b_f)
    res = np.linalg.norm(sys._a_ff @ x_f - b_f)
    rel = res / norm_b if norm_b > 0 else 0.0
    if not np.isfinite(rel) or rel > rel_tol:
        raise SolverError(
            f"Stokes solve failed: relative residual {rel:.3e} > {rel_tol:.1e}",
            residual_history=[rel],
        )
    x[sys.free_dofs] = x_f
    nv = sys.mesh.n_vertices
    u = np.column_stack([x[:nv], x[nv : 2 * nv]])
    p = x[2 * nv : 3 * nv]
    # re-centre: subtract the area-weighted mean (unit-area domain)
    p = p - sys.pressure_weights @ p
    sys.last_solve_info = {"relative_residual": float(rel), "method": "splu"}
    return VectorField(sys.mesh, u), ScalarField(sys.mesh, p)
