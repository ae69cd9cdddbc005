import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oldroydb import (
    ConfField,
    ScalarField,
    VectorField,
    build_ratio_graded_mesh,
    build_uniform_mesh,
    eval_conf,
    eval_scalar,
    eval_vector,
    sym_eigenvalues,
    vertex_averaged_gradient,
)
from oldroydb.fields import interpolation_weights, sym_eigenvalues_components


def nodal(mesh, fun):
    xy = mesh.vertex_coords()
    return fun(xy[:, 0], xy[:, 1])


def test_bilinear_reproduction(graded_mesh10, rng):
    # the interpolant reproduces per-element bilinear functions exactly;
    # a global a + bx + cy + dxy is bilinear on every rectangle
    f = lambda x, y: 2.0 + 3.0 * x - 1.5 * y + 5.0 * x * y
    field = ScalarField(graded_mesh10, nodal(graded_mesh10, f))
    pts = rng.uniform(0, 1, size=(200, 2))
    assert np.allclose(field.at(pts), f(pts[:, 0], pts[:, 1]), atol=1e-13)


def test_eval_wrappers(unit_mesh4):
    xy = unit_mesh4.vertex_coords()
    s = ScalarField(unit_mesh4, xy[:, 0])
    v = VectorField(unit_mesh4, xy)
    c = ConfField(unit_mesh4, np.column_stack([1 + xy[:, 0], xy[:, 1], np.ones(len(xy))]))
    assert np.isclose(eval_scalar(s, (0.3, 0.7)), 0.3)
    assert np.allclose(eval_vector(v, (0.3, 0.7)), [0.3, 0.7])
    m = eval_conf(c, (0.3, 0.7))
    assert np.allclose(m, [[1.3, 0.7], [0.7, 1.0]])
    assert m[0, 1] == m[1, 0]


def test_field_shape_validation(unit_mesh4):
    with pytest.raises(ValueError):
        ScalarField(unit_mesh4, np.zeros(7))
    with pytest.raises(ValueError):
        VectorField(unit_mesh4, np.zeros((25, 3)))
    with pytest.raises(ValueError):
        ConfField(unit_mesh4, np.zeros((25, 2)))


def test_identity_conformation(unit_mesh4):
    c = ConfField.identity(unit_mesh4)
    assert np.allclose(eval_conf(c, (0.37, 0.81)), np.eye(2))


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(0.0, 1.0, allow_nan=False),
    y=st.floats(0.0, 1.0, allow_nan=False),
)
def test_interpolation_weights_partition_of_unity(x, y):
    mesh = build_ratio_graded_mesh(10, gamma=0.8)
    corners, weights = interpolation_weights(mesh, [[x, y]])
    assert weights.shape == (1, 4) and corners.shape == (1, 4)
    assert np.all(weights >= 0.0)
    assert np.isclose(weights.sum(), 1.0, atol=1e-12)
    # weights reproduce the query point from the corner coordinates
    xy = mesh.vertex_coords()[corners[0]]
    assert np.allclose(weights[0] @ xy, [x, y], atol=1e-12)


def test_gradient_exact_for_affine(graded_mesh10):
    xy = graded_mesh10.vertex_coords()
    u = VectorField(
        graded_mesh10,
        np.column_stack([1.0 + 2.0 * xy[:, 0] - 3.0 * xy[:, 1], 0.5 * xy[:, 0] + 4.0 * xy[:, 1]]),
    )
    g = vertex_averaged_gradient(u)
    expected = np.array([[2.0, -3.0], [0.5, 4.0]])
    assert np.allclose(g, expected[None, :, :], atol=1e-12)


def test_gradient_matches_patch_average_quadrature(graded_mesh10):
    # independent oracle: average the interpolant's gradient over each
    # vertex patch with a dense midpoint rule on every element
    mesh = graded_mesh10
    xy = mesh.vertex_coords()
    u = VectorField(mesh, np.column_stack([xy[:, 0] ** 2, np.sin(3 * xy[:, 1]) * xy[:, 0]]))
    g = vertex_averaged_gradient(u)

    n = mesh.n
    k = 12
    for vi, vj in [(0, 0), (3, 0), (5, 5), (n, n), (2, n)]:
        num = np.zeros((2, 2))
        area = 0.0
        for ei in (vi - 1, vi):
            for ej in (vj - 1, vj):
                if not (0 <= ei < n and 0 <= ej < n):
                    continue
                x0, x1 = mesh.x_coords[ei], mesh.x_coords[ei + 1]
                y0, y1 = mesh.y_coords[ej], mesh.y_coords[ej + 1]
                gx = x0 + (x1 - x0) * (np.arange(k) + 0.5) / k
                gy = y0 + (y1 - y0) * (np.arange(k) + 0.5) / k
                pts = np.column_stack([np.repeat(gx, k), np.tile(gy, k)])
                h = 1e-7
                dux = (u.at(pts + [h, 0]) - u.at(pts - [h, 0])) / (2 * h)
                duy = (u.at(pts + [0, h]) - u.at(pts - [0, h])) / (2 * h)
                w = (x1 - x0) * (y1 - y0) / k**2
                num += w * np.stack([dux.sum(axis=0), duy.sum(axis=0)], axis=1)
                area += (x1 - x0) * (y1 - y0)
        idx = vj * (n + 1) + vi
        assert np.allclose(g[idx], num / area, atol=1e-5)


def test_sym_eigenvalues_against_eigvalsh(rng):
    for _ in range(50):
        a = rng.normal(size=(2, 2))
        s = a @ a.T + 0.01 * np.eye(2)
        lo, hi = sym_eigenvalues(s)
        ref = np.linalg.eigvalsh(s)
        assert np.allclose([lo, hi], ref, atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    s11=st.floats(-50, 50, allow_nan=False),
    s12=st.floats(-50, 50, allow_nan=False),
    s22=st.floats(-50, 50, allow_nan=False),
)
def test_sym_eigenvalue_invariants(s11, s12, s22):
    lo, hi = sym_eigenvalues_components(np.array([s11]), np.array([s12]), np.array([s22]))
    assert lo[0] <= hi[0]
    assert np.isclose(lo[0] + hi[0], s11 + s22, atol=1e-9)
    assert np.isclose(lo[0] * hi[0], s11 * s22 - s12**2, atol=1e-6)


def test_gradient_shape(unit_mesh4):
    u = VectorField(unit_mesh4, np.zeros((unit_mesh4.n_vertices, 2)))
    g = vertex_averaged_gradient(u)
    assert g.shape == (unit_mesh4.n_vertices, 2, 2)
    assert np.all(g == 0.0)
