import numpy as np
import pytest

from oldroydb import (
    ConfField,
    ScalarField,
    VectorField,
    build_uniform_mesh,
    eigenvalue_fields,
    global_max_sigma11,
    midline_max_log_sigma11,
    sample_cross_section,
    vortex_center,
)
from oldroydb.postprocess import Metrics, compute_metrics


def test_sample_cross_section_horizontal(unit_mesh4):
    xy = unit_mesh4.vertex_coords()
    f = ScalarField(unit_mesh4, xy[:, 0] + 2 * xy[:, 1])
    s, vals = sample_cross_section(f, "horizontal", 0.75, n_samples=8)
    assert len(s) == 9  # n_samples intervals -> n_samples + 1 points
    assert s[0] == 0.0 and s[-1] == 1.0
    assert np.allclose(vals, s + 1.5, atol=1e-13)


def test_sample_cross_section_vertical_vector(unit_mesh4):
    xy = unit_mesh4.vertex_coords()
    u = VectorField(unit_mesh4, np.column_stack([xy[:, 1], -xy[:, 0]]))
    s, vals = sample_cross_section(u, "vertical", 0.5, n_samples=4)
    assert vals.shape == (5, 2)
    assert np.allclose(vals[:, 0], s) and np.allclose(vals[:, 1], -0.5)


def test_sample_abscissae_nest_on_doubling(unit_mesh4):
    f = ScalarField(unit_mesh4, np.zeros(unit_mesh4.n_vertices))
    s1, _ = sample_cross_section(f, "horizontal", 0.5, n_samples=8)
    s2, _ = sample_cross_section(f, "horizontal", 0.5, n_samples=16)
    assert np.allclose(s2[::2], s1)


def test_sample_cross_section_validation(unit_mesh4):
    f = ScalarField(unit_mesh4, np.zeros(unit_mesh4.n_vertices))
    with pytest.raises(Exception):
        sample_cross_section(f, "diagonal", 0.5)
    with pytest.raises(Exception):
        sample_cross_section(f, "horizontal", 1.5)


def test_midline_max_log_sigma11():
    mesh = build_uniform_mesh(8)
    xy = mesh.vertex_coords()
    # s11 peaks at y = 0.5 on the midline; the interpolant attains the
    # nodal value exactly there since 0.5 is a grid point
    s11 = 1.0 + xy[:, 1] * (1.0 - xy[:, 1]) * (1.0 + xy[:, 0])
    vals = np.column_stack([s11, np.zeros(len(xy)), np.ones(len(xy))])
    conf = ConfField(mesh, vals)
    assert np.isclose(midline_max_log_sigma11(conf), np.log(1.375), atol=1e-10)


def test_midline_rejects_nonpositive():
    mesh = build_uniform_mesh(4)
    vals = np.tile([1.0, 0.0, 1.0], (mesh.n_vertices, 1))
    vals[12, 0] = -0.5
    with pytest.raises(ValueError):
        midline_max_log_sigma11(ConfField(mesh, vals))


def test_global_max_sigma11(unit_mesh4):
    vals = np.tile([1.0, 0.0, 1.0], (unit_mesh4.n_vertices, 1))
    vals[7, 0] = 42.0
    assert global_max_sigma11(ConfField(unit_mesh4, vals)) == 42.0


def test_eigenvalue_fields(unit_mesh4, rng):
    nv = unit_mesh4.n_vertices
    base = rng.normal(size=(nv, 2, 2))
    spd = np.einsum("vij,vkj->vik", base, base) + 0.1 * np.eye(2)
    conf = ConfField(unit_mesh4, np.column_stack([spd[:, 0, 0], spd[:, 0, 1], spd[:, 1, 1]]))
    lo, hi = eigenvalue_fields(conf)
    for v in range(nv):
        ref = np.linalg.eigvalsh(spd[v])
        assert np.isclose(lo.values[v], ref[0]) and np.isclose(hi.values[v], ref[1])


def test_vortex_center_affine_field():
    mesh = build_uniform_mesh(16)
    xy = mesh.vertex_coords()
    # rigid rotation about (0.4, 0.6); the interpolant is exact for affine u
    u = VectorField(mesh, np.column_stack([-(xy[:, 1] - 0.6), xy[:, 0] - 0.4]))
    center, converged = vortex_center(u)
    assert converged
    assert np.allclose(center, [0.4, 0.6], atol=1e-9)


def test_vortex_center_unconverged_flag():
    mesh = build_uniform_mesh(8)
    vals = np.ones((mesh.n_vertices, 2))  # uniform flow: no stagnation point
    _, converged = vortex_center(VectorField(mesh, vals))
    assert not converged


def test_compute_metrics_roundtrip():
    mesh = build_uniform_mesh(8)
    xy = mesh.vertex_coords()
    u = VectorField(mesh, np.column_stack([-(xy[:, 1] - 0.5), xy[:, 0] - 0.5]))
    conf = ConfField.identity(mesh)
    m = compute_metrics(u, conf)
    assert isinstance(m, Metrics)
    assert np.isclose(m.max_ln_s11_midline, 0.0, atol=1e-12)
    assert m.max_s11_global == 1.0
    assert np.allclose(m.vortex_center, [0.5, 0.5], atol=1e-9)
    assert m.lambda_min_global == 1.0 and m.lambda_max_global == 1.0
    d = m.as_dict()
    assert isinstance(d["vortex_center"], list)
    assert set(d) == {
        "max_ln_s11_midline",
        "max_s11_global",
        "vortex_center",
        "lambda_min_global",
        "lambda_max_global",
    }
