import warnings

import numpy as np
import pytest

from bezcage import TensorPatch, TrianglePatch, control_net_normals, patch_partials, surface_normal
from bezcage.normals import ZeroNormalWarning

from .conftest import random_tensor, random_triangle


def _planar_grid(m, n):
    i, j = np.meshgrid(np.arange(m + 1) / m, np.arange(n + 1) / n, indexing="ij")
    return TensorPatch(m, n, np.stack([i, j, np.zeros_like(i)], -1).reshape(-1, 3))


def test_bilinear_corner_normal():
    nrm = control_net_normals(_planar_grid(1, 1))
    assert np.array_equal(nrm[0], [0, 0, 1])


def test_planar_bicubic_normals_are_unit_z():
    nrm = control_net_normals(_planar_grid(3, 3))
    assert np.allclose(nrm, [0, 0, 1], atol=1e-15)
    p = _planar_grid(3, 3)
    for u, v in [(0.2, 0.3), (0.9, 0.1)]:
        assert np.allclose(surface_normal(p, nrm, u, v), [0, 0, 1], atol=1e-15)


def test_corner_uses_single_wedge(rng):
    p = random_tensor(rng, 3, 2)
    g = p.grid
    nrm = control_net_normals(p).reshape(4, 3, 3)
    assert np.allclose(nrm[0, 0], 6 * np.cross(g[1, 0] - g[0, 0], g[0, 1] - g[0, 0]), atol=1e-14)


def test_transposed_patch_negates_normals(rng):
    p = random_tensor(rng)
    q = TensorPatch(3, 3, p.grid.transpose(1, 0, 2).reshape(-1, 3))
    a = control_net_normals(p).reshape(4, 4, 3)
    b = control_net_normals(q).reshape(4, 4, 3).transpose(1, 0, 2)
    assert np.allclose(a, -b, atol=1e-14)


def test_degree_one_normal_is_exact(rng):
    pts = rng.standard_normal((4, 3))
    p = TensorPatch(1, 1, pts)
    nrm = control_net_normals(p)
    for u, v in rng.uniform(size=(1000, 2)):
        bu, bv = patch_partials(p, u, v)
        assert np.allclose(surface_normal(p, nrm, u, v), np.cross(bu, bv), rtol=0, atol=1e-12)


def _max_angle(patch, rng, count=100):
    nrm = control_net_normals(patch)
    worst = 0.0
    done = 0
    while done < count:
        u, v = rng.uniform(size=2)
        if isinstance(patch, TrianglePatch) and u + v > 1:
            continue
        bu, bv = patch_partials(patch, u, v)
        exact = np.cross(bu, bv)
        approx = surface_normal(patch, nrm, u, v)
        cos = exact @ approx / np.linalg.norm(exact) / np.linalg.norm(approx)
        worst = max(worst, np.degrees(np.arccos(min(cos, 1.0))))
        done += 1
    return worst


@pytest.mark.parametrize("name", ["round", "octahedron", "prism"])
def test_curved_patch_normal_within_five_degrees(shipped, rng, name):
    for patch in shipped[name].patches:
        assert _max_angle(patch, rng) < 5.0


def test_rotation_and_scale(rng):
    from scipy.spatial.transform import Rotation

    p = random_tensor(rng)
    R = Rotation.random(random_state=1).as_matrix()
    base = control_net_normals(p)
    rotated = control_net_normals(p.with_points(p.control_points @ R.T))
    assert np.allclose(rotated, base @ R.T, atol=1e-12)
    scaled = control_net_normals(p.with_points(2.5 * p.control_points))
    assert np.allclose(scaled, 6.25 * base, atol=1e-12)


def test_triangle_interior_six_wedges():
    n = 3
    from bezcage import triangle_index

    pts = np.zeros((10, 3))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            pts[triangle_index(n, i, j)] = [i / n, j / n, 0]
    nrm = control_net_normals(TrianglePatch(n, pts))
    # flat net: every normal is n^2 times one small-triangle wedge, (1/n)^2 z
    assert np.allclose(nrm, [0, 0, 1], atol=1e-15)


def test_triangle_normals_point_outward_on_octahedron(shipped):
    for patch in shipped["octahedron"].patches:
        centre = patch.control_points.mean(axis=0)
        nrm = control_net_normals(patch)
        assert np.all(nrm @ centre > 0)


def test_zero_normal_warns():
    p = TensorPatch(1, 1, np.zeros((4, 3)))
    with pytest.warns(ZeroNormalWarning):
        control_net_normals(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        control_net_normals(p, warn=False)
