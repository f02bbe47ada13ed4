import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from bezcage import (
    Cage,
    build_uv_tessellation,
    cage_coordinates,
    control_net_normals,
    invert_point,
    patch_phi,
    patch_psi,
    patch_psi_crossproduct,
    reconstruct,
)
from bezcage.coordinates import crossprod_pairs
from bezcage.errors import ExteriorPointError

from .conftest import interior_points

CENTRE = np.zeros((1, 3))


@pytest.fixture(scope="module")
def cube_centre(cube):
    return cage_coordinates(cube, CENTRE)


def test_layout(cube_centre):
    assert cube_centre.phi.shape == (1, 24)
    assert cube_centre.psi.shape == (1, 24)
    assert not cube_centre.projected


def test_cube_face_sums(cube, cube_centre):
    for k in range(6):
        phi = cube_centre.patch_phi(k)[0]
        assert phi.sum() == pytest.approx(1 / 6, abs=2e-3)
        assert np.allclose(phi, 1 / 24, atol=2e-3)
    assert cube_centre.phi.sum() == pytest.approx(1.0, abs=5e-3)


def _psi_oracle(patch, eta, res=256):
    # midpoint rule of int lambda_00 G dA; |b_u x b_v| cancels the 1/|N| factor
    t = (np.arange(res) + 0.5) / res
    u, v = np.meshgrid(t, t, indexing="ij")
    g = patch.grid
    x = (
        ((1 - u) * (1 - v))[..., None] * g[0, 0]
        + ((1 - u) * v)[..., None] * g[0, 1]
        + (u * (1 - v))[..., None] * g[1, 0]
        + (u * v)[..., None] * g[1, 1]
    )
    r = np.linalg.norm(x - eta, axis=-1)
    return np.mean((1 - u) * (1 - v) / (4 * np.pi * r))


def test_cube_face_psi(cube, cube_centre):
    oracle = _psi_oracle(cube.patches[0], CENTRE[0])
    for k in range(6):
        psi = cube_centre.patch_psi(k)[0]
        assert np.all(psi > 0)
        assert np.ptp(psi) < 1e-6
        assert psi[0] == pytest.approx(oracle, rel=1e-3)


def test_single_patch_functions_match_table(round_cage, rng):
    eta = interior_points(round_cage, 1, rng)[0]
    table = cage_coordinates(round_cage, eta[None])
    cross = cage_coordinates(round_cage, eta[None], variant="crossprod")
    for k, patch in enumerate(round_cage.patches):
        tess = build_uv_tessellation(patch.code, invert_point(patch, eta))
        nrm = control_net_normals(patch)
        assert np.allclose(patch_phi(patch, nrm, tess, eta), table.patch_phi(k)[0], rtol=0, atol=1e-14)
        assert np.allclose(patch_psi(patch, nrm, tess, eta), table.patch_psi(k)[0], rtol=0, atol=1e-14)
        assert np.allclose(patch_psi_crossproduct(patch, tess, eta), cross.patch_psi(k)[0], rtol=0, atol=1e-14)


def test_psi_nonnegative(shipped, rng):
    for cage in shipped.values():
        t = cage_coordinates(cage, interior_points(cage, 5, rng))
        assert np.all(t.psi >= 0)
        assert np.all(np.isfinite(t.phi))


def test_patch_order_independence(round_cage, rng):
    pts = interior_points(round_cage, 5, rng)
    order = [3, 0, 5, 1, 4, 2]
    a = cage_coordinates(round_cage, pts)
    b = cage_coordinates(Cage(tuple(round_cage.patches[k] for k in order)), pts)
    for new, old in enumerate(order):
        assert np.array_equal(b.patch_phi(new), a.patch_phi(old))
        assert np.array_equal(b.patch_psi(new), a.patch_psi(old))


def test_vertex_order_independence(round_cage, rng):
    pts = interior_points(round_cage, 6, rng)
    a = cage_coordinates(round_cage, pts)
    b = cage_coordinates(round_cage, pts[::-1])
    assert np.array_equal(a.phi, b.phi[::-1]) and np.array_equal(a.psi, b.psi[::-1])


@pytest.mark.parametrize("name", ["round", "octahedron", "prism"])
def test_refinement_does_not_increase_error(shipped, rng, name):
    cage = shipped[name]
    pts = interior_points(cage, 20, rng)
    errs = []
    for levels in (1, 2, 4):
        t = cage_coordinates(cage, pts, 8, levels)
        errs.append(np.linalg.norm(reconstruct(t, cage) - pts, axis=1).max())
    assert errs[0] >= errs[1] >= errs[2]


def test_base_grid_convergence(round_cage, rng):
    pts = interior_points(round_cage, 10, rng)
    errs = []
    for g in (4, 8, 16):
        t = cage_coordinates(round_cage, pts, g, 2, "crossprod")
        errs.append(np.linalg.norm(reconstruct(t, round_cage) - pts, axis=1).max())
    assert errs[1] < errs[0] / 2.5 and errs[2] < errs[1] / 2.5


def test_rigid_and_scale(round_cage, rng):
    pts = interior_points(round_cage, 5, rng)
    base = cage_coordinates(round_cage, pts)
    R = Rotation.random(random_state=7).as_matrix()
    shift = np.array([0.3, -1.0, 2.0])
    moved = cage_coordinates(round_cage.map_points(lambda p: p @ R.T + shift), pts @ R.T + shift)
    assert np.allclose(moved.phi, base.phi, rtol=0, atol=1e-9)
    assert np.allclose(moved.psi, base.psi, rtol=0, atol=1e-9)
    scaled = cage_coordinates(round_cage.map_points(lambda p: 2.0 * p), 2.0 * pts)
    assert np.allclose(scaled.phi, base.phi, rtol=0, atol=1e-9)
    # psi carries G (1/length times area) over |N| (area): scales by 1/c
    assert np.allclose(scaled.psi, base.psi / 2.0, rtol=1e-9, atol=0)


def test_exterior_rejected(cube):
    pts = np.array([[0, 0, 0], [3, 0, 0], [0.5, 0.2, 0.1], [0, -5, 0]])
    with pytest.raises(ExteriorPointError) as err:
        cage_coordinates(cube, pts)
    assert list(err.value.indices) == [1, 3]


def test_crossprod_layout(round_cage):
    t = cage_coordinates(round_cage, CENTRE, variant="crossprod")
    assert t.patch_psi(0).shape == (1, 120)
    assert len(crossprod_pairs(16)) == 120
    assert np.all(crossprod_pairs(16)[:, 0] < crossprod_pairs(16)[:, 1])
    assert np.array_equal(t.phi, cage_coordinates(round_cage, CENTRE).phi)


def test_invalid_arguments(cube):
    with pytest.raises(ValueError):
        cage_coordinates(cube, CENTRE, variant="exact")
    with pytest.raises(ValueError):
        cage_coordinates(cube, CENTRE, grid=1)
