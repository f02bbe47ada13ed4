import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from bezcage import (
    Cage,
    apply_deformation,
    cage_sigma,
    compute_coordinates,
    deform,
    deform_with_data,
    neumann_vectors,
    scale_factor_L,
    sigma_coefficients,
)
from bezcage.errors import CageError, StructureError
from bezcage.shapes import bend, cube_cage

from .conftest import interior_points, random_tensor


@pytest.fixture(scope="module")
def setup(round_cage):
    rng = np.random.default_rng(11)
    pts = interior_points(round_cage, 40, rng)
    return pts, compute_coordinates(round_cage, pts)


def _frobenius_oracle(bu, bv, tu, tv):
    # ||T B^+||_F / sqrt(2), the RMS stretch of the tangent map
    B = np.column_stack([bu, bv])
    T = np.column_stack([tu, tv])
    return np.linalg.norm(T @ np.linalg.pinv(B)) / np.sqrt(2)


def test_scale_factor_cases(rng):
    bu, bv = rng.standard_normal((2, 3))
    assert scale_factor_L((bu, bv), (bu, bv)) == pytest.approx(1.0, abs=1e-14)
    R = Rotation.random(random_state=2).as_matrix()
    assert scale_factor_L((bu, bv), (R @ bu, R @ bv)) == pytest.approx(1.0, abs=1e-12)
    assert scale_factor_L((bu, bv), (2.5 * bu, 2.5 * bv)) == pytest.approx(2.5, rel=1e-14)
    for _ in range(20):
        tu, tv = rng.standard_normal((2, 3))
        assert scale_factor_L((bu, bv), (tu, tv)) == pytest.approx(_frobenius_oracle(bu, bv, tu, tv), rel=1e-12)


def test_scale_factor_broadcasts(rng):
    b = rng.standard_normal((5, 2, 3))
    t = rng.standard_normal((5, 2, 3))
    out = scale_factor_L((b[:, 0], b[:, 1]), (t[:, 0], t[:, 1]))
    assert out.shape == (5,)
    assert out[3] == pytest.approx(scale_factor_L((b[3, 0], b[3, 1]), (t[3, 0], t[3, 1])), rel=1e-15)


def test_scale_factor_degenerate():
    with pytest.raises(CageError):
        scale_factor_L(([1, 0, 0], [2, 0, 0]), ([1, 0, 0], [0, 1, 0]))


@pytest.mark.parametrize("kind", ["round", "octahedron", "prism"])
def test_sigma_identity_scale_rigid(shipped, kind):
    cage = shipped[kind]
    R = Rotation.random(random_state=4).as_matrix()
    assert np.abs(cage_sigma(cage, cage) - 1).max() <= 1e-12
    assert np.abs(cage_sigma(cage, cage.map_points(lambda p: 2 * p)) - 0.5).max() <= 1e-6
    rigid = cage.map_points(lambda p: p @ R.T + [1, 2, 3])
    assert np.abs(cage_sigma(cage, rigid) - 1).max() <= 1e-9


def test_sigma_positive_under_bend(round_cage):
    sigma = cage_sigma(round_cage, round_cage.map_points(bend))
    assert np.all(np.isfinite(sigma)) and np.all(sigma > 0)
    assert sigma.shape == (96,)


def test_sigma_resolution_checks(rng):
    p = random_tensor(rng)
    with pytest.raises(ValueError):
        sigma_coefficients(p, p, quad_res=3)
    with pytest.raises(StructureError):
        sigma_coefficients(p, random_tensor(rng, 2, 3))


def test_sigma_degenerate_target():
    src = cube_cage().patches[0]
    flat = src.with_points(np.zeros((4, 3)))
    with pytest.raises(CageError):
        sigma_coefficients(src, flat)


def test_identity(round_cage, setup):
    pts, table = setup
    out = deform(table, round_cage, round_cage)
    assert np.abs(out - pts).max() <= 1e-9 * round_cage.diameter


def test_translation(round_cage, setup):
    pts, table = setup
    shift = np.array([0.5, -2.0, 1.25])
    out = deform(table, round_cage, round_cage.map_points(lambda p: p + shift))
    assert np.abs(out - (pts + shift)).max() <= 1e-9 * round_cage.diameter


def test_rotation(round_cage, setup):
    pts, table = setup
    R = Rotation.random(random_state=9).as_matrix()
    out = deform(table, round_cage, round_cage.map_points(lambda p: p @ R.T))
    assert np.abs(out - pts @ R.T).max() <= 1e-9 * round_cage.diameter


def test_crossprod_identity_and_rotation(round_cage, setup):
    pts, _ = setup
    table = compute_coordinates(round_cage, pts, variant="crossprod")
    assert np.abs(deform(table, round_cage, round_cage) - pts).max() <= 1e-9 * round_cage.diameter
    R = Rotation.random(random_state=5).as_matrix()
    out = deform(table, round_cage, round_cage.map_points(lambda p: p @ R.T))
    assert np.abs(out - pts @ R.T).max() <= 1e-9 * round_cage.diameter


def test_affine_in_target_data(round_cage, setup, rng):
    _, table = setup
    t1 = round_cage.map_points(bend)
    t2 = round_cage.map_points(lambda p: p + 0.1 * rng.standard_normal(p.shape))
    sigma = cage_sigma(round_cage, t1)
    d1 = (t1.control_points, neumann_vectors(t1))
    d2 = (t2.control_points, neumann_vectors(t2))
    a = 0.3
    mixed = deform_with_data(table, a * d1[0] + (1 - a) * d2[0], a * d1[1] + (1 - a) * d2[1], sigma)
    expect = a * deform_with_data(table, *d1, sigma) + (1 - a) * deform_with_data(table, *d2, sigma)
    assert np.abs(mixed - expect).max() <= 1e-12


def test_bit_stable(round_cage, setup):
    _, table = setup
    target = round_cage.map_points(bend)
    assert np.array_equal(deform(table, round_cage, target), deform(table, round_cage, target))


def test_structure_mismatch(round_cage, setup, cube):
    _, table = setup
    with pytest.raises(StructureError, match="patch 0"):
        apply_deformation(table, cube, np.ones(96))
    with pytest.raises(StructureError, match="5 patches"):
        apply_deformation(table, Cage(round_cage.patches[:5]), np.ones(80))


def test_sigma_required(round_cage, setup):
    _, table = setup
    with pytest.raises(ValueError):
        apply_deformation(table, round_cage)
    with pytest.raises(ValueError):
        apply_deformation(table, round_cage, np.ones(3))


def test_bend_variants_agree():
    # degree-3 cube so that bending produces curved target patches
    source = cube_cage(1.0, 3)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.8, 0.8, size=(50, 3))
    target = source.map_points(bend)
    a = deform(compute_coordinates(source, pts), source, target)
    b = deform(compute_coordinates(source, pts, variant="crossprod"), source, target)
    assert np.abs(a - b).max() <= 0.05 * source.diameter
