import numpy as np
import pytest
from scipy import linalg

from bezcage import build_system, cage_coordinates, constraint_matrix, project_rows, project_table, reconstruct
from bezcage.errors import ConditioningError, RankError
from bezcage.projection import project_row, residual

from .conftest import interior_points


@pytest.fixture(scope="module")
def round_data(round_cage):
    rng = np.random.default_rng(5)
    pts = interior_points(round_cage, 10, rng)
    return pts, cage_coordinates(round_cage, pts), constraint_matrix(round_cage)


def test_cube_rank_and_columns(cube):
    system = constraint_matrix(cube)
    assert system.rank == 4
    assert system.n_columns == 48
    assert system.A.shape == (4, 48)
    assert np.all(system.A[3, :24] == 1) and np.all(system.A[3, 24:] == 0)


def test_collinear_input_is_rank_deficient():
    t = np.linspace(0, 1, 8)
    pts = np.column_stack([t, 2 * t, -t])
    with pytest.raises(RankError):
        build_system(pts, np.zeros((8, 3)))


def test_flat_double_sided_cage_keeps_full_rank():
    # both faces of one planar quad: the normal columns span the off-plane direction
    quad = np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]], dtype=float)
    normals = np.array([[0, 0, 1.0]] * 4 + [[0, 0, -1.0]] * 4)
    assert build_system(np.vstack([quad, quad]), normals).rank == 4


def test_far_offset_cage_is_ill_conditioned(cube):
    with pytest.raises(ConditioningError, match="recentre or rescale"):
        constraint_matrix(cube.map_points(lambda p: p + 1e4))


def test_projection_feasible(round_cage, round_data):
    pts, table, system = round_data
    proj = project_table(system, table, pts)
    assert proj.projected
    assert np.abs(proj.phi.sum(axis=1) - 1).max() <= 1e-14
    err = np.linalg.norm(reconstruct(proj, round_cage) - pts, axis=1)
    assert err.max() <= 1e-12 * round_cage.diameter
    assert residual(system, pts, proj.stacked()).max() <= 1e-12 * round_cage.diameter


def test_feasible_input_unchanged(round_data):
    pts, table, system = round_data
    once = project_rows(system, pts, table.stacked())
    twice = project_rows(system, pts, once)
    assert np.abs(twice - once).max() <= 1e-14


def test_minimum_norm(round_data, rng):
    pts, table, system = round_data
    raw = table.stacked()[0]
    proj = project_row(system, pts[0], raw)
    null = linalg.null_space(system.A)
    best = np.linalg.norm(proj - raw)
    for _ in range(100):
        other = proj + null @ rng.standard_normal(null.shape[1]) * 1e-3
        assert best <= np.linalg.norm(other - raw)


def test_correction_in_row_space(round_data):
    pts, table, system = round_data
    raw = table.stacked()
    delta = project_rows(system, pts, raw) - raw
    Q, _ = np.linalg.qr(system.A.T)
    for d in delta:
        off = d - Q @ (Q.T @ d)
        assert np.linalg.norm(off) <= 1e-12 * np.linalg.norm(d)


def test_crossprod_projection(round_cage, round_data):
    pts, _, _ = round_data
    table = cage_coordinates(round_cage, pts, variant="crossprod")
    system = constraint_matrix(round_cage, variant="crossprod")
    assert system.n_columns == 6 * (16 + 120)
    proj = project_table(system, table, pts)
    err = np.linalg.norm(reconstruct(proj, round_cage) - pts, axis=1)
    assert err.max() <= 1e-12 * round_cage.diameter
