import numpy as np
import pytest

from bezcage import shapes


@pytest.fixture(scope="session")
def cube():
    return shapes.load_shipped("cube")


@pytest.fixture(scope="session")
def round_cage():
    return shapes.load_shipped("round")


@pytest.fixture(scope="session")
def shipped():
    return {name: shapes.load_shipped(name) for name in shapes.SHIPPED}


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_tensor(rng, m=3, n=3, bump=0.3):
    """Curved tensor patch over the unit square with random heights."""
    from bezcage import TensorPatch

    i, j = np.meshgrid(np.arange(m + 1) / m, np.arange(n + 1) / n, indexing="ij")
    z = bump * rng.standard_normal(i.shape)
    pts = np.stack([i, j, z], axis=-1) + 0.05 * rng.standard_normal(i.shape + (3,)) * [1, 1, 0]
    return TensorPatch(m, n, pts.reshape(-1, 3))


def random_triangle(rng, n=3, bump=0.3):
    from bezcage import TrianglePatch, triangle_index

    pts = np.empty(((n + 1) * (n + 2) // 2, 3))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            pts[triangle_index(n, i, j)] = [i / n, j / n, bump * rng.standard_normal()]
    return TrianglePatch(n, pts)


def interior_points(cage, count, rng, shrink=0.6):
    """Random points well inside a star-shaped cage around the origin."""
    from bezcage import winding_numbers

    out = []
    while len(out) < count:
        p = rng.uniform(-1, 1, size=(4 * count, 3)) * shrink
        w = winding_numbers(cage, p, res=16)
        out.extend(p[np.abs(w - 1) < 1e-6])
    return np.array(out[:count])


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
