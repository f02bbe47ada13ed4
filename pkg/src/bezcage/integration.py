"""Point inversion, seeded parameter tessellation and triangle kernels."""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K

DEFAULT_GRID = 8
DEFAULT_LEVELS = 4


@dataclass(frozen=True)
class ProjectedSeed:
    u_star: float
    v_star: float
    distance: float


@dataclass(frozen=True, eq=False)
class TessellationPattern:
    """Triangulation of a patch's parameter domain.

    ``triangles`` has shape (T, 3, 2) with counter-clockwise (u, v) corners;
    ``lattice`` holds the same corners as integers on the grid of spacing
    ``1 / resolution``.
    """

    triangles: np.ndarray
    lattice: np.ndarray
    resolution: int
    seed: tuple

    @property
    def centroids(self) -> np.ndarray:
        t = self.triangles
        return (t[:, 0] + t[:, 1] + t[:, 2]) / 3.0

    @property
    def areas(self) -> np.ndarray:
        t = self.triangles
        e1 = t[:, 1] - t[:, 0]
        e2 = t[:, 2] - t[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def __len__(self):
        return self.triangles.shape[0]

    def flat(self) -> np.ndarray:
        """(T, 6) layout used by the compiled kernels."""
        return np.ascontiguousarray(self.triangles.reshape(-1, 6))


def invert_point(patch, eta) -> ProjectedSeed:
    """Closest point on ``patch`` to ``eta`` by multi-start gradient descent.

    An 8x8 scan of the domain picks the three best starting parameters; each
    is refined by diagonally scaled gradient descent with backtracking and
    clamping to the domain (100 iterations at most, stop once a step is
    shorter than 1e-10). The best result over all starts is returned.
    """
    m, n = patch.degrees
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    u, v, d = K.invert(patch.code, m, n, patch.control_points, eta)
    return ProjectedSeed(float(u), float(v), float(d))


def build_uv_tessellation(patch_kind, seed, base=DEFAULT_GRID, levels=DEFAULT_LEVELS) -> TessellationPattern:
    """Seeded adaptive triangulation of the parameter domain.

    Starts from a uniform ``base`` x ``base`` grid (alternating diagonals for
    the square, the barycentric grid for the triangle). Round ``r = 1..levels``
    splits 1-to-4 every triangle whose centroid lies closer to the seed than
    ``2**-r`` times the domain diameter. A closing pass then removes hanging
    nodes: a triangle with extra nodes on one edge is fanned from the
    opposite corner, one with nodes on several edges from its centroid.
    Boundary edges always carry the finest spacing ``1 / (base * 2**levels)``,
    so neighbouring patches meet without cracks wherever their seeds are.
    ``resolution`` is ``3 * base * 2**levels`` so fan centroids stay on the
    integer lattice.
    """
    if base < 2:
        raise ValueError("base grid must be >= 2")
    if levels < 0:
        raise ValueError("levels must be >= 0")
    code = _kind_code(patch_kind)
    if isinstance(seed, ProjectedSeed):
        su, sv = seed.u_star, seed.v_star
    else:
        su, sv = seed
    tri, n_lat = K.lattice_tessellation(code, int(base), int(levels), float(su), float(sv))
    uv = K.lattice_to_uv(tri, n_lat)
    return TessellationPattern(uv.reshape(-1, 3, 2), tri.reshape(-1, 3, 2), int(n_lat), (float(su), float(sv)))


def _kind_code(kind):
    if kind in ("tensor", K.TENSOR):
        return K.TENSOR
    if kind in ("triangle", K.TRIANGLE):
        return K.TRIANGLE
    code = getattr(kind, "code", None)
    if code is None:
        raise ValueError(f"unknown patch kind {kind!r}")
    return code


def _xyz(*pts):
    out = []
    for p in pts:
        out.extend(float(c) for c in p)
    return out


def signed_solid_angle(p1, p2, p3, eta) -> float:
    """Signed solid angle of triangle (p1, p2, p3) as seen from ``eta``.

    Positive when the triangle's counter-clockwise normal points away from
    ``eta``. Zero-area triangles give 0.
    """
    return K.solid_angle(*_xyz(p1, p2, p3, eta))


def green_integral_triangle(p1, p2, p3, eta) -> float:
    """Integral of 1 / (4 pi |x - eta|) over the flat triangle, in closed form."""
    return K.green_integral(*_xyz(p1, p2, p3, eta))
