"""Cage, patch and mesh types, cage validation, quad elevation and export."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import _kernels as K
from .errors import CageError, MeshError, PatchError

logger = logging.getLogger(__name__)


def _frozen_points(points, count, what):
    pts = np.array(points, dtype=np.float64)
    if pts.size != 3 * count:
        raise PatchError(f"{what} needs {count} control points, got {pts.size / 3:g}")
    pts = pts.reshape(count, 3)
    if not np.all(np.isfinite(pts)):
        raise PatchError(f"{what} has non-finite control point components")
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True, eq=False)
class TensorPatch:
    """Tensor-product Bezier patch of degree (m, n).

    Control points are stored i-major: index ``i * (n + 1) + j`` holds b_ij.
    """

    degree_u: int
    degree_v: int
    control_points: np.ndarray

    kind = "tensor"

    def __post_init__(self):
        m, n = int(self.degree_u), int(self.degree_v)
        if m < 1 or n < 1 or m > K.MAX_DEGREE or n > K.MAX_DEGREE:
            raise PatchError(f"tensor degree ({m}, {n}) outside 1..{K.MAX_DEGREE}")
        object.__setattr__(self, "degree_u", m)
        object.__setattr__(self, "degree_v", n)
        object.__setattr__(
            self, "control_points", _frozen_points(self.control_points, (m + 1) * (n + 1), f"degree-({m},{n}) patch")
        )

    @property
    def code(self) -> int:
        return K.TENSOR

    @property
    def degrees(self) -> tuple[int, int]:
        return self.degree_u, self.degree_v

    @property
    def grid(self) -> np.ndarray:
        """Control points as an (m+1, n+1, 3) view."""
        return self.control_points.reshape(self.degree_u + 1, self.degree_v + 1, 3)

    def __len__(self):
        return self.control_points.shape[0]

    def boundary_polylines(self) -> list[np.ndarray]:
        """Edge control polylines walked counter-clockwise around the domain."""
        g = self.grid
        return [g[:, 0], g[-1, :], g[::-1, -1], g[0, ::-1]]

    def with_points(self, points) -> "TensorPatch":
        return TensorPatch(self.degree_u, self.degree_v, points)


def triangle_index(n: int, i: int, j: int) -> int:
    """Position of b_ijk (k = n - i - j) in lexicographic (i, j) order."""
    return i * (n + 1) - i * (i - 1) // 2 + j


@dataclass(frozen=True, eq=False)
class TrianglePatch:
    """Bezier triangle of degree n with control points b_ijk, i + j + k = n.

    Points are ordered lexicographically in (i, j). The parameter (u, v)
    weights b_n00 at (1, 0), b_0n0 at (0, 1) and b_00n at (0, 0).
    """

    degree: int
    control_points: np.ndarray

    kind = "triangle"

    def __post_init__(self):
        n = int(self.degree)
        if n < 1 or n > K.MAX_DEGREE:
            raise PatchError(f"triangle degree {n} outside 1..{K.MAX_DEGREE}")
        object.__setattr__(self, "degree", n)
        object.__setattr__(
            self, "control_points", _frozen_points(self.control_points, (n + 1) * (n + 2) // 2, f"degree-{n} triangle")
        )

    @property
    def code(self) -> int:
        return K.TRIANGLE

    @property
    def degrees(self) -> tuple[int, int]:
        return self.degree, self.degree

    def __len__(self):
        return self.control_points.shape[0]

    def point(self, i, j):
        return self.control_points[triangle_index(self.degree, i, j)]

    def boundary_polylines(self) -> list[np.ndarray]:
        n = self.degree
        idx = [
            [triangle_index(n, t, 0) for t in range(n + 1)],
            [triangle_index(n, n - t, t) for t in range(n + 1)],
            [triangle_index(n, 0, n - t) for t in range(n + 1)],
        ]
        return [self.control_points[i] for i in idx]

    def with_points(self, points) -> "TrianglePatch":
        return TrianglePatch(self.degree, points)


Patch = Union[TensorPatch, TrianglePatch]


@dataclass(frozen=True, eq=False)
class Cage:
    """Closed, outward-oriented collection of Bezier patches."""

    patches: tuple
    orientation: str = "outward"
    names: tuple = field(default=())

    def __post_init__(self):
        patches = tuple(self.patches)
        if not patches:
            raise CageError("a cage needs at least one patch")
        for p in patches:
            if not isinstance(p, (TensorPatch, TrianglePatch)):
                raise CageError(f"not a patch: {type(p).__name__}")
        if self.orientation != "outward":
            raise CageError("only outward-oriented cages are supported")
        object.__setattr__(self, "patches", patches)
        object.__setattr__(self, "names", tuple(self.names))

    def __len__(self):
        return len(self.patches)

    def __iter__(self):
        return iter(self.patches)

    def __getitem__(self, k):
        return self.patches[k]

    @property
    def control_points(self) -> np.ndarray:
        return np.concatenate([p.control_points for p in self.patches])

    @property
    def diameter(self) -> float:
        pts = self.control_points
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def map_points(self, fn) -> "Cage":
        """New cage with ``fn`` applied to every patch's (ncp, 3) control block."""
        return Cage(tuple(p.with_points(fn(p.control_points)) for p in self.patches), self.orientation, self.names)

    def same_layout(self, other: "Cage") -> bool:
        return len(self) == len(other) and all(
            a.kind == b.kind and a.degrees == b.degrees for a, b in zip(self.patches, other.patches)
        )


@dataclass(frozen=True, eq=False)
class EmbeddedMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise MeshError(f"face index out of range for {len(v)} vertices")
        if not np.all(np.isfinite(v)):
            raise MeshError("mesh has non-finite vertex coordinates")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def with_vertices(self, vertices) -> "EmbeddedMesh":
        return EmbeddedMesh(vertices, self.faces)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    unmatched: list = field(default_factory=list)
    orientation_conflicts: list = field(default_factory=list)
    degenerate_patches: list = field(default_factory=list)
    signed_volume: float = 0.0

    @property
    def passed(self) -> bool:
        return not (self.unmatched or self.orientation_conflicts or self.degenerate_patches) and self.signed_volume > 0

    def __bool__(self):
        return self.passed

    def summary(self) -> str:
        if self.passed:
            return "cage ok"
        parts = []
        if self.unmatched:
            parts.append(f"{len(self.unmatched)} unmatched boundary polylines {self.unmatched}")
        if self.orientation_conflicts:
            parts.append(f"{len(self.orientation_conflicts)} orientation conflicts {self.orientation_conflicts}")
        if self.degenerate_patches:
            parts.append(f"degenerate patches {self.degenerate_patches}")
        if not parts and self.signed_volume <= 0:
            parts.append(f"enclosed volume {self.signed_volume:.6g} is not positive (normals point inward)")
        return "; ".join(parts)


def _polyline_key(poly: np.ndarray) -> bytes:
    return np.ascontiguousarray(poly, dtype=np.float64).tobytes()


def validate_cage(cage: Cage) -> ValidationReport:
    """Check watertightness, orientation and patch degeneracy.

    Two patches are glued along an edge when one's boundary control polyline
    is bitwise equal to the other's reversed. Same-direction matches mean one
    of the patches is flipped. A closed cage whose patches are all consistently
    flipped is caught by the sign of the enclosed volume.
    """
    report = ValidationReport()
    forward = {}
    for k, patch in enumerate(cage.patches):
        for e, poly in enumerate(patch.boundary_polylines()):
            forward.setdefault(_polyline_key(poly), []).append((k, e))

    for k, patch in enumerate(cage.patches):
        for e, poly in enumerate(patch.boundary_polylines()):
            mates = [x for x in forward.get(_polyline_key(poly[::-1]), []) if x != (k, e)]
            same = [x for x in forward[_polyline_key(poly)] if x != (k, e)]
            if same:
                report.orientation_conflicts.append((k, e))
            elif len(mates) != 1:
                report.unmatched.append((k, e))

    from .normals import control_net_normals

    for k, patch in enumerate(cage.patches):
        nrm = control_net_normals(patch, warn=False)
        if not np.any(nrm):
            report.degenerate_patches.append(k)

    if not report.unmatched and not report.orientation_conflicts:
        report.signed_volume = signed_volume(cage)
    return report


def signed_volume(cage: Cage, res: int = 16) -> float:
    """Volume enclosed by the tessellated cage (positive for outward normals)."""
    tri = _triangle_soup(cage, res)
    a, b, c = tri[:, 0:3], tri[:, 3:6], tri[:, 6:9]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def require_valid(cage: Cage) -> None:
    report = validate_cage(cage)
    if not report.passed:
        raise CageError(report.summary())


# ---------------------------------------------------------------------------
# Quad elevation


def _edge_points(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    # evaluated from the lexicographically smaller corner so that two quads
    # sharing the edge produce bitwise equal points
    flip = tuple(b) < tuple(a)
    if flip:
        a, b = b, a
    t = np.arange(d + 1) / d
    pts = (1.0 - t)[:, None] * a + t[:, None] * b
    return pts[::-1] if flip else pts


def elevate_quad_cage(quads: Sequence, target_degree: int) -> Cage:
    """Turn bilinear quads (q0, q1, q2, q3) into degree-(d, d) tensor patches.

    Control point (i, j) is placed at the bilinear point q(i/d, j/d) where
    q(u, v) = (1-u)(1-v) q0 + u(1-v) q1 + uv q2 + (1-u)v q3.
    """
    d = int(target_degree)
    if d < 1:
        raise PatchError(f"target degree must be >= 1, got {d}")
    patches = []
    for k, quad in enumerate(quads):
        q = np.asarray(quad, dtype=np.float64).reshape(4, 3)
        if len({tuple(p) for p in q}) < 4:
            raise PatchError(f"quad {k} has repeated corners")
        t = np.arange(d + 1) / d
        u = t[:, None, None]
        v = t[None, :, None]
        grid = (1 - u) * (1 - v) * q[0] + u * (1 - v) * q[1] + u * v * q[2] + (1 - u) * v * q[3]
        grid[:, 0] = _edge_points(q[0], q[1], d)
        grid[-1, :] = _edge_points(q[1], q[2], d)
        grid[:, -1] = _edge_points(q[3], q[2], d)
        grid[0, :] = _edge_points(q[0], q[3], d)
        patches.append(TensorPatch(d, d, grid.reshape(-1, 3)))
    return Cage(tuple(patches))


# ---------------------------------------------------------------------------
# Tessellated export


def _patch_grid(patch: Patch, res: int):
    """Sample parameters and triangle index triples for one patch."""
    r = int(res)
    if patch.code == K.TENSOR:
        t = np.arange(r + 1) / r
        uu, vv = np.meshgrid(t, t, indexing="ij")
        us, vs = uu.ravel(), vv.ravel()
        idx = np.arange((r + 1) ** 2).reshape(r + 1, r + 1)
        a = idx[:-1, :-1].ravel()
        b = idx[1:, :-1].ravel()
        c = idx[1:, 1:].ravel()
        d = idx[:-1, 1:].ravel()
        faces = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
        return us, vs, faces
    us, vs, lookup = [], [], {}
    for i in range(r + 1):
        for j in range(r + 1 - i):
            lookup[i, j] = len(us)
            us.append(i / r)
            vs.append(j / r)
    faces = []
    for i in range(r):
        for j in range(r - i):
            faces.append((lookup[i, j], lookup[i + 1, j], lookup[i, j + 1]))
            if i + j <= r - 2:
                faces.append((lookup[i + 1, j], lookup[i + 1, j + 1], lookup[i, j + 1]))
    return np.array(us), np.array(vs), np.array(faces, dtype=np.int64)


def tessellate_cage(cage: Cage, res: int) -> EmbeddedMesh:
    """Sample every patch on a uniform parameter grid and merge seam vertices.

    Tensor patches give 2 r^2 triangles and Bezier triangles r^2. Vertices
    are exact patch evaluations; coincident seam samples (equal to 1e-12 of
    the cage size) are merged onto the first occurrence.
    """
    if res < 1:
        raise ValueError("resolution must be >= 1")
    from .basis import patch_points

    verts, faces, offset = [], [], 0
    for patch in cage.patches:
        us, vs, f = _patch_grid(patch, res)
        verts.append(patch_points(patch, us, vs))
        faces.append(f + offset)
        offset += len(us)
    verts = np.concatenate(verts)
    faces = np.concatenate(faces)
    quantum = 1e-12 * max(cage.diameter, 1e-300)
    keys = np.round(verts / quantum).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return EmbeddedMesh(verts[first[order]], remap[inverse.ravel()][faces])


def _triangle_soup(cage: Cage, res: int) -> np.ndarray:
    mesh = tessellate_cage(cage, res)
    return mesh.vertices[mesh.faces].reshape(-1, 9)


def winding_numbers(cage: Cage, points, res: int = 32) -> np.ndarray:
    """Total signed solid angle of the tessellated cage around each point, over 4 pi."""
    tris = np.ascontiguousarray(_triangle_soup(cage, res))
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    return K.winding_sums(pts, tris) / K.FOUR_PI


INTERIOR_TOL = 1e-2


def exterior_vertices(cage: Cage, points, res: int = 32) -> np.ndarray:
    """Indices of points whose total solid angle misses 4 pi by 1e-2 or more."""
    w = winding_numbers(cage, points, res) * K.FOUR_PI
    return np.flatnonzero(np.abs(w - K.FOUR_PI) >= INTERIOR_TOL)
