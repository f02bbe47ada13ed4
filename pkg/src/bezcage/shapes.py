"""Ready-made cages, test meshes and target deformations."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .cage import Cage, EmbeddedMesh, TrianglePatch, elevate_quad_cage, triangle_index

SHIPPED = ("cube", "round", "octahedron", "prism")

# cube corners are indexed by their (x, y, z) sign bits


def _corner(bits, half):
    return np.array([half if bits & 1 else -half, half if bits & 2 else -half, half if bits & 4 else -half])


def cube_quads(half: float = 1.0) -> np.ndarray:
    """The six faces of [-half, half]^3 as outward quads, shape (6, 4, 3)."""
    faces = [
        (0, 2, 3, 1),  # z = -1
        (4, 5, 7, 6),  # z = +1
        (0, 1, 5, 4),  # y = -1
        (2, 6, 7, 3),  # y = +1
        (0, 4, 6, 2),  # x = -1
        (1, 3, 7, 5),  # x = +1
    ]
    return np.array([[_corner(b, half) for b in f] for f in faces])


def cube_cage(half: float = 1.0, degree: int = 1) -> Cage:
    """Axis-aligned cube of degree-(d, d) planar patches."""
    return elevate_quad_cage(cube_quads(half), degree)


def inflate(points, beta: float = 0.3, radius2: float = 3.0):
    """p (1 + beta (1 - |p|^2 / radius2)): pushes face interiors outward."""
    p = np.asarray(points, dtype=np.float64)
    r2 = np.einsum("ij,ij->i", p, p)
    return p * (1.0 + beta * (1.0 - r2 / radius2))[:, None]


def round_cage(beta: float = 0.3) -> Cage:
    """Six bicubic patches: the elevated unit cube with bulging faces."""
    return cube_cage(1.0, 3).map_points(lambda p: inflate(p, beta))


def _flat_triangle(corners, ids, n):
    """Degree-n control net of a flat triangle. ``corners`` are (A, B, C) at
    (i, j, k) = (n, 0, 0), (0, n, 0), (0, 0, n); ids fix a global summation
    order so shared edges agree bitwise."""
    pts = np.empty(((n + 1) * (n + 2) // 2, 3))
    order = np.argsort(ids)
    for i in range(n + 1):
        for j in range(n + 1 - i):
            w = np.array([i, j, n - i - j], dtype=np.float64) / n
            acc = np.zeros(3)
            for c in order:
                acc = acc + w[c] * corners[c]
            pts[triangle_index(n, i, j)] = acc
    return pts


def octahedron_cage(degree: int = 3, beta: float = 0.3) -> Cage:
    """Eight Bezier triangles on the unit octahedron, inflated."""
    verts = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.float64)
    faces = []
    for x in (0, 1):
        for y in (2, 3):
            for z in (4, 5):
                f = [x, y, z]
                a, b, c = verts[f]
                # order so that (A - C) x (B - C) points away from the origin
                if np.dot(np.cross(a - c, b - c), a + b + c) < 0:
                    f = [y, x, z]
                faces.append(f)
    patches = []
    for f in faces:
        pts = _flat_triangle(verts[f], np.array(f), degree)
        patches.append(TrianglePatch(degree, inflate(pts, beta, 1.0)))
    return Cage(tuple(patches))


def prism_cage(degree: int = 3) -> Cage:
    """Triangular prism: two Bezier triangle caps and three tensor sides."""
    ring = np.array([[np.cos(t), np.sin(t)] for t in 2 * np.pi * np.arange(3) / 3 + np.pi / 2])
    bottom = np.column_stack([ring, -np.ones(3)])
    top = np.column_stack([ring, np.ones(3)])
    verts = np.vstack([bottom, top])
    quads = []
    for s in range(3):
        t = (s + 1) % 3
        quads.append(verts[[s, t, t + 3, s + 3]])
    sides = elevate_quad_cage(quads, degree).patches
    top = [p.grid[:, -1] for p in sides]
    bottom = [p.grid[:, 0][::-1] for p in sides[::-1]]
    return Cage(tuple(sides) + (_cap(bottom, degree), _cap(top, degree)))


def _cap(edges, n):
    """Flat Bezier triangle whose boundary is the polylines C->A, A->B, B->C."""
    c, a, b = edges[0][0], edges[1][0], edges[2][0]
    pts = np.empty(((n + 1) * (n + 2) // 2, 3))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            pts[triangle_index(n, i, j)] = (i * a + j * b + (n - i - j) * c) / n
    # boundary points are copied so the seams with the sides are exact
    for t in range(n + 1):
        pts[triangle_index(n, t, 0)] = edges[0][t]
        pts[triangle_index(n, n - t, t)] = edges[1][t]
        pts[triangle_index(n, 0, n - t)] = edges[2][t]
    return TrianglePatch(n, pts)


def bend(points, amount: float = 0.3):
    """Bend about the y axis: x rotates the (x, z) frame by ``amount * x``."""
    p = np.asarray(points, dtype=np.float64)
    theta = amount * p[:, 0]
    c, s = np.cos(theta), np.sin(theta)
    out = p.copy()
    out[:, 0] = c * p[:, 0] - s * p[:, 2]
    out[:, 2] = s * p[:, 0] + c * p[:, 2]
    return out


def twist(points, amount: float = 0.5):
    """Rotate (x, y) about the z axis by ``amount * z``."""
    p = np.asarray(points, dtype=np.float64)
    theta = amount * p[:, 2]
    c, s = np.cos(theta), np.sin(theta)
    out = p.copy()
    out[:, 0] = c * p[:, 0] - s * p[:, 1]
    out[:, 1] = s * p[:, 0] + c * p[:, 1]
    return out


def icosphere(level: int = 5, radius: float = 0.97, center=(0.0, 0.0, 0.0)) -> EmbeddedMesh:
    """Subdivided icosahedron; level 5 has 10242 vertices."""
    t = (1.0 + 5**0.5) / 2.0
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]  # fmt: skip
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]  # fmt: skip
    verts = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in v]
    faces = np.array(f)
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    pts = radius * np.array(verts) + np.asarray(center, dtype=np.float64)
    return EmbeddedMesh(pts, faces)


def grid_points(count: int, half: float = 0.9, seed: int = 0) -> np.ndarray:
    """``count`` uniform random points in the cube [-half, half]^3."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-half, half, size=(count, 3))


def load_shipped(name: str) -> Cage:
    """One of the cage files bundled in ``bezcage/data``."""
    from .io import parse_cage

    if name not in SHIPPED:
        raise KeyError(f"no shipped cage {name!r}; choose from {SHIPPED}")
    text = resources.files("bezcage").joinpath("data", f"{name}.json").read_text()
    return parse_cage(text)


def build_shipped() -> dict:
    """The shipped cages, regenerated from their constructions."""
    return {"cube": cube_cage(), "round": round_cage(), "octahedron": octahedron_cage(), "prism": prism_cage()}
