"""Bilinearly blended interior control points from four boundary polylines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cage import TensorPatch
from .errors import PatchError


def _polyline(points, name):
    p = np.array(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 2:
        raise PatchError(f"boundary {name} must be a list of at least two 3D points")
    if not np.all(np.isfinite(p)):
        raise PatchError(f"boundary {name} has non-finite coordinates")
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class BoundaryLoop:
    """Four control polylines of a tensor patch boundary.

    ``u0`` is s(0, v) and ``u1`` is s(1, v), both running in v; ``v0`` is
    s(u, 0) and ``v1`` is s(u, 1), both running in u. Adjacent polylines
    must share their corner points exactly.
    """

    u0: np.ndarray
    u1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        for name in ("u0", "u1", "v0", "v1"):
            object.__setattr__(self, name, _polyline(getattr(self, name), name))
        if len(self.u0) != len(self.u1):
            raise PatchError(f"s(0,v) has {len(self.u0)} points but s(1,v) has {len(self.u1)}")
        if len(self.v0) != len(self.v1):
            raise PatchError(f"s(u,0) has {len(self.v0)} points but s(u,1) has {len(self.v1)}")
        corners = {
            "(0,0)": (self.u0[0], self.v0[0]),
            "(0,1)": (self.u0[-1], self.v1[0]),
            "(1,0)": (self.u1[0], self.v0[-1]),
            "(1,1)": (self.u1[-1], self.v1[-1]),
        }
        for label, (a, b) in corners.items():
            if not np.array_equal(a, b):
                raise PatchError(f"corner {label} differs between adjacent boundary polylines: {a} vs {b}")

    @property
    def degrees(self) -> tuple:
        return len(self.v0) - 1, len(self.u0) - 1

    @classmethod
    def from_patch(cls, patch: TensorPatch) -> "BoundaryLoop":
        g = patch.grid
        return cls(g[0, :], g[-1, :], g[:, 0], g[:, -1])


def _pl(poly, t):
    """Piecewise-linear interpolant through ``poly`` at uniform knots, t in [0, 1]."""
    k = len(poly) - 1
    s = t * k
    i = min(int(np.floor(s)), k - 1)
    f = s - i
    if f == 0.0:
        return poly[i].copy()
    if f == 1.0:
        return poly[i + 1].copy()
    return (1.0 - f) * poly[i] + f * poly[i + 1]


def coons_point(loop: BoundaryLoop, u: float, v: float) -> np.ndarray:
    """Bilinearly blended Coons surface of the piecewise-linear boundaries."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError(f"(u, v) = ({u}, {v}) outside the unit square")
    s0v = _pl(loop.u0, v)
    s1v = _pl(loop.u1, v)
    su0 = _pl(loop.v0, u)
    su1 = _pl(loop.v1, u)
    c00, c01 = loop.u0[0], loop.u0[-1]
    c10, c11 = loop.u1[0], loop.u1[-1]
    ruled = (1 - u) * s0v + u * s1v + (1 - v) * su0 + v * su1
    bilinear = (1 - u) * (1 - v) * c00 + (1 - u) * v * c01 + u * (1 - v) * c10 + u * v * c11
    return ruled - bilinear


def fill_interior(loop: BoundaryLoop, m: int, n: int) -> TensorPatch:
    """Degree-(m, n) patch with the loop as boundary and a Coons interior.

    Boundary rows and columns are copied verbatim; b_ij = Cs(i/m, j/n) for
    the interior indices.
    """
    mm, nn = loop.degrees
    if (mm, nn) != (m, n):
        raise PatchError(f"boundary polylines imply degree ({mm}, {nn}), requested ({m}, {n})")
    grid = np.empty((m + 1, n + 1, 3))
    grid[0, :] = loop.u0
    grid[m, :] = loop.u1
    grid[:, 0] = loop.v0
    grid[:, n] = loop.v1
    for i in range(1, m):
        for j in range(1, n):
            grid[i, j] = coons_point(loop, i / m, j / n)
    return TensorPatch(m, n, grid.reshape(-1, 3))
