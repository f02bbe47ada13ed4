"""Riemann-sum Green coordinates over Bezier cages."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .cage import Cage, EmbeddedMesh, require_valid
from .errors import ExteriorPointError
from .integration import DEFAULT_GRID, DEFAULT_LEVELS
from .normals import cage_net_normals

logger = logging.getLogger(__name__)

VARIANTS = {"normals": K.NORMALS, "crossprod": K.CROSSPROD}

# total solid angle must be within this of 4 pi for a point to count as inside
INTERIOR_TOL = 1e-2


class SkippedElementWarning(UserWarning):
    pass


def crossprod_pairs(ncp: int) -> np.ndarray:
    """Ordered control index pairs (a, b), a < b, in lexicographic order."""
    a, b = np.triu_indices(ncp, k=1)
    return np.stack([a, b], axis=1)


@dataclass(frozen=True)
class PatchLayout:
    kind: str
    degrees: tuple
    n_phi: int
    n_psi: int


def cage_layout(cage: Cage, variant: str = "normals") -> tuple:
    out = []
    for p in cage.patches:
        ncp = len(p)
        n_psi = ncp if variant == "normals" else ncp * (ncp - 1) // 2
        out.append(PatchLayout(p.kind, tuple(p.degrees), ncp, n_psi))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class CoordinateTable:
    """Per-vertex phi and psi weights, patch-major.

    ``omega`` is the total signed solid angle the Riemann elements subtend at
    each vertex and ``skipped`` counts elements dropped for a zero normal.
    """

    phi: np.ndarray
    psi: np.ndarray
    variant: str
    grid: int
    levels: int
    projected: bool
    layout: tuple
    omega: np.ndarray = field(default=None)
    skipped: np.ndarray = field(default=None)

    def __len__(self):
        return self.phi.shape[0]

    @property
    def phi_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([p.n_phi for p in self.layout])])

    @property
    def psi_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([p.n_psi for p in self.layout])])

    def patch_phi(self, k: int) -> np.ndarray:
        o = self.phi_offsets
        return self.phi[:, o[k] : o[k + 1]]

    def patch_psi(self, k: int) -> np.ndarray:
        o = self.psi_offsets
        return self.psi[:, o[k] : o[k + 1]]

    def stacked(self) -> np.ndarray:
        """(V, D) matrix [phi | psi], the vector the projection works on."""
        return np.hstack([self.phi, self.psi])

    def with_values(self, stacked: np.ndarray, projected: bool) -> "CoordinateTable":
        d = self.phi.shape[1]
        return replace(self, phi=stacked[:, :d].copy(), psi=stacked[:, d:].copy(), projected=projected)


def _accumulate(patch, net_normals, tess, eta, variant):
    m, n = patch.degrees
    uv = tess.flat()
    xyz = K.map_triangles(patch.code, m, n, patch.control_points, uv)
    ncp = len(patch)
    phi = np.zeros(ncp)
    psi = np.zeros(ncp if variant == K.NORMALS else ncp * (ncp - 1) // 2)
    nrm = np.zeros((ncp, 3)) if net_normals is None else np.ascontiguousarray(net_normals, dtype=np.float64)
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    _, skipped = K.accumulate(patch.code, m, n, patch.control_points, nrm, uv, xyz, eta, variant, phi, psi)
    return phi, psi, skipped


def patch_phi(patch, net_normals, tess, eta) -> np.ndarray:
    """Dirichlet weights of one patch: sum over elements t of lambda(c_t) omega_t / 4 pi."""
    phi, _, _ = _accumulate(patch, net_normals, tess, eta, K.NORMALS)
    return phi


def patch_psi(patch, net_normals, tess, eta) -> np.ndarray:
    """Neumann weights of one patch: sum over t of lambda(c_t) / |N(c_t)| * int_t G."""
    _, psi, skipped = _accumulate(patch, net_normals, tess, eta, K.NORMALS)
    if skipped:
        warnings.warn(f"{skipped} elements skipped: zero interpolated normal", SkippedElementWarning, stacklevel=2)
    return psi


def patch_psi_crossproduct(patch, tess, eta) -> np.ndarray:
    """Neumann weights for the pairwise cross products b_a x b_b, a < b.

    Uses the antisymmetric kernel lambda_u^a lambda_v^b - lambda_u^b lambda_v^a
    at each element centroid, converted from surface to parameter measure
    with the exact |b_u x b_v| there.
    """
    _, psi, skipped = _accumulate(patch, None, tess, eta, K.CROSSPROD)
    if skipped:
        warnings.warn(f"{skipped} elements skipped: singular parameterisation", SkippedElementWarning, stacklevel=2)
    return psi


@dataclass(frozen=True, eq=False)
class PackedCage:
    """Flat arrays describing a cage for the compiled engine."""

    kinds: np.ndarray
    degrees: np.ndarray
    ctrl_offsets: np.ndarray
    psi_offsets: np.ndarray
    ctrl: np.ndarray
    normals: np.ndarray

    @classmethod
    def from_cage(cls, cage: Cage, variant: str = "normals", net_normals=None) -> "PackedCage":
        if net_normals is None:
            net_normals = cage_net_normals(cage)
        layout = cage_layout(cage, variant)
        return cls(
            kinds=np.array([p.code for p in cage.patches], dtype=np.int64),
            degrees=np.array([p.degrees for p in cage.patches], dtype=np.int64),
            ctrl_offsets=np.concatenate([[0], np.cumsum([p.n_phi for p in layout])]).astype(np.int64),
            psi_offsets=np.concatenate([[0], np.cumsum([p.n_psi for p in layout])]).astype(np.int64),
            ctrl=np.ascontiguousarray(cage.control_points),
            normals=np.ascontiguousarray(np.concatenate(net_normals)),
        )


def _query_points(mesh) -> np.ndarray:
    if isinstance(mesh, EmbeddedMesh):
        pts = mesh.vertices
    else:
        pts = mesh
    return np.ascontiguousarray(np.asarray(pts, dtype=np.float64).reshape(-1, 3))


def cage_coordinates(
    cage: Cage,
    mesh,
    grid: int = DEFAULT_GRID,
    levels: int = DEFAULT_LEVELS,
    variant: str = "normals",
    validate: bool = True,
) -> CoordinateTable:
    """Raw (unprojected) Green coordinates of every mesh vertex.

    For each vertex and patch: invert the vertex onto the patch, tessellate
    the parameter domain around that seed, and accumulate the Riemann sums.
    Vertices whose total solid angle is not 4 pi within 1e-2 are outside the
    cage and rejected with their indices.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {sorted(VARIANTS)}, got {variant!r}")
    if grid < 2 or levels < 0:
        raise ValueError("grid must be >= 2 and levels >= 0")
    if validate:
        require_valid(cage)
    pts = _query_points(mesh)
    packed = PackedCage.from_cage(cage, variant)
    phi, psi, omega, skipped = K.cage_rows(
        pts,
        packed.kinds,
        packed.degrees,
        packed.ctrl_offsets,
        packed.psi_offsets,
        packed.ctrl,
        packed.normals,
        int(grid),
        int(levels),
        VARIANTS[variant],
    )
    outside = np.flatnonzero(np.abs(omega - K.FOUR_PI) >= INTERIOR_TOL)
    if outside.size:
        shown = ", ".join(str(i) for i in outside[:20])
        more = "" if outside.size <= 20 else f" (+{outside.size - 20} more)"
        raise ExteriorPointError(
            f"{outside.size} vertices are not inside the cage (0-based indices {shown}{more})", outside
        )
    if skipped.any():
        logger.warning("%d elements skipped for a zero normal", int(skipped.sum()))
    return CoordinateTable(
        phi=phi,
        psi=psi,
        variant=variant,
        grid=int(grid),
        levels=int(levels),
        projected=False,
        layout=cage_layout(cage, variant),
        omega=omega,
        skipped=skipped,
    )


def reconstruct(table: CoordinateTable, cage: Cage, net_normals=None) -> np.ndarray:
    """Sum of phi b + psi N over the source cage (no scale factors)."""
    from .deformation import neumann_vectors

    b = cage.control_points
    nv = neumann_vectors(cage, table.variant, net_normals)
    return table.phi @ b + table.psi @ nv
