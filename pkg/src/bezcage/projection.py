"""Min-norm projection of raw coordinates onto exact linear reproduction.

The feasible set is {Phi : A Phi = q} where the first three rows of A hold
the control points (over phi) and the Neumann vectors (over psi), the last
row is 1 over phi and 0 over psi, and q = (eta, 1). The closest feasible
point to a raw vector is Phi + A^T (A A^T)^{-1} (q - A Phi).
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConditioningError, RankError

MAX_CONDITION = 1e14


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    A: np.ndarray
    n_phi: int
    rank: int
    condition: float
    _factor: tuple

    @property
    def n_columns(self) -> int:
        return self.A.shape[1]

    def solve(self, rhs):
        """(A A^T)^{-1} rhs for a (4,) or (4, k) right-hand side."""
        return linalg.cho_solve(self._factor, rhs)


def build_system(positions, neumann) -> ConstraintSystem:
    """Constraint system from stacked control points and Neumann vectors."""
    b = np.asarray(positions, dtype=np.float64)
    nv = np.asarray(neumann, dtype=np.float64)
    n_phi = b.shape[0]
    A = np.zeros((4, n_phi + nv.shape[0]))
    A[:3, :n_phi] = b.T
    A[3, :n_phi] = 1.0
    A[:3, n_phi:] = nv.T
    A.setflags(write=False)
    rank = int(np.linalg.matrix_rank(A))
    if rank < 4:
        raise RankError(f"constraint matrix has rank {rank} < 4; the cage is degenerate (flat or collapsed)")
    gram = A @ A.T
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        lo = b.min(axis=0)
        hi = b.max(axis=0)
        raise ConditioningError(
            f"A A^T condition number {cond:.3g} exceeds {MAX_CONDITION:g}; "
            f"cage bounds {lo.tolist()} .. {hi.tolist()} -- recentre or rescale the cage"
        )
    return ConstraintSystem(A, n_phi, rank, cond, linalg.cho_factor(gram))


def constraint_matrix(cage, net_normals=None, variant="normals") -> ConstraintSystem:
    """Assemble A for a cage with columns in coordinate-table order."""
    from .deformation import neumann_vectors

    return build_system(cage.control_points, neumann_vectors(cage, variant, net_normals))


def _targets(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return np.hstack([pts, np.ones((pts.shape[0], 1))])


def project_rows(system: ConstraintSystem, points, raw) -> np.ndarray:
    """Project every row of ``raw`` (V, D) for the matching query point."""
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    q = _targets(points)
    out = raw.copy()
    # the second pass removes the rounding left by the first
    for _ in range(2):
        resid = q - out @ system.A.T
        out += system.solve(resid.T).T @ system.A
    return out


def project_row(system: ConstraintSystem, eta, raw) -> np.ndarray:
    return project_rows(system, eta, raw)[0]


def project_table(system: ConstraintSystem, table, points):
    """Projected copy of a :class:`CoordinateTable`."""
    return table.with_values(project_rows(system, points, table.stacked()), projected=True)


def residual(system: ConstraintSystem, points, values) -> np.ndarray:
    """Per-row |A Phi - q| (Euclidean over the four constraints)."""
    values = np.atleast_2d(values)
    return np.linalg.norm(values @ system.A.T - _targets(points), axis=1)
