"""Bernstein bases, patch evaluation and first partial derivatives."""

import numpy as np

from . import _kernels as K
from .errors import DomainError

_EPS = 1e-12


def _check_domain(patch, u, v):
    u = float(u)
    v = float(v)
    if patch.code == K.TENSOR:
        ok = -_EPS <= u <= 1 + _EPS and -_EPS <= v <= 1 + _EPS
    else:
        ok = u >= -_EPS and v >= -_EPS and u + v <= 1 + _EPS
    if not ok:
        raise DomainError(f"({u}, {v}) outside the {patch.kind} patch domain")
    return u, v


def _work():
    return np.empty(2 * (K.MAX_DEGREE + 1))


def basis_weights(patch, u, v) -> np.ndarray:
    """Basis weights at (u, v), one per control point in the patch's order.

    Tensor patches use B^m_i(u) B^n_j(v); Bezier triangles use
    n!/(i! j! k!) u^i v^j (1-u-v)^k.
    """
    u, v = _check_domain(patch, u, v)
    m, n = patch.degrees
    out = np.empty(len(patch))
    K.basis(patch.code, m, n, u, v, out, _work())
    return out


def basis_derivatives(patch, u, v):
    """(d/du, d/dv) of every basis function at (u, v)."""
    u, v = _check_domain(patch, u, v)
    m, n = patch.degrees
    du = np.empty(len(patch))
    dv = np.empty(len(patch))
    K.basis_derivs(patch.code, m, n, u, v, du, dv, _work())
    return du, dv


def patch_point(patch, u, v) -> np.ndarray:
    u, v = _check_domain(patch, u, v)
    m, n = patch.degrees
    out = np.empty(3)
    K.eval_point(patch.code, m, n, patch.control_points, u, v, np.empty(len(patch)), _work(), out)
    return out


def patch_points(patch, us, vs) -> np.ndarray:
    """Vectorised :func:`patch_point`; same arithmetic, sample by sample."""
    us = np.ascontiguousarray(us, dtype=np.float64).ravel()
    vs = np.ascontiguousarray(vs, dtype=np.float64).ravel()
    m, n = patch.degrees
    return K.points_batch(patch.code, m, n, patch.control_points, us, vs)


def patch_partials(patch, u, v):
    """Exact partial derivatives (b_u, b_v) at (u, v).

    For Bezier triangles these are directional derivatives along the u and
    v parameters (with 1-u-v varying accordingly).
    """
    u, v = _check_domain(patch, u, v)
    m, n = patch.degrees
    bu = np.empty(3)
    bv = np.empty(3)
    K.eval_partials(
        patch.code, m, n, patch.control_points, u, v, np.empty(len(patch)), np.empty(len(patch)), _work(), bu, bv
    )
    return bu, bv


def sample_basis(patch, us, vs, derivatives=False):
    """Basis matrices at many parameters.

    Returns ``lam`` of shape (S, ncp) and, with ``derivatives``, also the
    u- and v-derivative matrices.
    """
    us = np.ascontiguousarray(us, dtype=np.float64).ravel()
    vs = np.ascontiguousarray(vs, dtype=np.float64).ravel()
    m, n = patch.degrees
    lam, lu, lv = K.basis_batch(patch.code, m, n, us, vs, derivatives)
    if derivatives:
        return lam, lu, lv
    return lam
