"""Scale factors and the deformation map."""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .basis import sample_basis
from .coordinates import cage_layout, crossprod_pairs
from .errors import CageError, StructureError
from .normals import cage_net_normals, control_net_normals

DEFAULT_SIGMA_RES = 32


def neumann_vectors(cage, variant="normals", net_normals=None) -> np.ndarray:
    """Vectors the psi weights multiply, stacked patch-major.

    ``normals``: the control-net normals. ``crossprod``: b_a x b_b for every
    ordered control pair a < b.
    """
    if variant == "normals":
        if net_normals is None:
            net_normals = cage_net_normals(cage)
        return np.concatenate(net_normals)
    if variant == "crossprod":
        out = []
        for p in cage.patches:
            pairs = crossprod_pairs(len(p))
            pts = p.control_points
            out.append(np.cross(pts[pairs[:, 0]], pts[pairs[:, 1]]))
        return np.concatenate(out)
    raise ValueError(f"unknown variant {variant!r}")


def scale_factor_L(source_partials, target_partials):
    """Quasi-conformal length scale between source and target tangent frames.

    Arguments are ``(b_u, b_v)`` pairs; arrays of shape (..., 3) broadcast.
    """
    bu, bv = (np.asarray(x, dtype=np.float64) for x in source_partials)
    tu, tv = (np.asarray(x, dtype=np.float64) for x in target_partials)
    cross = np.cross(bu, bv)
    den = 2.0 * np.einsum("...i,...i->...", cross, cross)
    if np.any(den <= 0.0):
        raise CageError("degenerate source parameterisation (b_u x b_v = 0)")
    dot = lambda a, b: np.einsum("...i,...i->...", a, b)  # noqa: E731
    num = dot(tu, tu) * dot(bv, bv) + dot(bu, bu) * dot(tv, tv) - 2.0 * dot(tu, tv) * dot(bu, bv)
    return np.sqrt(num / den)


def _midpoint_samples(patch, r):
    if patch.code == K.TENSOR:
        t = (np.arange(r) + 0.5) / r
        uu, vv = np.meshgrid(t, t, indexing="ij")
        return uu.ravel(), vv.ravel(), np.full(r * r, 1.0 / (r * r))
    us, vs = [], []
    for a in range(r):
        for b in range(r - a):
            us.append((3 * a + 1) / (3 * r))
            vs.append((3 * b + 1) / (3 * r))
            if a + b <= r - 2:
                us.append((3 * a + 2) / (3 * r))
                vs.append((3 * b + 2) / (3 * r))
    return np.array(us), np.array(vs), np.full(len(us), 0.5 / (r * r))


def sigma_coefficients(source_patch, target_patch, quad_res=DEFAULT_SIGMA_RES, source_normals=None, target_normals=None):
    """Per-control Neumann scale factors of one patch.

    sigma_ij = int lambda_ij s^L |b_u x b_v| / int lambda_ij s^A |b_u x b_v|
    with s^A = |N~| / |N| from the interpolated control-net normals; both
    integrals use an r x r midpoint rule over the parameter domain.
    """
    r = int(quad_res)
    if r < 4:
        raise ValueError("quad_res must be >= 4")
    if source_patch.kind != target_patch.kind or source_patch.degrees != target_patch.degrees:
        raise StructureError("source and target patches differ in kind or degree")
    if source_normals is None:
        source_normals = control_net_normals(source_patch, warn=False)
    if target_normals is None:
        target_normals = control_net_normals(target_patch, warn=False)
    us, vs, w = _midpoint_samples(source_patch, r)
    lam, lu, lv = sample_basis(source_patch, us, vs, derivatives=True)
    b = source_patch.control_points
    t = target_patch.control_points
    bu, bv = lu @ b, lv @ b
    tu, tv = lu @ t, lv @ t
    jac = np.linalg.norm(np.cross(bu, bv), axis=1)
    s_len = scale_factor_L((bu, bv), (tu, tv))
    n_src = np.linalg.norm(lam @ source_normals, axis=1)
    n_tgt = np.linalg.norm(lam @ target_normals, axis=1)
    ok = n_src > 0.0
    s_area = np.zeros_like(n_src)
    s_area[ok] = n_tgt[ok] / n_src[ok]
    num = (w * s_len * jac) @ lam
    den = (w * s_area * jac * ok) @ lam
    if np.any(den <= 0.0):
        bad = np.flatnonzero(den <= 0.0).tolist()
        raise CageError(f"scale factor denominator vanishes at control indices {bad} (degenerate target normals)")
    return num / den


def cage_sigma(source, target, quad_res=DEFAULT_SIGMA_RES) -> np.ndarray:
    """Concatenated sigma factors for every patch, in psi column order."""
    check_structure(source, target)
    src_n = cage_net_normals(source, warn=False)
    tgt_n = cage_net_normals(target, warn=False)
    return np.concatenate(
        [
            sigma_coefficients(s, t, quad_res, sn, tn)
            for s, t, sn, tn in zip(source.patches, target.patches, src_n, tgt_n)
        ]
    )


def check_structure(source, target):
    if len(source) != len(target):
        raise StructureError(f"target has {len(target)} patches, source has {len(source)}")
    for k, (a, b) in enumerate(zip(source.patches, target.patches)):
        if a.kind != b.kind or a.degrees != b.degrees:
            raise StructureError(f"patch {k}: target is {b.kind} {b.degrees}, source is {a.kind} {a.degrees}")


def deform_with_data(table, positions, neumann, sigma=None) -> np.ndarray:
    """sum phi b~ + sigma psi n~ for explicit target data (linear in it)."""
    psi = table.psi if sigma is None else table.psi * np.asarray(sigma)[None, :]
    return table.phi @ np.asarray(positions) + psi @ np.asarray(neumann)


def apply_deformation(table, target_cage, sigma=None) -> np.ndarray:
    """Deformed vertex positions for a (normally projected) coordinate table.

    With the normal-based variant the psi weights are scaled by ``sigma``
    (see :func:`cage_sigma`); the cross-product variant uses the target's
    pairwise control-point cross products unscaled.
    """
    target_layout = cage_layout(target_cage, table.variant)
    if len(target_layout) != len(table.layout):
        raise StructureError(f"target has {len(target_layout)} patches, coordinates expect {len(table.layout)}")
    for k, (a, b) in enumerate(zip(table.layout, target_layout)):
        if a != b:
            raise StructureError(f"patch {k}: target is {b.kind} {b.degrees}, coordinates expect {a.kind} {a.degrees}")
    if table.variant == "normals":
        if sigma is None:
            raise ValueError("the normal-based variant needs sigma factors")
        sigma = np.asarray(sigma, dtype=np.float64)
        if sigma.shape != (table.psi.shape[1],):
            raise ValueError(f"sigma must have shape ({table.psi.shape[1]},), got {sigma.shape}")
    else:
        sigma = None
    return deform_with_data(table, target_cage.control_points, neumann_vectors(target_cage, table.variant), sigma)


def deform(table, source, target, quad_res=DEFAULT_SIGMA_RES) -> np.ndarray:
    """Compute sigma for ``target`` and apply the deformation."""
    check_structure(source, target)
    sigma = cage_sigma(source, target, quad_res) if table.variant == "normals" else None
    return apply_deformation(table, target, sigma)
