"""Control-net vertex normals and the interpolated surface normal field."""

import warnings

import numpy as np

from . import _kernels as K
from .basis import basis_weights
from .cage import triangle_index

# neighbour offsets around b_ij, in the order the wedges are swept
_TENSOR_RING = [(0, 1), (-1, 0), (0, -1), (1, 0)]
# neighbour offsets (di, dj, dk) around b_ijk
_TRIANGLE_RING = [(1, 0, -1), (0, 1, -1), (-1, 1, 0), (-1, 0, 1), (0, -1, 1), (1, -1, 0)]


class ZeroNormalWarning(UserWarning):
    pass


def _tensor_normals(patch):
    m, n = patch.degrees
    g = patch.grid
    out = np.zeros((m + 1, n + 1, 3))
    for i in range(m + 1):
        for j in range(n + 1):
            acc = np.zeros(3)
            wedges = 0
            for s in range(4):
                a = _TENSOR_RING[s]
                b = _TENSOR_RING[(s + 1) % 4]
                ia, ja = i + a[0], j + a[1]
                ib, jb = i + b[0], j + b[1]
                if 0 <= ia <= m and 0 <= ja <= n and 0 <= ib <= m and 0 <= jb <= n:
                    acc += np.cross(g[ia, ja] - g[i, j], g[ib, jb] - g[i, j])
                    wedges += 1
            out[i, j] = m * n / wedges * acc
    return out.reshape(-1, 3)


def _triangle_normals(patch):
    n = patch.degree
    out = np.zeros((len(patch), 3))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            k = n - i - j
            here = patch.point(i, j)
            acc = np.zeros(3)
            wedges = 0
            for s in range(6):
                a = _TRIANGLE_RING[s]
                b = _TRIANGLE_RING[(s + 1) % 6]
                na = (i + a[0], j + a[1], k + a[2])
                nb = (i + b[0], j + b[1], k + b[2])
                if min(na) >= 0 and min(nb) >= 0:
                    acc += np.cross(patch.point(na[0], na[1]) - here, patch.point(nb[0], nb[1]) - here)
                    wedges += 1
            out[triangle_index(n, i, j)] = n * n / wedges * acc
    return out


def control_net_normals(patch, warn=True) -> np.ndarray:
    """Unnormalised normal at every control point, same order as the points.

    Each normal is the sum of the cross products of consecutive net edges
    around the point, scaled by mn/W (tensor) or n^2/W (triangle) where W is
    the number of wedges present. Corners of a tensor patch therefore give
    mn (b_10 - b_00) x (b_01 - b_00) and interior points the four-wedge
    average.
    """
    if patch.code == K.TENSOR:
        out = _tensor_normals(patch)
    else:
        out = _triangle_normals(patch)
    if warn:
        zero = np.flatnonzero(~np.any(out, axis=1))
        if zero.size:
            warnings.warn(f"zero control-net normal at control indices {zero.tolist()}", ZeroNormalWarning, stacklevel=2)
    out.setflags(write=False)
    return out


def surface_normal(patch, net_normals, u, v) -> np.ndarray:
    """Basis-weighted blend of the control-net normals; approximates b_u x b_v."""
    return basis_weights(patch, u, v) @ np.asarray(net_normals)


def cage_net_normals(cage, warn=True) -> list:
    return [control_net_normals(p, warn=warn) for p in cage.patches]
