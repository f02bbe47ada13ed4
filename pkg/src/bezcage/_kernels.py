"""Compiled numerical kernels.

Everything that runs inside the per-vertex coordinate loop lives here so the
public functions and the batch engine share one evaluation path. Patches are
passed as ``(kind, m, n, ctrl)`` where ``ctrl`` is the ``(ncp, 3)`` control
point block in canonical order.
"""

import math

import numpy as np
from numba import njit, prange

TENSOR = 0
TRIANGLE = 1

NORMALS = 0
CROSSPROD = 1

MAX_DEGREE = 16
FOUR_PI = 4.0 * math.pi

# relative band around each refinement radius; keeps mirror-symmetric seeds
# producing mirror-symmetric patterns when the seed carries solver noise
REFINE_TIE = 1e-9


def _binomials(n):
    table = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        for b in range(a + 1):
            table[a, b] = math.comb(a, b)
    return table


BINOM = _binomials(MAX_DEGREE)
FACT = np.array([float(math.factorial(k)) for k in range(MAX_DEGREE + 1)])


@njit(cache=True)
def n_controls(kind, m, n):
    if kind == TENSOR:
        return (m + 1) * (n + 1)
    return (n + 1) * (n + 2) // 2


# ---------------------------------------------------------------------------
# Bernstein bases


@njit(cache=True)
def _bernstein(n, t, out):
    # out[i] = C(n, i) t^i (1 - t)^(n - i), powers built by repeated products
    s = 1.0 - t
    p = 1.0
    for i in range(n + 1):
        out[i] = p
        p *= t
    q = 1.0
    for i in range(n, -1, -1):
        out[i] *= BINOM[n, i] * q
        q *= s


@njit(cache=True)
def _bernstein_deriv(n, t, out):
    s = 1.0 - t
    for i in range(n + 1):
        a = 0.0
        b = 0.0
        if i >= 1:
            a = BINOM[n - 1, i - 1] * t ** (i - 1) * s ** (n - i)
        if i <= n - 1:
            b = BINOM[n - 1, i] * t**i * s ** (n - 1 - i)
        out[i] = n * (a - b)


@njit(cache=True)
def basis(kind, m, n, u, v, out, work):
    """Fill ``out`` with the basis weights at (u, v); ``work`` needs 2*(MAX_DEGREE+1)."""
    if kind == TENSOR:
        bu = work[: m + 1]
        bv = work[MAX_DEGREE + 1 : MAX_DEGREE + 2 + n]
        _bernstein(m, u, bu)
        _bernstein(n, v, bv)
        c = 0
        for i in range(m + 1):
            for j in range(n + 1):
                out[c] = bu[i] * bv[j]
                c += 1
    else:
        w = 1.0 - u - v
        pu = work[: n + 1]
        pv = work[MAX_DEGREE + 1 : MAX_DEGREE + 2 + n]
        pu[0] = 1.0
        pv[0] = 1.0
        for i in range(1, n + 1):
            pu[i] = pu[i - 1] * u
            pv[i] = pv[i - 1] * v
        c = 0
        for i in range(n + 1):
            for j in range(n - i + 1):
                k = n - i - j
                out[c] = FACT[n] / (FACT[i] * FACT[j] * FACT[k]) * pu[i] * pv[j] * w**k
                c += 1


@njit(cache=True)
def basis_derivs(kind, m, n, u, v, du, dv, work):
    """Fill ``du``/``dv`` with the u- and v-derivatives of every basis function."""
    if kind == TENSOR:
        bu = work[: m + 1]
        bv = work[MAX_DEGREE + 1 : MAX_DEGREE + 2 + n]
        dbu = np.empty(m + 1)
        dbv = np.empty(n + 1)
        _bernstein(m, u, bu)
        _bernstein(n, v, bv)
        _bernstein_deriv(m, u, dbu)
        _bernstein_deriv(n, v, dbv)
        c = 0
        for i in range(m + 1):
            for j in range(n + 1):
                du[c] = dbu[i] * bv[j]
                dv[c] = bu[i] * dbv[j]
                c += 1
    else:
        w = 1.0 - u - v
        c = 0
        for i in range(n + 1):
            for j in range(n - i + 1):
                k = n - i - j
                coef = FACT[n] / (FACT[i] * FACT[j] * FACT[k])
                dk = 0.0
                if k >= 1:
                    dk = k * u**i * v**j * w ** (k - 1)
                di = 0.0
                if i >= 1:
                    di = i * u ** (i - 1) * v**j * w**k
                dj = 0.0
                if j >= 1:
                    dj = j * u**i * v ** (j - 1) * w**k
                du[c] = coef * (di - dk)
                dv[c] = coef * (dj - dk)
                c += 1


@njit(cache=True)
def eval_point(kind, m, n, ctrl, u, v, lam, work, out):
    basis(kind, m, n, u, v, lam, work)
    x = 0.0
    y = 0.0
    z = 0.0
    for c in range(ctrl.shape[0]):
        x += lam[c] * ctrl[c, 0]
        y += lam[c] * ctrl[c, 1]
        z += lam[c] * ctrl[c, 2]
    out[0] = x
    out[1] = y
    out[2] = z


@njit(cache=True)
def eval_partials(kind, m, n, ctrl, u, v, du, dv, work, bu, bv):
    basis_derivs(kind, m, n, u, v, du, dv, work)
    for a in range(3):
        bu[a] = 0.0
        bv[a] = 0.0
    for c in range(ctrl.shape[0]):
        for a in range(3):
            bu[a] += du[c] * ctrl[c, a]
            bv[a] += dv[c] * ctrl[c, a]


@njit(cache=True)
def points_batch(kind, m, n, ctrl, us, vs):
    out = np.empty((us.shape[0], 3))
    lam = np.empty(ctrl.shape[0])
    work = np.empty(2 * (MAX_DEGREE + 1))
    for s in range(us.shape[0]):
        eval_point(kind, m, n, ctrl, us[s], vs[s], lam, work, out[s])
    return out


@njit(cache=True)
def basis_batch(kind, m, n, us, vs, with_derivs):
    ncp = n_controls(kind, m, n)
    lam = np.empty((us.shape[0], ncp))
    lu = np.zeros((us.shape[0], ncp))
    lv = np.zeros((us.shape[0], ncp))
    work = np.empty(2 * (MAX_DEGREE + 1))
    for s in range(us.shape[0]):
        basis(kind, m, n, us[s], vs[s], lam[s], work)
        if with_derivs:
            basis_derivs(kind, m, n, us[s], vs[s], lu[s], lv[s], work)
    return lam, lu, lv


# ---------------------------------------------------------------------------
# Triangle kernels


@njit(cache=True)
def solid_angle(ax, ay, az, bx, by, bz, cx, cy, cz, ex, ey, ez):
    """Signed solid angle of triangle (a, b, c) seen from e."""
    e1x = bx - ax
    e1y = by - ay
    e1z = bz - az
    e2x = cx - ax
    e2y = cy - ay
    e2z = cz - az
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    nz = e1x * e2y - e1y * e2x
    scale = e1x * e1x + e1y * e1y + e1z * e1z + e2x * e2x + e2y * e2y + e2z * e2z
    if nx * nx + ny * ny + nz * nz <= (1e-15 * scale) ** 2:
        return 0.0
    ax -= ex
    ay -= ey
    az -= ez
    bx -= ex
    by -= ey
    bz -= ez
    cx -= ex
    cy -= ey
    cz -= ez
    la = math.sqrt(ax * ax + ay * ay + az * az)
    lb = math.sqrt(bx * bx + by * by + bz * bz)
    lc = math.sqrt(cx * cx + cy * cy + cz * cz)
    det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)
    ab = ax * bx + ay * by + az * bz
    bc = bx * cx + by * cy + bz * cz
    ca = cx * ax + cy * ay + cz * az
    den = la * lb * lc + ab * lc + bc * la + ca * lb
    return 2.0 * math.atan2(det, den)


@njit(cache=True)
def _edge_log(ax, ay, az, ra, bx, by, bz, rb, nx, ny, nz):
    # p0 log((R+ + l+) / (R- + l-)) for edge a->b; a, b relative to the query
    # point, ra, rb their lengths, n the unit normal
    sx = bx - ax
    sy = by - ay
    sz = bz - az
    le = math.sqrt(sx * sx + sy * sy + sz * sz)
    if le == 0.0:
        return 0.0
    inv = 1.0 / le
    sx *= inv
    sy *= inv
    sz *= inv
    p0 = ax * (sy * nz - sz * ny) + ay * (sz * nx - sx * nz) + az * (sx * ny - sy * nx)
    if p0 == 0.0:
        return 0.0
    lp = bx * sx + by * sy + bz * sz
    lm = ax * sx + ay * sy + az * sz
    if lp + lm >= 0.0:
        return p0 * math.log((rb + lp) / (ra + lm))
    # same value, written to avoid cancellation behind the edge
    return p0 * math.log((ra - lm) / (rb - lp))


@njit(cache=True)
def triangle_terms(ax, ay, az, bx, by, bz, cx, cy, cz, ex, ey, ez):
    """(signed solid angle, integral of 1/(4 pi |x - e|)) for flat triangle (a, b, c).

    The integral uses the edge formula: the log terms of the three edges
    plus the in-plane angle terms, which sum to -d times the solid angle
    (d the signed height of the triangle plane over e).
    """
    e1x = bx - ax
    e1y = by - ay
    e1z = bz - az
    e2x = cx - ax
    e2y = cy - ay
    e2z = cz - az
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    nz = e1x * e2y - e1y * e2x
    nn = math.sqrt(nx * nx + ny * ny + nz * nz)
    scale = e1x * e1x + e1y * e1y + e1z * e1z + e2x * e2x + e2y * e2y + e2z * e2z
    if nn <= 1e-15 * scale:
        return 0.0, 0.0
    ax -= ex
    ay -= ey
    az -= ez
    bx -= ex
    by -= ey
    bz -= ez
    cx -= ex
    cy -= ey
    cz -= ez
    la = math.sqrt(ax * ax + ay * ay + az * az)
    lb = math.sqrt(bx * bx + by * by + bz * bz)
    lc = math.sqrt(cx * cx + cy * cy + cz * cz)
    det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)
    den = (
        la * lb * lc
        + (ax * bx + ay * by + az * bz) * lc
        + (bx * cx + by * cy + bz * cz) * la
        + (cx * ax + cy * ay + cz * az) * lb
    )
    omega = 2.0 * math.atan2(det, den)
    inv = 1.0 / nn
    nx *= inv
    ny *= inv
    nz *= inv
    d = ax * nx + ay * ny + az * nz
    g = _edge_log(ax, ay, az, la, bx, by, bz, lb, nx, ny, nz)
    g += _edge_log(bx, by, bz, lb, cx, cy, cz, lc, nx, ny, nz)
    g += _edge_log(cx, cy, cz, lc, ax, ay, az, la, nx, ny, nz)
    g -= d * omega
    return omega, g / FOUR_PI


@njit(cache=True)
def green_integral(ax, ay, az, bx, by, bz, cx, cy, cz, ex, ey, ez):
    """Closed-form integral of 1/(4 pi |x - e|) over the flat triangle (a, b, c)."""
    return triangle_terms(ax, ay, az, bx, by, bz, cx, cy, cz, ex, ey, ez)[1]


# ---------------------------------------------------------------------------
# Point inversion


@njit(cache=True)
def _clamp(kind, u, v):
    if kind == TENSOR:
        return min(max(u, 0.0), 1.0), min(max(v, 0.0), 1.0)
    u = max(u, 0.0)
    v = max(v, 0.0)
    if u + v > 1.0:
        ex = 0.5 * (u + v - 1.0)
        u -= ex
        v -= ex
        if u < 0.0:
            u, v = 0.0, 1.0
        elif v < 0.0:
            u, v = 1.0, 0.0
    return u, v


@njit(cache=True)
def _sqdist(kind, m, n, ctrl, u, v, eta, lam, work, p):
    eval_point(kind, m, n, ctrl, u, v, lam, work, p)
    return (p[0] - eta[0]) ** 2 + (p[1] - eta[1]) ** 2 + (p[2] - eta[2]) ** 2


SCAN = 8
STARTS = 3
MAX_ITERS = 100
STEP_TOL = 1e-10


@njit(cache=True)
def invert(kind, m, n, ctrl, eta):
    """Closest-point parameters of ``eta`` on the patch; returns (u, v, distance)."""
    ncp = ctrl.shape[0]
    lam = np.empty(ncp)
    du = np.empty(ncp)
    dv = np.empty(ncp)
    work = np.empty(2 * (MAX_DEGREE + 1))
    p = np.empty(3)
    bu = np.empty(3)
    bv = np.empty(3)

    su = np.empty(STARTS)
    sv = np.empty(STARTS)
    sf = np.full(STARTS, np.inf)
    for a in range(SCAN):
        for b in range(SCAN):
            u = a / (SCAN - 1)
            v = b / (SCAN - 1)
            if kind == TRIANGLE and a + b > SCAN - 1:
                continue
            f = _sqdist(kind, m, n, ctrl, u, v, eta, lam, work, p)
            # insertion into the short list of best starts
            slot = STARTS
            while slot > 0 and f < sf[slot - 1]:
                slot -= 1
            if slot < STARTS:
                for q in range(STARTS - 1, slot, -1):
                    su[q] = su[q - 1]
                    sv[q] = sv[q - 1]
                    sf[q] = sf[q - 1]
                su[slot] = u
                sv[slot] = v
                sf[slot] = f

    best_u = su[0]
    best_v = sv[0]
    best_f = sf[0]
    for s in range(STARTS):
        if not np.isfinite(sf[s]):
            continue
        u = su[s]
        v = sv[s]
        f = sf[s]
        for _ in range(MAX_ITERS):
            eval_partials(kind, m, n, ctrl, u, v, du, dv, work, bu, bv)
            eval_point(kind, m, n, ctrl, u, v, lam, work, p)
            rx = p[0] - eta[0]
            ry = p[1] - eta[1]
            rz = p[2] - eta[2]
            gu = 2.0 * (rx * bu[0] + ry * bu[1] + rz * bu[2])
            gv = 2.0 * (rx * bv[0] + ry * bv[1] + rz * bv[2])
            hu = 2.0 * (bu[0] ** 2 + bu[1] ** 2 + bu[2] ** 2)
            hv = 2.0 * (bv[0] ** 2 + bv[1] ** 2 + bv[2] ** 2)
            # diagonal scaling of the gradient
            stu = -gu / hu if hu > 0.0 else -gu
            stv = -gv / hv if hv > 0.0 else -gv
            alpha = 1.0
            moved = False
            un = u
            vn = v
            fn = f
            for _ls in range(50):
                un, vn = _clamp(kind, u + alpha * stu, v + alpha * stv)
                fn = _sqdist(kind, m, n, ctrl, un, vn, eta, lam, work, p)
                if fn < f:
                    moved = True
                    break
                alpha *= 0.5
            if not moved:
                break
            step = math.sqrt((un - u) ** 2 + (vn - v) ** 2)
            u = un
            v = vn
            f = fn
            if step < STEP_TOL:
                break
        if f < best_f:
            best_u = u
            best_v = v
            best_f = f
    return best_u, best_v, math.sqrt(best_f)


# ---------------------------------------------------------------------------
# Seeded parameter-domain tessellation on an integer lattice of spacing 1/N


@njit(cache=True)
def _put(tri, t, ai, aj, bi, bj, ci, cj):
    tri[t, 0] = ai
    tri[t, 1] = aj
    tri[t, 2] = bi
    tri[t, 3] = bj
    tri[t, 4] = ci
    tri[t, 5] = cj


@njit(cache=True)
def _base_grid(kind, g, step):
    if kind == TENSOR:
        tri = np.empty((2 * g * g, 6), dtype=np.int64)
        t = 0
        for a in range(g):
            for b in range(g):
                i0 = a * step
                j0 = b * step
                i1 = i0 + step
                j1 = j0 + step
                if (a + b) % 2 == 0:
                    _put(tri, t, i0, j0, i1, j0, i1, j1)
                    _put(tri, t + 1, i0, j0, i1, j1, i0, j1)
                else:
                    _put(tri, t, i0, j0, i1, j0, i0, j1)
                    _put(tri, t + 1, i1, j0, i1, j1, i0, j1)
                t += 2
        return tri
    tri = np.empty((g * g, 6), dtype=np.int64)
    t = 0
    for a in range(g):
        for b in range(g - a):
            i0 = a * step
            j0 = b * step
            _put(tri, t, i0, j0, i0 + step, j0, i0, j0 + step)
            t += 1
            if a + b <= g - 2:
                _put(tri, t, i0 + step, j0, i0 + step, j0 + step, i0, j0 + step)
                t += 1
    return tri


@njit(cache=True)
def _refine_round(tri, n_lat, su, sv, radius):
    # lattice units scaled by 3 so centroids stay integral
    s = 3.0 * n_lat
    cu = s * su
    cv = s * sv
    lim = s * radius * (1.0 + REFINE_TIE)
    lim2 = lim * lim
    flag = np.zeros(tri.shape[0], dtype=np.bool_)
    count = 0
    for t in range(tri.shape[0]):
        du = (tri[t, 0] + tri[t, 2] + tri[t, 4]) - cu
        dv = (tri[t, 1] + tri[t, 3] + tri[t, 5]) - cv
        if du * du + dv * dv < lim2:
            flag[t] = True
            count += 1
    if count == 0:
        return tri
    out = np.empty((tri.shape[0] + 3 * count, 6), dtype=np.int64)
    q = 0
    for t in range(tri.shape[0]):
        if not flag[t]:
            out[q] = tri[t]
            q += 1
            continue
        ai = tri[t, 0]
        aj = tri[t, 1]
        bi = tri[t, 2]
        bj = tri[t, 3]
        ci = tri[t, 4]
        cj = tri[t, 5]
        abi = (ai + bi) // 2
        abj = (aj + bj) // 2
        bci = (bi + ci) // 2
        bcj = (bj + cj) // 2
        cai = (ci + ai) // 2
        caj = (cj + aj) // 2
        _put(out, q, ai, aj, abi, abj, cai, caj)
        _put(out, q + 1, abi, abj, bi, bj, bci, bcj)
        _put(out, q + 2, cai, caj, bci, bcj, ci, cj)
        _put(out, q + 3, abi, abj, bci, bcj, cai, caj)
        q += 4
    return out


@njit(cache=True)
def _on_boundary(kind, n_lat, ai, aj, bi, bj):
    if ai == 0 and bi == 0:
        return True
    if aj == 0 and bj == 0:
        return True
    if kind == TENSOR:
        return (ai == n_lat and bi == n_lat) or (aj == n_lat and bj == n_lat)
    return ai + aj == n_lat and bi + bj == n_lat


@njit(cache=True)
def _edge_nodes(kind, n_lat, mark, ai, aj, bi, bj):
    # lattice nodes strictly inside edge a->b that need to be edge vertices:
    # corners of other triangles, or every lattice point on the domain boundary
    length = max(abs(bi - ai), abs(bj - aj))
    if length < 2:
        return 0
    if _on_boundary(kind, n_lat, ai, aj, bi, bj):
        return length - 1
    di = (bi - ai) // length
    dj = (bj - aj) // length
    count = 0
    for k in range(1, length):
        if mark[(ai + k * di) * (n_lat + 1) + aj + k * dj]:
            count += 1
    return count


@njit(cache=True)
def _emit_edge(kind, n_lat, mark, ai, aj, bi, bj, poly, p):
    # append a and the required interior nodes of a->b, in 3x lattice units
    poly[p, 0] = 3 * ai
    poly[p, 1] = 3 * aj
    p += 1
    length = max(abs(bi - ai), abs(bj - aj))
    if length < 2:
        return p
    full = _on_boundary(kind, n_lat, ai, aj, bi, bj)
    di = (bi - ai) // length
    dj = (bj - aj) // length
    for k in range(1, length):
        ni = ai + k * di
        nj = aj + k * dj
        if full or mark[ni * (n_lat + 1) + nj]:
            poly[p, 0] = 3 * ni
            poly[p, 1] = 3 * nj
            p += 1
    return p


@njit(cache=True)
def _close(kind, tri, n_lat):
    """Make the refined triangulation conforming; output in 1/(3 n_lat) units.

    A triangle with extra nodes on a single edge is fanned from the opposite
    corner, one with nodes on several edges from its centroid. Boundary edges
    always receive every lattice node, so neighbouring patches meet without
    cracks whatever their seeds.
    """
    mark = np.zeros((n_lat + 1) * (n_lat + 1), dtype=np.bool_)
    for t in range(tri.shape[0]):
        for c in range(3):
            mark[tri[t, 2 * c] * (n_lat + 1) + tri[t, 2 * c + 1]] = True
    counts = np.empty((tri.shape[0], 3), dtype=np.int64)
    total = 0
    for t in range(tri.shape[0]):
        h = 0
        busy = 0
        for e in range(3):
            k = _edge_nodes(kind, n_lat, mark, tri[t, 2 * e], tri[t, 2 * e + 1], tri[t, (2 * e + 2) % 6], tri[t, (2 * e + 3) % 6])
            counts[t, e] = k
            h += k
            if k > 0:
                busy += 1
        if busy <= 1:
            total += h + 1
        else:
            total += h + 3
    out = np.empty((total, 6), dtype=np.int64)
    poly = np.empty((3 * n_lat + 3, 2), dtype=np.int64)
    q = 0
    for t in range(tri.shape[0]):
        busy = 0
        edge = -1
        for e in range(3):
            if counts[t, e] > 0:
                busy += 1
                edge = e
        if busy == 0:
            for c in range(6):
                out[q, c] = 3 * tri[t, c]
            q += 1
            continue
        if busy == 1:
            ai = tri[t, 2 * edge]
            aj = tri[t, 2 * edge + 1]
            bi = tri[t, (2 * edge + 2) % 6]
            bj = tri[t, (2 * edge + 3) % 6]
            ci = 3 * tri[t, (2 * edge + 4) % 6]
            cj = 3 * tri[t, (2 * edge + 5) % 6]
            p = _emit_edge(kind, n_lat, mark, ai, aj, bi, bj, poly, 0)
            poly[p, 0] = 3 * bi
            poly[p, 1] = 3 * bj
            for k in range(p):
                _put(out, q, poly[k, 0], poly[k, 1], poly[k + 1, 0], poly[k + 1, 1], ci, cj)
                q += 1
            continue
        p = 0
        for e in range(3):
            p = _emit_edge(kind, n_lat, mark, tri[t, 2 * e], tri[t, 2 * e + 1], tri[t, (2 * e + 2) % 6], tri[t, (2 * e + 3) % 6], poly, p)
        gi = tri[t, 0] + tri[t, 2] + tri[t, 4]
        gj = tri[t, 1] + tri[t, 3] + tri[t, 5]
        for k in range(p):
            nk = (k + 1) % p
            _put(out, q, poly[k, 0], poly[k, 1], poly[nk, 0], poly[nk, 1], gi, gj)
            q += 1
    return out


@njit(cache=True)
def lattice_tessellation(kind, g, levels, su, sv):
    """Seeded refinement of the g x g grid, closed to a conforming mesh.

    Returns integer corners on the lattice of spacing 1 / n with
    n = 3 g 2**levels (the factor 3 keeps fan centroids on the lattice).
    """
    step = 2**levels
    n_lat = g * step
    tri = _base_grid(kind, g, step)
    diam = math.sqrt(2.0)
    for r in range(1, levels + 1):
        tri = _refine_round(tri, n_lat, su, sv, diam * 0.5**r)
    return _close(kind, tri, n_lat), 3 * n_lat


@njit(cache=True)
def lattice_to_uv(tri, n_lat):
    uv = np.empty((tri.shape[0], 6))
    for t in range(tri.shape[0]):
        for c in range(6):
            uv[t, c] = tri[t, c] / n_lat
    return uv


@njit(cache=True)
def map_triangles(kind, m, n, ctrl, uv):
    xyz = np.empty((uv.shape[0], 9))
    lam = np.empty(ctrl.shape[0])
    work = np.empty(2 * (MAX_DEGREE + 1))
    for t in range(uv.shape[0]):
        for c in range(3):
            eval_point(kind, m, n, ctrl, uv[t, 2 * c], uv[t, 2 * c + 1], lam, work, xyz[t, 3 * c : 3 * c + 3])
    return xyz


@njit(cache=True)
def lattice_nodes(kind, m, n, ctrl, n_coarse):
    """Surface points at every node (i, j) / n_coarse of the coarse lattice."""
    side = n_coarse + 1
    out = np.zeros((side * side, 3))
    lam = np.empty(ctrl.shape[0])
    work = np.empty(2 * (MAX_DEGREE + 1))
    for i in range(side):
        for j in range(side):
            if kind == TRIANGLE and i + j > n_coarse:
                continue
            eval_point(kind, m, n, ctrl, i / n_coarse, j / n_coarse, lam, work, out[i * side + j])
    return out


@njit(cache=True)
def _map_lattice(kind, m, n, ctrl, tri, n_lat, nodes, lam, work):
    # corners on the coarse lattice (multiples of 3) come from the node table,
    # which holds eval_point at (i / n_lat, j / n_lat); fan centroids are
    # evaluated directly
    xyz = np.empty((tri.shape[0], 9))
    side = n_lat // 3 + 1
    for t in range(tri.shape[0]):
        for c in range(3):
            i = tri[t, 2 * c]
            j = tri[t, 2 * c + 1]
            if i % 3 != 0 or j % 3 != 0:
                eval_point(kind, m, n, ctrl, i / n_lat, j / n_lat, lam, work, xyz[t, 3 * c : 3 * c + 3])
                continue
            key = (i // 3) * side + j // 3
            xyz[t, 3 * c] = nodes[key, 0]
            xyz[t, 3 * c + 1] = nodes[key, 1]
            xyz[t, 3 * c + 2] = nodes[key, 2]
    return xyz


# ---------------------------------------------------------------------------
# Riemann accumulation


@njit(cache=True)
def accumulate(kind, m, n, ctrl, nrm, uv, xyz, eta, variant, phi, psi):
    """Add one patch's Riemann sums into ``phi`` and ``psi``.

    Returns (total solid angle, number of elements skipped for a zero normal).
    """
    ncp = ctrl.shape[0]
    lam = np.empty(ncp)
    lu = np.empty(ncp)
    lv = np.empty(ncp)
    work = np.empty(2 * (MAX_DEGREE + 1))
    bu = np.empty(3)
    bv = np.empty(3)
    ex = eta[0]
    ey = eta[1]
    ez = eta[2]
    omega_sum = 0.0
    skipped = 0
    for t in range(uv.shape[0]):
        uc = (uv[t, 0] + uv[t, 2] + uv[t, 4]) / 3.0
        vc = (uv[t, 1] + uv[t, 3] + uv[t, 5]) / 3.0
        basis(kind, m, n, uc, vc, lam, work)
        p = xyz[t]
        om, gi = triangle_terms(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], ex, ey, ez)
        omega_sum += om
        w = om / FOUR_PI
        for c in range(ncp):
            phi[c] += lam[c] * w
        if variant == NORMALS:
            nx = 0.0
            ny = 0.0
            nz = 0.0
            for c in range(ncp):
                nx += lam[c] * nrm[c, 0]
                ny += lam[c] * nrm[c, 1]
                nz += lam[c] * nrm[c, 2]
            nn = math.sqrt(nx * nx + ny * ny + nz * nz)
            if nn == 0.0:
                skipped += 1
                continue
            s = gi / nn
            for c in range(ncp):
                psi[c] += lam[c] * s
        else:
            eval_partials(kind, m, n, ctrl, uc, vc, lu, lv, work, bu, bv)
            cx = bu[1] * bv[2] - bu[2] * bv[1]
            cy = bu[2] * bv[0] - bu[0] * bv[2]
            cz = bu[0] * bv[1] - bu[1] * bv[0]
            jac = math.sqrt(cx * cx + cy * cy + cz * cz)
            if jac == 0.0:
                skipped += 1
                continue
            s = gi / jac
            q = 0
            for a in range(ncp):
                for b in range(a + 1, ncp):
                    psi[q] += (lu[a] * lv[b] - lu[b] * lv[a]) * s
                    q += 1
    return omega_sum, skipped


@njit(cache=True)
def _vertex_row(eta, kinds, degs, coff, poff, ctrl, nrm, nodes, g, levels, variant, phi, psi):
    lam = np.empty(ctrl.shape[0])
    work = np.empty(2 * (MAX_DEGREE + 1))
    omega = 0.0
    skipped = 0
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        m = degs[k, 0]
        n = degs[k, 1]
        c0 = coff[k]
        c1 = coff[k + 1]
        pc = ctrl[c0:c1]
        su, sv, _ = invert(kind, m, n, pc, eta)
        tri, n_lat = lattice_tessellation(kind, g, levels, su, sv)
        xyz = _map_lattice(kind, m, n, pc, tri, n_lat, nodes[k], lam, work)
        uv = lattice_to_uv(tri, n_lat)
        om, sk = accumulate(kind, m, n, pc, nrm[c0:c1], uv, xyz, eta, variant, phi[c0:c1], psi[poff[k] : poff[k + 1]])
        omega += om
        skipped += sk
    return omega, skipped


@njit(cache=True, parallel=True)
def cage_rows(etas, kinds, degs, coff, poff, ctrl, nrm, g, levels, variant):
    """Raw coordinates for every query point.

    Each row is computed independently with a fixed patch-major,
    element-major accumulation order, so results do not depend on threading.
    """
    nv = etas.shape[0]
    phi = np.zeros((nv, coff[-1]))
    psi = np.zeros((nv, poff[-1]))
    omega = np.zeros(nv)
    skipped = np.zeros(nv, dtype=np.int64)
    n_coarse = g * 2**levels
    nodes = np.empty((kinds.shape[0], (n_coarse + 1) * (n_coarse + 1), 3))
    for k in range(kinds.shape[0]):
        nodes[k] = lattice_nodes(kinds[k], degs[k, 0], degs[k, 1], ctrl[coff[k] : coff[k + 1]], n_coarse)
    for q in prange(nv):
        om, sk = _vertex_row(etas[q], kinds, degs, coff, poff, ctrl, nrm, nodes, g, levels, variant, phi[q], psi[q])
        omega[q] = om
        skipped[q] = sk
    return phi, psi, omega, skipped


@njit(cache=True, parallel=True)
def winding_sums(points, tris):
    """Total signed solid angle of a triangle soup (T, 9) around each point."""
    out = np.zeros(points.shape[0])
    for q in prange(points.shape[0]):
        ex = points[q, 0]
        ey = points[q, 1]
        ez = points[q, 2]
        s = 0.0
        for t in range(tris.shape[0]):
            p = tris[t]
            s += solid_angle(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], ex, ey, ez)
        out[q] = s
    return out
