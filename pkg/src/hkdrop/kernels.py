"""Hot numerical loops, each in a numba and a vectorised numpy flavour.

The public names (``max_pair_distance``, ``p2_element_arrays``,
``hermite_nearest``) dispatch to the numba versions unless numba is missing
or disabled through ``HKDROP_DISABLE_NUMBA``. Both flavours are importable
directly (suffixes ``_nb`` / ``_np``) for testing and benchmarking.
"""
import math

import numpy as np

from . import p2
from ._accel import HAVE_NUMBA, njit

TWO_PI = 2.0 * math.pi
GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


# --------------------------------------------------------------------------
# diameter of a body of revolution from its meridian points
# --------------------------------------------------------------------------
def max_pair_distance_np(rho, z, chunk=2048):
    rho = np.ascontiguousarray(rho, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    best = 0.0
    for start in range(0, rho.size, chunk):
        r = rho[start : start + chunk, None]
        d2 = (r + rho[None, :]) ** 2 + (z[start : start + chunk, None] - z[None, :]) ** 2
        best = max(best, float(d2.max()))
    return math.sqrt(best)


@njit(cache=True)
def max_pair_distance_nb(rho, z):
    best = 0.0
    n = rho.shape[0]
    for i in range(n):
        ri = rho[i]
        zi = z[i]
        for j in range(i, n):
            dr = ri + rho[j]
            dz = zi - z[j]
            d2 = dr * dr + dz * dz
            if d2 > best:
                best = d2
    return math.sqrt(best)


# --------------------------------------------------------------------------
# axisymmetric P2 element stiffness and load
# --------------------------------------------------------------------------
def p2_element_arrays_np(nodes):
    """Element stiffness ``2*pi*int grad Ni . grad Nj rho`` and load ``2*pi*int Ni rho``.

    ``nodes`` is (E, 6, 2) with columns (rho, z); curved (isoparametric)
    elements are handled by evaluating the Jacobian at every quadrature point.
    """
    X = np.asarray(nodes, dtype=float)
    J = np.einsum("eni,qnj->eqij", X, p2.QUAD_GRAD)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    grads = np.einsum("eqji,qnj->eqni", inv, p2.QUAD_GRAD)
    rho_q = np.einsum("en,qn->eq", X[..., 0], p2.QUAD_SHAPE)
    wq = TWO_PI * 0.5 * np.abs(det) * p2.QUAD_WEIGHTS[None, :] * rho_q
    Ke = np.einsum("eq,eqni,eqmi->enm", wq, grads, grads)
    Fe = np.einsum("eq,qn->en", wq, p2.QUAD_SHAPE)
    return Ke, Fe


@njit(cache=True)
def _p2_element_arrays_nb(X, qw, qshape, qgrad):
    E = X.shape[0]
    Q = qw.shape[0]
    Ke = np.zeros((E, 6, 6))
    Fe = np.zeros((E, 6))
    g = np.empty((6, 2))
    for e in range(E):
        for q in range(Q):
            a = 0.0
            b = 0.0
            c = 0.0
            d = 0.0
            rho = 0.0
            for n in range(6):
                a += X[e, n, 0] * qgrad[q, n, 0]
                b += X[e, n, 0] * qgrad[q, n, 1]
                c += X[e, n, 1] * qgrad[q, n, 0]
                d += X[e, n, 1] * qgrad[q, n, 1]
                rho += X[e, n, 0] * qshape[q, n]
            det = a * d - b * c
            i00 = d / det
            i01 = -b / det
            i10 = -c / det
            i11 = a / det
            w = TWO_PI * 0.5 * abs(det) * qw[q] * rho
            for n in range(6):
                gx = qgrad[q, n, 0]
                ge = qgrad[q, n, 1]
                g[n, 0] = i00 * gx + i10 * ge
                g[n, 1] = i01 * gx + i11 * ge
            for n in range(6):
                Fe[e, n] += w * qshape[q, n]
                for m in range(n, 6):
                    val = w * (g[n, 0] * g[m, 0] + g[n, 1] * g[m, 1])
                    Ke[e, n, m] += val
                    if m != n:
                        Ke[e, m, n] += val
    return Ke, Fe


def p2_element_arrays_nb(nodes):
    X = np.ascontiguousarray(nodes, dtype=float)
    return _p2_element_arrays_nb(X, p2.QUAD_WEIGHTS, p2.QUAD_SHAPE, p2.QUAD_GRAD)


# --------------------------------------------------------------------------
# nearest point on a cubic Hermite meridian curve
# --------------------------------------------------------------------------
# Segment k joins nodes k and k+1 with end tangents T*ds (unit tangents T).
def _hermite_eval_np(P0, P1, M0, M1, tau):
    t = tau[..., None]
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    pos = h00 * P0 + h10 * M0 + h01 * P1 + h11 * M1
    d00 = 6 * t2 - 6 * t
    d10 = 3 * t2 - 4 * t + 1
    d01 = -6 * t2 + 6 * t
    d11 = 3 * t2 - 2 * t
    der = d00 * P0 + d10 * M0 + d01 * P1 + d11 * M1
    e00 = 12 * t - 6
    e10 = 6 * t - 4
    e01 = -12 * t + 6
    e11 = 6 * t - 2
    sec = e00 * P0 + e10 * M0 + e01 * P1 + e11 * M1
    return pos, der, sec


def hermite_nearest_np(y, seg, P, T, ds, golden_iters=48, newton_iters=4):
    """Closest point to each ``y[i]`` over the candidate segments ``seg[i]``.

    ``seg`` is an int array (m, k) padded with -1. Returns
    ``(best_seg, best_tau, point, tangent, dist)``.
    """
    y = np.asarray(y, dtype=float)
    seg = np.asarray(seg, dtype=np.int64)
    m, k = seg.shape
    valid = seg >= 0
    sidx = np.where(valid, seg, 0)
    P0 = P[sidx]
    P1 = P[sidx + 1]
    M0 = T[sidx] * ds[sidx][..., None]
    M1 = T[sidx + 1] * ds[sidx][..., None]
    Y = np.broadcast_to(y[:, None, :], P0.shape)

    def f(tau):
        pos, _, _ = _hermite_eval_np(P0, P1, M0, M1, tau)
        d = pos - Y
        return np.einsum("...i,...i->...", d, d)

    lo = np.zeros((m, k))
    hi = np.ones((m, k))
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(golden_iters):
        left = f1 < f2
        hi_n = np.where(left, x2, hi)
        lo_n = np.where(left, lo, x1)
        x1_n = np.where(left, hi_n - GOLDEN * (hi_n - lo_n), x2)
        x2_n = np.where(left, x1, lo_n + GOLDEN * (hi_n - lo_n))
        fp = f(np.where(left, x1_n, x2_n))
        f1, f2 = np.where(left, fp, f2), np.where(left, f1, fp)
        lo, hi, x1, x2 = lo_n, hi_n, x1_n, x2_n
    tau = 0.5 * (lo + hi)
    # endpoints may beat the interior stationary point
    for _ in range(newton_iters):
        pos, der, sec = _hermite_eval_np(P0, P1, M0, M1, tau)
        d = pos - Y
        g = np.einsum("...i,...i->...", d, der)
        h = np.einsum("...i,...i->...", der, der) + np.einsum("...i,...i->...", d, sec)
        step = np.where(h > 0, g / np.where(h > 0, h, 1.0), 0.0)
        tau = np.clip(tau - step, 0.0, 1.0)
    cand = np.stack([tau, np.zeros_like(tau), np.ones_like(tau)], axis=-1)
    fc = np.stack([f(cand[..., j]) for j in range(3)], axis=-1)
    pick = np.argmin(fc, axis=-1)
    tau = np.take_along_axis(cand, pick[..., None], axis=-1)[..., 0]
    fbest = np.take_along_axis(fc, pick[..., None], axis=-1)[..., 0]
    fbest = np.where(valid, fbest, np.inf)
    j = np.argmin(fbest, axis=1)
    rows = np.arange(m)
    best_seg = sidx[rows, j]
    best_tau = tau[rows, j]
    pos, der, _ = _hermite_eval_np(
        P0[rows, j], P1[rows, j], M0[rows, j], M1[rows, j], best_tau
    )
    tang = der / np.linalg.norm(der, axis=-1, keepdims=True)
    dist = np.linalg.norm(pos - y, axis=-1)
    return best_seg, best_tau, pos, tang, dist


@njit(cache=True)
def _herm(P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, t):
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    d00 = 6 * t2 - 6 * t
    d10 = 3 * t2 - 4 * t + 1
    d01 = -6 * t2 + 6 * t
    d11 = 3 * t2 - 2 * t
    e00 = 12 * t - 6
    e10 = 6 * t - 4
    e01 = -12 * t + 6
    e11 = 6 * t - 2
    pr = h00 * P0r + h10 * M0r + h01 * P1r + h11 * M1r
    pz = h00 * P0z + h10 * M0z + h01 * P1z + h11 * M1z
    dr = d00 * P0r + d10 * M0r + d01 * P1r + d11 * M1r
    dz = d00 * P0z + d10 * M0z + d01 * P1z + d11 * M1z
    sr = e00 * P0r + e10 * M0r + e01 * P1r + e11 * M1r
    sz = e00 * P0z + e10 * M0z + e01 * P1z + e11 * M1z
    return pr, pz, dr, dz, sr, sz


@njit(cache=True)
def _hermite_nearest_nb(y, seg, P, T, ds, golden_iters, newton_iters):
    m, k = seg.shape
    best_seg = np.zeros(m, dtype=np.int64)
    best_tau = np.zeros(m)
    pos = np.zeros((m, 2))
    tang = np.zeros((m, 2))
    dist = np.zeros(m)
    for i in range(m):
        yr = y[i, 0]
        yz = y[i, 1]
        fbest = np.inf
        for c in range(k):
            s = seg[i, c]
            if s < 0:
                continue
            P0r, P0z = P[s, 0], P[s, 1]
            P1r, P1z = P[s + 1, 0], P[s + 1, 1]
            M0r, M0z = T[s, 0] * ds[s], T[s, 1] * ds[s]
            M1r, M1z = T[s + 1, 0] * ds[s], T[s + 1, 1] * ds[s]
            lo = 0.0
            hi = 1.0
            x1 = hi - GOLDEN * (hi - lo)
            x2 = lo + GOLDEN * (hi - lo)
            pr, pz, _, _, _, _ = _herm(P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, x1)
            f1 = (pr - yr) ** 2 + (pz - yz) ** 2
            pr, pz, _, _, _, _ = _herm(P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, x2)
            f2 = (pr - yr) ** 2 + (pz - yz) ** 2
            for _ in range(golden_iters):
                if f1 < f2:
                    hi = x2
                    x2 = x1
                    f2 = f1
                    x1 = hi - GOLDEN * (hi - lo)
                    pr, pz, _, _, _, _ = _herm(P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, x1)
                    f1 = (pr - yr) ** 2 + (pz - yz) ** 2
                else:
                    lo = x1
                    x1 = x2
                    f1 = f2
                    x2 = lo + GOLDEN * (hi - lo)
                    pr, pz, _, _, _, _ = _herm(P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, x2)
                    f2 = (pr - yr) ** 2 + (pz - yz) ** 2
            tau = 0.5 * (lo + hi)
            for _ in range(newton_iters):
                pr, pz, dr, dz, sr, sz = _herm(
                    P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, tau
                )
                g = (pr - yr) * dr + (pz - yz) * dz
                h = dr * dr + dz * dz + (pr - yr) * sr + (pz - yz) * sz
                if h > 0:
                    tau = tau - g / h
                if tau < 0.0:
                    tau = 0.0
                elif tau > 1.0:
                    tau = 1.0
            for cand in (tau, 0.0, 1.0):
                pr, pz, _, _, _, _ = _herm(
                    P0r, P0z, P1r, P1z, M0r, M0z, M1r, M1z, cand
                )
                f = (pr - yr) ** 2 + (pz - yz) ** 2
                if f < fbest:
                    fbest = f
                    best_seg[i] = s
                    best_tau[i] = cand
        s = best_seg[i]
        pr, pz, dr, dz, _, _ = _herm(
            P[s, 0], P[s, 1], P[s + 1, 0], P[s + 1, 1],
            T[s, 0] * ds[s], T[s, 1] * ds[s],
            T[s + 1, 0] * ds[s], T[s + 1, 1] * ds[s],
            best_tau[i],
        )
        nrm = math.sqrt(dr * dr + dz * dz)
        pos[i, 0] = pr
        pos[i, 1] = pz
        tang[i, 0] = dr / nrm
        tang[i, 1] = dz / nrm
        dist[i] = math.sqrt((pr - yr) ** 2 + (pz - yz) ** 2)
    return best_seg, best_tau, pos, tang, dist


def hermite_nearest_nb(y, seg, P, T, ds, golden_iters=48, newton_iters=4):
    return _hermite_nearest_nb(
        np.ascontiguousarray(y, dtype=float),
        np.ascontiguousarray(seg, dtype=np.int64),
        np.ascontiguousarray(P, dtype=float),
        np.ascontiguousarray(T, dtype=float),
        np.ascontiguousarray(ds, dtype=float),
        golden_iters,
        newton_iters,
    )


if HAVE_NUMBA:
    max_pair_distance = max_pair_distance_nb
    p2_element_arrays = p2_element_arrays_nb
    hermite_nearest = hermite_nearest_nb
else:
    max_pair_distance = max_pair_distance_np
    p2_element_arrays = p2_element_arrays_np
    hermite_nearest = hermite_nearest_np
