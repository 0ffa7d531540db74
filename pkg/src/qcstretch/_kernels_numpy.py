"""Pure-numpy fallback kernels.

Same names, signatures, guard constants, and accumulation order (over
centers and Jacobi rotations) as ``_kernels_numba``; vectorized over the
sample axis instead of compiled. Select with QCS_BACKEND=numpy.
"""

import math

import numpy as np

BACKEND = "numpy"

GUARD = 1e-300

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-14


def _norms(diff):
    # max-scaled accumulation, matching the scalar kernel
    m = np.max(np.abs(diff), axis=-1)
    safe = np.where(m == 0.0, 1.0, m)
    t = diff / safe[..., None]
    r = safe * np.sqrt(np.sum(t * t, axis=-1))
    return np.where(m == 0.0, 0.0, r)


def _radial_scales(r, inv_k, live):
    s = np.zeros_like(r)
    rs = np.where(live, r, 1.0)
    s = np.where(live, np.exp((inv_k - 1.0) * np.log(rs)), 0.0)
    return s


def jacobi_eigh_many(mats, max_sweeps=JACOBI_MAX_SWEEPS):
    """Batched cyclic Jacobi; per-matrix trajectory identical to the scalar kernel."""
    a = np.array(mats, dtype=np.float64)
    nb, d, _ = a.shape
    v = np.broadcast_to(np.eye(d), (nb, d, d)).copy()
    normf = np.sqrt(np.sum(mats * mats, axis=(1, 2)))
    tol = JACOBI_OFF_TOL * normf
    skip = tol / (d * d)
    idx = np.arange(d)
    off_mask = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum((a * off_mask) ** 2, axis=(1, 2)))
        active = off > tol
        if not active.any():
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                do = active & (np.abs(apq) > skip)
                if not do.any():
                    continue
                app = a[:, p, p].copy()
                aqq = a[:, q, q].copy()
                apq_safe = np.where(do, apq, 1.0)
                tau = (aqq - app) / (2.0 * apq_safe)
                root = np.sqrt(1.0 + tau * tau)
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + root)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                newp = c[:, None] * colp - s[:, None] * colq
                newq = c[:, None] * colq + s[:, None] * colp
                newp[:, p] = app - t * apq
                newp[:, q] = 0.0
                newq[:, q] = aqq + t * apq
                newq[:, p] = 0.0
                a[:, :, p] = np.where(do[:, None], newp, colp)
                a[:, :, q] = np.where(do[:, None], newq, colq)
                a[:, p, :] = a[:, :, p]
                a[:, q, :] = a[:, :, q]
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = np.where(do[:, None], c[:, None] * vp - s[:, None] * vq, vp)
                v[:, :, q] = np.where(do[:, None], s[:, None] * vp + c[:, None] * vq, vq)
    off = np.sqrt(np.sum((a * off_mask) ** 2, axis=(1, 2)))
    ok = off <= tol
    w = a[:, idx, idx]
    order = np.argsort(-w, axis=1, kind="stable")
    w_sorted = np.take_along_axis(w, order, axis=1)
    v_sorted = np.take_along_axis(v, order[:, None, :], axis=2)
    return w_sorted, v_sorted, ok


def jacobi_eigh(mat, max_sweeps=JACOBI_MAX_SWEEPS):
    w, v, ok = jacobi_eigh_many(mat[None, :, :], max_sweeps)
    return w[0], v[0], bool(ok[0])


def eval_stretch_many(center, inv_k, xs):
    diff = xs - center[None, :]
    r = _norms(diff)
    live = r > GUARD
    s = _radial_scales(r, inv_k, live)
    return diff * s[:, None]


def eval_map_many(centers, inv_k, xs):
    m = centers.shape[0]
    acc = np.zeros_like(xs)
    comp = np.zeros_like(xs)
    for n in range(m):
        diff = xs - centers[n][None, :]
        r = _norms(diff)
        live = r > GUARD
        scale = math.ldexp(1.0, -(n + 1)) * _radial_scales(r, inv_k, live)
        term = scale[:, None] * diff
        y = term - comp
        t = acc + y
        new_comp = (t - acc) - y
        acc = np.where(live[:, None], t, acc)
        comp = np.where(live[:, None], new_comp, comp)
    return acc


def weight_b_many(centers, inv_k, xs):
    m, d = centers.shape
    p = xs.shape[0]
    w_acc = np.zeros(p)
    w_comp = np.zeros(p)
    smat = np.zeros((p, d, d))
    best = np.full(p, np.inf)
    nearest = np.zeros(p, dtype=np.int64)
    hit = np.zeros(p, dtype=bool)
    for n in range(m):
        diff = xs - centers[n][None, :]
        r = _norms(diff)
        upd = (~hit) & (r < best)
        nearest = np.where(upd, n + 1, nearest)
        best = np.where(upd, r, best)
        hit = hit | ((~hit) & (r <= GUARD))
        live = (~hit) & (r > GUARD)
        coef = np.where(live, math.ldexp(1.0, -(n + 1)) * _radial_scales(r, inv_k, live), 0.0)
        y = coef - w_comp
        t = w_acc + y
        new_comp = (t - w_acc) - y
        w_acc = np.where(live, t, w_acc)
        w_comp = np.where(live, new_comp, w_comp)
        inv_r = np.where(live, 1.0 / np.where(live, r, 1.0), 0.0)
        u = diff * inv_r[:, None]
        smat += coef[:, None, None] * (u[:, :, None] * u[:, None, :])
    w_tot = np.where(hit, np.nan, w_acc)
    inv_w = 1.0 / np.where(hit, 1.0, w_acc)
    b = np.where(hit[:, None, None], np.nan, smat * inv_w[:, None, None])
    return w_tot, b, best, nearest, hit


def weight_decomp_point(centers, inv_k, x):
    m, d = centers.shape
    diff = x[None, :] - centers
    r = _norms(diff)
    hit_mask = r <= GUARD
    if hit_mask.any():
        n = int(np.argmax(hit_mask))
        return 0.0, np.zeros(m), np.zeros((m, d)), np.zeros((d, d)), n + 1, float(r[n]), True
    coefs = np.ldexp(1.0, -np.arange(1, m + 1)) * np.exp((inv_k - 1.0) * np.log(r))
    w_acc = 0.0
    w_comp = 0.0
    for n in range(m):
        y = coefs[n] - w_comp
        t = w_acc + y
        w_comp = (t - w_acc) - y
        w_acc = t
    wdir = diff * (1.0 / r)[:, None]
    inv_w = 1.0 / w_acc
    eta = coefs * inv_w
    bmat = np.einsum("n,ni,nj->ij", coefs, wdir, wdir) * inv_w
    nearest = int(np.argmin(r))
    return w_acc, eta, wdir, bmat, nearest + 1, float(r[nearest]), False


def jac_sum_many(centers, inv_k, alpha, xs):
    """Direct series Jacobian sum (the cross-check frame for W(I - alpha B))."""
    m, d = centers.shape
    p = xs.shape[0]
    eye = np.eye(d)
    acc = np.zeros((p, d, d))
    comp = np.zeros((p, d, d))
    hit = np.zeros(p, dtype=bool)
    for n in range(m):
        diff = xs - centers[n][None, :]
        r = _norms(diff)
        hit = hit | (r <= GUARD)
        live = ~hit & (r > GUARD)
        coef = np.where(live, math.ldexp(1.0, -(n + 1)) * _radial_scales(r, inv_k, live), 0.0)
        inv_r = np.where(live, 1.0 / np.where(live, r, 1.0), 0.0)
        u = diff * inv_r[:, None]
        term = coef[:, None, None] * (eye[None, :, :] - alpha * (u[:, :, None] * u[:, None, :]))
        y = term - comp
        t = acc + y
        new_comp = (t - acc) - y
        acc = np.where(live[:, None, None], t, acc)
        comp = np.where(live[:, None, None], new_comp, comp)
    acc[hit] = np.nan
    return acc
