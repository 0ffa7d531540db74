"""Numba-compiled kernels: the default backend.

Every function here has a pure-numpy twin in ``_kernels_numpy`` with the
same name, signature, and accumulation order. Select with QCS_BACKEND.
"""

import math

import numpy as np
from numba import njit

BACKEND = "numba"

# Distances at or below this are treated as "on the center".
GUARD = 1e-300

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-14


@njit(cache=True)
def _vec_norm(v):
    # max-scaled accumulation; robust for entries near the underflow guard
    m = 0.0
    for i in range(v.shape[0]):
        a = abs(v[i])
        if a > m:
            m = a
    if m == 0.0:
        return 0.0
    s = 0.0
    for i in range(v.shape[0]):
        t = v[i] / m
        s += t * t
    return m * math.sqrt(s)


@njit(cache=True)
def _radial_scale(r, inv_k):
    # r^(1/K - 1) via exp/log; exact-scale stability down to GUARD
    return math.exp((inv_k - 1.0) * math.log(r))


@njit(cache=True)
def _off_frob(a):
    d = a.shape[0]
    s = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                s += a[i, j] * a[i, j]
    return math.sqrt(s)


@njit(cache=True)
def _frob(a):
    d = a.shape[0]
    s = 0.0
    for i in range(d):
        for j in range(d):
            s += a[i, j] * a[i, j]
    return math.sqrt(s)


@njit(cache=True)
def jacobi_eigh(mat, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi for a symmetric matrix.

    Returns (eigenvalues desc, eigenvector columns, converged flag).
    """
    d = mat.shape[0]
    a = mat.copy()
    v = np.eye(d)
    tol = JACOBI_OFF_TOL * _frob(mat)
    skip = tol / (d * d)
    ok = False
    for _ in range(max_sweeps):
        if _off_frob(a) <= tol:
            ok = True
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(d):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[p, i] = a[i, p]
                        a[i, q] = c * aiq + s * aip
                        a[q, i] = a[i, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(d):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * viq
                    v[i, q] = s * vip + c * viq
    if not ok:
        ok = _off_frob(a) <= tol
    w = np.empty(d)
    for i in range(d):
        w[i] = a[i, i]
    # stable insertion sort, descending
    idx = np.arange(d)
    for i in range(1, d):
        j = i
        while j > 0 and w[idx[j - 1]] < w[idx[j]]:
            tmp = idx[j - 1]
            idx[j - 1] = idx[j]
            idx[j] = tmp
            j -= 1
    w_sorted = np.empty(d)
    v_sorted = np.empty((d, d))
    for k in range(d):
        w_sorted[k] = w[idx[k]]
        for i in range(d):
            v_sorted[i, k] = v[i, idx[k]]
    return w_sorted, v_sorted, ok


@njit(cache=True)
def jacobi_eigh_many(mats, max_sweeps=JACOBI_MAX_SWEEPS):
    b = mats.shape[0]
    d = mats.shape[1]
    w = np.empty((b, d))
    v = np.empty((b, d, d))
    ok = np.empty(b, dtype=np.bool_)
    for k in range(b):
        wk, vk, okk = jacobi_eigh(mats[k], max_sweeps)
        w[k] = wk
        v[k] = vk
        ok[k] = okk
    return w, v, ok


@njit(cache=True)
def eval_stretch_many(center, inv_k, xs):
    p, d = xs.shape
    out = np.zeros((p, d))
    diff = np.empty(d)
    for ip in range(p):
        for j in range(d):
            diff[j] = xs[ip, j] - center[j]
        r = _vec_norm(diff)
        if r <= GUARD:
            continue
        s = _radial_scale(r, inv_k)
        for j in range(d):
            out[ip, j] = diff[j] * s
    return out


@njit(cache=True)
def eval_map_many(centers, inv_k, xs):
    m, d = centers.shape
    p = xs.shape[0]
    out = np.empty((p, d))
    diff = np.empty(d)
    acc = np.empty(d)
    comp = np.empty(d)
    for ip in range(p):
        for j in range(d):
            acc[j] = 0.0
            comp[j] = 0.0
        for n in range(m):
            for j in range(d):
                diff[j] = xs[ip, j] - centers[n, j]
            r = _vec_norm(diff)
            if r <= GUARD:
                continue
            scale = math.ldexp(1.0, -(n + 1)) * _radial_scale(r, inv_k)
            # Kahan-compensated, left-to-right in n
            for j in range(d):
                term = scale * diff[j]
                y = term - comp[j]
                t = acc[j] + y
                comp[j] = (t - acc[j]) - y
                acc[j] = t
        for j in range(d):
            out[ip, j] = acc[j]
    return out


@njit(cache=True)
def weight_b_many(centers, inv_k, xs):
    m, d = centers.shape
    p = xs.shape[0]
    w_tot = np.empty(p)
    b = np.empty((p, d, d))
    min_dist = np.empty(p)
    nearest = np.empty(p, dtype=np.int64)
    on_lambda = np.zeros(p, dtype=np.bool_)
    diff = np.empty(d)
    u = np.empty(d)
    smat = np.empty((d, d))
    for ip in range(p):
        w_acc = 0.0
        w_comp = 0.0
        for i in range(d):
            for j in range(d):
                smat[i, j] = 0.0
        best = np.inf
        best_n = 0
        hit = False
        for n in range(m):
            for j in range(d):
                diff[j] = xs[ip, j] - centers[n, j]
            r = _vec_norm(diff)
            if r < best:
                best = r
                best_n = n
            if r <= GUARD:
                hit = True
                best = r
                best_n = n
                break
            coef = math.ldexp(1.0, -(n + 1)) * _radial_scale(r, inv_k)
            y = coef - w_comp
            t = w_acc + y
            w_comp = (t - w_acc) - y
            w_acc = t
            inv_r = 1.0 / r
            for j in range(d):
                u[j] = diff[j] * inv_r
            for i in range(d):
                for j in range(d):
                    smat[i, j] += coef * (u[i] * u[j])
        min_dist[ip] = best
        nearest[ip] = best_n + 1
        if hit:
            on_lambda[ip] = True
            w_tot[ip] = np.nan
            for i in range(d):
                for j in range(d):
                    b[ip, i, j] = np.nan
        else:
            w_tot[ip] = w_acc
            inv_w = 1.0 / w_acc
            for i in range(d):
                for j in range(d):
                    b[ip, i, j] = smat[i, j] * inv_w
    return w_tot, b, min_dist, nearest, on_lambda


@njit(cache=True)
def weight_decomp_point(centers, inv_k, x):
    m, d = centers.shape
    eta = np.zeros(m)
    wdir = np.zeros((m, d))
    bmat = np.zeros((d, d))
    diff = np.empty(d)
    coefs = np.empty(m)
    w_acc = 0.0
    w_comp = 0.0
    best = np.inf
    best_n = 0
    for n in range(m):
        for j in range(d):
            diff[j] = x[j] - centers[n, j]
        r = _vec_norm(diff)
        if r < best:
            best = r
            best_n = n
        if r <= GUARD:
            return w_acc, eta, wdir, bmat, n + 1, r, True
        coef = math.ldexp(1.0, -(n + 1)) * _radial_scale(r, inv_k)
        coefs[n] = coef
        y = coef - w_comp
        t = w_acc + y
        w_comp = (t - w_acc) - y
        w_acc = t
        inv_r = 1.0 / r
        for j in range(d):
            wdir[n, j] = diff[j] * inv_r
    inv_w = 1.0 / w_acc
    for n in range(m):
        eta[n] = coefs[n] * inv_w
        for i in range(d):
            for j in range(d):
                bmat[i, j] += coefs[n] * (wdir[n, i] * wdir[n, j])
    for i in range(d):
        for j in range(d):
            bmat[i, j] *= inv_w
    return w_acc, eta, wdir, bmat, best_n + 1, best, False


@njit(cache=True)
def jac_sum_many(centers, inv_k, alpha, xs):
    """Direct series Jacobian sum (the cross-check frame for W(I - alpha B))."""
    m, d = centers.shape
    p = xs.shape[0]
    out = np.empty((p, d, d))
    diff = np.empty(d)
    u = np.empty(d)
    acc = np.empty((d, d))
    comp = np.empty((d, d))
    for ip in range(p):
        for i in range(d):
            for j in range(d):
                acc[i, j] = 0.0
                comp[i, j] = 0.0
        hit = False
        for n in range(m):
            for j in range(d):
                diff[j] = xs[ip, j] - centers[n, j]
            r = _vec_norm(diff)
            if r <= GUARD:
                hit = True
                break
            coef = math.ldexp(1.0, -(n + 1)) * _radial_scale(r, inv_k)
            inv_r = 1.0 / r
            for j in range(d):
                u[j] = diff[j] * inv_r
            for i in range(d):
                for j in range(d):
                    delta = 1.0 if i == j else 0.0
                    term = coef * (delta - alpha * (u[i] * u[j]))
                    y = term - comp[i, j]
                    t = acc[i, j] + y
                    comp[i, j] = (t - acc[i, j]) - y
                    acc[i, j] = t
        for i in range(d):
            for j in range(d):
                out[ip, i, j] = np.nan if hit else acc[i, j]
    return out
