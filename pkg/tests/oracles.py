"""Independent oracles: closed forms, brute force, and extended precision.

Nothing here may touch the production eigensolver or accumulation paths;
these are the second route for every dual-route check.
"""

import itertools
import math

import numpy as np


def det_cofactor(a):
    """Cofactor-expansion determinant for d <= 3."""
    a = np.asarray(a, dtype=np.float64)
    d = a.shape[0]
    if d == 1:
        return float(a[0, 0])
    if d == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if d == 3:
        return float(
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    raise ValueError("cofactor oracle is for d <= 3")


def eig_closed_2x2(a):
    """Characteristic-polynomial roots of a symmetric 2x2, descending."""
    a = np.asarray(a, dtype=np.float64)
    q = 0.5 * (a[0, 0] + a[1, 1])
    s = math.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
    return np.array([q + s, q - s])


def eig_closed_3x3(a):
    """Trigonometric solution of the characteristic cubic for symmetric 3x3."""
    a = np.asarray(a, dtype=np.float64)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    if p1 == 0.0:
        return np.sort(np.diag(a))[::-1].copy()
    q = float(np.trace(a)) / 3.0
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = det_cofactor(b) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def esp_enumerate(sigma):
    """P_0..P_d by brute-force enumeration of all index subsets."""
    sigma = list(map(float, sigma))
    d = len(sigma)
    out = [1.0]
    for k in range(1, d + 1):
        out.append(
            math.fsum(math.prod(c) for c in itertools.combinations(sigma, k))
        )
    return np.array(out)


def opnorm_randomized_sup(mat, n_draws=10_000, n_power=200, rng=None):
    """sup |M y| over random unit y, sharpened by power iteration from the best draw."""
    rng = rng or np.random.default_rng(0)
    a = np.asarray(mat, dtype=np.float64)
    d = a.shape[0]
    ys = rng.normal(size=(n_draws, d))
    ys /= np.sqrt((ys**2).sum(-1))[:, None]
    norms = np.sqrt(((ys @ a.T) ** 2).sum(-1))
    best = float(norms.max())
    y = ys[int(np.argmax(norms))]
    for _ in range(n_power):
        z = a @ y
        nz = math.sqrt(float((z**2).sum()))
        if nz == 0.0:
            return best
        y = z / nz
        best = max(best, math.sqrt(float(((a @ y) ** 2).sum())))
    return best


def fd_jacobian(fun, x, h=1e-6):
    """Central finite-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    cols = []
    for j in range(d):
        step = np.zeros(d)
        step[j] = h
        cols.append((fun(x + step) - fun(x - step)) / (2.0 * h))
    return np.stack(cols, axis=1)


def eval_map_mp(centers, k, x, dps=50):
    """Extended-precision evaluation of the weighted stretch series."""
    from mpmath import mp

    centers = np.asarray(centers, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m, d = centers.shape
    with mp.workdps(dps):
        kk = mp.mpf(k)
        acc = [mp.mpf(0)] * d
        for n in range(1, m + 1):
            diff = [mp.mpf(x[j]) - mp.mpf(centers[n - 1, j]) for j in range(d)]
            r = mp.sqrt(mp.fsum(v * v for v in diff))
            if r == 0:
                continue
            s = mp.mpf(2) ** (-n) * r ** (1 / kk - 1)
            for j in range(d):
                acc[j] += diff[j] * s
        return np.array([float(v) for v in acc])


def eval_stretch_mp(center, k, x, dps=50):
    """Extended-precision single radial stretch."""
    from mpmath import mp

    center = np.asarray(center, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    with mp.workdps(dps):
        kk = mp.mpf(k)
        diff = [mp.mpf(x[j]) - mp.mpf(center[j]) for j in range(x.size)]
        r = mp.sqrt(mp.fsum(v * v for v in diff))
        if r == 0:
            return np.zeros(x.size)
        s = r ** (1 / kk - 1)
        return np.array([float(v * s) for v in diff])
