"""Shared random-input builders for the test suite (all seeded by callers)."""

import numpy as np

from qcstretch import LambdaSet, MapConfig


def random_unit(rng, d):
    v = rng.normal(size=d)
    return v / np.sqrt((v**2).sum())


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))[None, :]


def random_symmetric(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) * scale
    return (a + a.T) / 2.0


def random_centers_in_ball(rng, m, d, radius=1.0, min_sep=1e-6):
    while True:
        pts = rng.normal(size=(m, d))
        pts *= (radius * rng.uniform(0, 1, size=m) ** (1.0 / d) / np.sqrt((pts**2).sum(-1)))[
            :, None
        ]
        if m == 1:
            return pts
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        if dist[np.triu_indices(m, 1)].min() > min_sep:
            return pts


def random_config(rng, m=None, d=None, k=None, radius=1.0):
    m = m or int(rng.integers(2, 51))
    d = d or int(rng.choice([2, 3, 4]))
    k = k or float(rng.uniform(1.1, 10.0))
    return MapConfig(LambdaSet(random_centers_in_ball(rng, m, d, radius)), k)


def random_simplex(rng, d):
    v = rng.uniform(0.0, 1.0, size=d)
    total = v.sum()
    if total == 0.0:
        v[0] = 1.0
        total = 1.0
    return v / total


def spread_points(rng, m, d, dmin, dmax, tries=100_000):
    """m points whose pairwise distances all land in [dmin, dmax]."""
    for _ in range(tries):
        scale = dmax * 0.35
        pts = rng.uniform(-scale, scale, size=(m, d))
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        iu = np.triu_indices(m, 1)
        if dist[iu].min() >= dmin and dist[iu].max() <= dmax:
            return pts
    raise RuntimeError("could not draw a conforming point set")
