"""The weighted series of radial stretches and its spectral decomposition.

The map is sum_{n=1..M} 2^-n * stretch_n(x); the Jacobian factors as
W(x) * (I - alpha * B(x)) where B(x) is a convex combination of rank-one
projectors onto the unit directions from x to each center.
"""

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import NonFiniteError, OnLambdaError, ValidationError
from .symmat import MAX_DIM, SymMatrix, _frozen_array, eigen_sym

MIN_CENTER_SEPARATION = 1e-12

ETA_SUM_TOL = 1e-12
UNIT_DIR_TOL = 1e-13
TRACE_TOL = 1e-11
B_SPECTRUM_TOL = 1e-11


@dataclass(frozen=True)
class LambdaSet:
    """Ordered, pairwise-distinct centers; order carries the 2^-n weights."""

    centers: np.ndarray
    bound_radius: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2:
            raise ValidationError("centers must be an (M, d) array")
        m, d = c.shape
        if m < 1:
            raise ValidationError("at least one center is required")
        if d < 2 or d > MAX_DIM:
            raise ValidationError(f"dimension must be in [2, {MAX_DIM}], got {d}")
        if not np.isfinite(c).all():
            raise NonFiniteError("center coordinates must be finite (bounded set)")
        if m > 1:
            diff = c[:, None, :] - c[None, :, :]
            dist = np.sqrt((diff**2).sum(-1))
            iu = np.triu_indices(m, 1)
            dmin = float(dist[iu].min())
            if dmin <= MIN_CENTER_SEPARATION:
                i, j = np.unravel_index(
                    np.argmin(np.where(np.eye(m, dtype=bool), np.inf, dist)), dist.shape
                )
                raise ValidationError(
                    f"duplicate centers: n={i + 1} and n={j + 1} are separated by "
                    f"{dmin:.3e} <= {MIN_CENTER_SEPARATION:.0e}"
                )
        object.__setattr__(self, "centers", _frozen_array(c))
        object.__setattr__(self, "bound_radius", float(np.sqrt((c**2).sum(-1)).max()))

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def count(self) -> int:
        return self.centers.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """The fixed geometric weights 2^-1, 2^-2, ..., 2^-M."""
        return np.ldexp(1.0, -np.arange(1, self.count + 1))

    def min_pairwise_distance(self) -> float:
        if self.count == 1:
            return np.inf
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        return float(dist[np.triu_indices(self.count, 1)].min())


@dataclass(frozen=True)
class MapConfig:
    lambda_set: LambdaSet
    k: float

    def __post_init__(self):
        k = float(self.k)
        if not np.isfinite(k) or k <= 1.0:
            raise ValidationError("K must exceed 1")
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.lambda_set.dim

    @property
    def count(self) -> int:
        return self.lambda_set.count

    @property
    def inv_k(self) -> float:
        return 1.0 / self.k

    @property
    def alpha(self) -> float:
        return 1.0 - 1.0 / self.k


@dataclass(frozen=True)
class WeightDecomposition:
    """W, eta_n, unit directions w_n, and B at a point off the centers."""

    x: np.ndarray
    w_total: float
    eta: np.ndarray
    directions: np.ndarray
    b: SymMatrix

    def __post_init__(self):
        x = _frozen_array(self.x)
        eta = np.asarray(self.eta, dtype=np.float64)
        dirs = np.asarray(self.directions, dtype=np.float64)
        if not np.isfinite(self.w_total) or self.w_total <= 0.0:
            raise ValidationError("W must be finite and positive")
        if abs(eta.sum() - 1.0) > ETA_SUM_TOL:
            raise ValidationError(f"sum of eta must be 1 within {ETA_SUM_TOL:.0e}")
        if (eta < 0.0).any():
            raise ValidationError("each eta_n must be nonnegative")
        norms = np.sqrt((dirs**2).sum(-1))
        if np.abs(norms - 1.0).max() > UNIT_DIR_TOL:
            raise ValidationError(f"directions must be unit vectors within {UNIT_DIR_TOL:.0e}")
        if abs(self.b.trace() - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace of B must be 1 within {TRACE_TOL:.0e}")
        sig = eigen_sym(self.b).eigenvalues
        if sig[-1] < -B_SPECTRUM_TOL or sig[0] > 1.0 + B_SPECTRUM_TOL:
            raise ValidationError(
                "B must be positive semidefinite with operator norm at most 1 "
                f"(within {B_SPECTRUM_TOL:.0e})"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "eta", _frozen_array(eta))
        object.__setattr__(self, "directions", _frozen_array(dirs))


def _check_points(cfg: MapConfig, xs, allow_1d=False):
    pts = np.ascontiguousarray(xs, dtype=np.float64)
    if allow_1d and pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != cfg.dim:
        raise ValidationError(f"points must have shape (n, {cfg.dim}), got {np.shape(xs)}")
    if not np.isfinite(pts).all():
        raise NonFiniteError("point coordinates must be finite")
    return pts


def eval_map(cfg: MapConfig, x) -> np.ndarray:
    """Exact finite sum of the weighted stretches; defined on all of R^d.

    Left-to-right Kahan-compensated accumulation over the centers.
    """
    pts = _check_points(cfg, x, allow_1d=True)
    return kernels.eval_map_many(cfg.lambda_set.centers, cfg.inv_k, pts)[0]


def eval_map_many(cfg: MapConfig, xs) -> np.ndarray:
    pts = _check_points(cfg, xs)
    return kernels.eval_map_many(cfg.lambda_set.centers, cfg.inv_k, pts)


def weight_decomposition(cfg: MapConfig, x) -> WeightDecomposition:
    """W, eta, unit directions, and B at x; OnLambdaError names the center hit."""
    pts = _check_points(cfg, x, allow_1d=True)
    w, eta, dirs, b, nearest, _, on_lambda = kernels.weight_decomp_point(
        cfg.lambda_set.centers, cfg.inv_k, pts[0]
    )
    if on_lambda:
        raise OnLambdaError(int(nearest))
    return WeightDecomposition(pts[0], float(w), eta, dirs, SymMatrix(b))


def jac_map(cfg: MapConfig, x) -> SymMatrix:
    """Analytic Jacobian in the factored form W * (I - alpha * B)."""
    wd = weight_decomposition(cfg, x)
    mat = wd.w_total * (np.eye(cfg.dim) - cfg.alpha * wd.b.entries)
    return SymMatrix(mat)


def weight_fields_many(cfg: MapConfig, xs):
    """Batch W, B, nearest-center distance/index, and on-center flags.

    Returns (w_tot, b, min_dist, nearest, on_lambda); rows flagged
    on_lambda have NaN fields.
    """
    pts = _check_points(cfg, xs)
    return kernels.weight_b_many(cfg.lambda_set.centers, cfg.inv_k, pts)


def jac_direct_sum_many(cfg: MapConfig, xs) -> np.ndarray:
    """Jacobian via the direct weighted series sum (cross-check frame)."""
    pts = _check_points(cfg, xs)
    return kernels.jac_sum_many(cfg.lambda_set.centers, cfg.inv_k, cfg.alpha, pts)
