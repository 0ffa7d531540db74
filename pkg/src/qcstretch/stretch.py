"""The single radial stretch and its closed-form Jacobian.

The map sends x to (x - center) * |x - center|^(1/K - 1); the Jacobian is
a rank-one perturbation of a scaled identity, symmetric positive definite
away from the center.
"""

from dataclasses import dataclass

import numpy as np

from .backend import GUARD, kernels
from .errors import DegeneratePointError, NonFiniteError, ValidationError
from .symmat import MAX_DIM, SymMatrix, _frozen_array


@dataclass(frozen=True)
class StretchParams:
    """Center and distortion constant K > 1 (strict)."""

    center: np.ndarray
    k: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1:
            raise ValidationError("center must be a vector")
        if c.size < 2 or c.size > MAX_DIM:
            raise ValidationError(f"dimension must be in [2, {MAX_DIM}], got {c.size}")
        if not np.isfinite(c).all():
            raise NonFiniteError("center coordinates must be finite")
        k = float(self.k)
        if not np.isfinite(k) or k <= 1.0:
            raise ValidationError("K must exceed 1")
        object.__setattr__(self, "center", _frozen_array(c))
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def inv_k(self) -> float:
        return 1.0 / self.k

    @property
    def alpha(self) -> float:
        return 1.0 - 1.0 / self.k


def _check_point(p: StretchParams, x) -> np.ndarray:
    pt = np.asarray(x, dtype=np.float64)
    if pt.shape != (p.dim,):
        raise ValidationError(f"point must have shape ({p.dim},), got {pt.shape}")
    if not np.isfinite(pt).all():
        raise NonFiniteError("point coordinates must be finite")
    return pt


def eval_stretch(p: StretchParams, x) -> np.ndarray:
    """(x - center) |x - center|^(1/K - 1); zero at the center (continuous extension)."""
    pt = _check_point(p, x)
    return kernels.eval_stretch_many(p.center, p.inv_k, pt[None, :])[0]


def eval_stretch_many(p: StretchParams, xs: np.ndarray) -> np.ndarray:
    pts = np.ascontiguousarray(xs, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != p.dim:
        raise ValidationError(f"points must have shape (n, {p.dim})")
    return kernels.eval_stretch_many(p.center, p.inv_k, pts)


def jac_stretch(p: StretchParams, x) -> SymMatrix:
    """Analytic Jacobian s * (I - alpha u u^T) with s = |x-center|^(1/K-1).

    Raises DegeneratePointError within the on-center guard: the Jacobian is
    singularly scaled there.
    """
    pt = _check_point(p, x)
    diff = pt - p.center
    m = np.abs(diff).max()
    if m <= GUARD:
        raise DegeneratePointError("point is on (or within guard of) the stretch center")
    r = m * float(np.sqrt(np.sum((diff / m) ** 2)))
    if r <= GUARD:
        raise DegeneratePointError("point is on (or within guard of) the stretch center")
    s = np.exp((p.inv_k - 1.0) * np.log(r))
    u = diff / r
    mat = s * (np.eye(p.dim) - p.alpha * np.outer(u, u))
    return SymMatrix(mat)


def jac_stretch_eigenvalues(p: StretchParams, x) -> tuple[float, float]:
    """(radial, tangential) eigenvalues of the Jacobian: (s/K, s)."""
    pt = _check_point(p, x)
    diff = pt - p.center
    m = np.abs(diff).max()
    if m <= GUARD:
        raise DegeneratePointError("point is on (or within guard of) the stretch center")
    r = m * float(np.sqrt(np.sum((diff / m) ** 2)))
    s = float(np.exp((p.inv_k - 1.0) * np.log(r)))
    return s * p.inv_k, s
