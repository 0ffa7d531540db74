"""Dense symmetric linear algebra for small dimensions (2 <= d <= 64).

Eigendecomposition is cyclic Jacobi (off-diagonal Frobenius mass below
1e-14 * ||M||_F, hard cap 100 sweeps); determinant and operator norm are
derived from the spectrum so every downstream identity is checked in one
consistent frame.
"""

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import NoConvergenceError, NonFiniteError, ValidationError

MAX_DIM = 64

ASYM_REL_TOL = 1e-12
ORTHO_TOL = 1e-10
RECON_REL_TOL = 1e-10


def _frozen_array(a):
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix; construction symmetrizes by averaging.

    The pre-symmetrization residual ||A - A^T||_F is recorded and must not
    exceed 1e-12 * ||A||_F.
    """

    entries: np.ndarray
    asym_residual: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"entries must be a square matrix, got shape {a.shape}")
        d = a.shape[0]
        if d < 2:
            raise ValidationError("dim must be at least 2 (one-dimensional case rejected)")
        if d > MAX_DIM:
            raise ValidationError(f"dim must be at most {MAX_DIM}, got {d}")
        if not np.isfinite(a).all():
            raise NonFiniteError("matrix entries must be finite")
        fro = float(np.sqrt((a * a).sum()))
        resid = float(np.sqrt(((a - a.T) ** 2).sum()))
        if resid > ASYM_REL_TOL * fro:
            raise ValidationError(
                f"asymmetry residual {resid:.3e} exceeds {ASYM_REL_TOL:.0e} * Frobenius norm"
            )
        object.__setattr__(self, "entries", _frozen_array((a + a.T) / 2.0))
        object.__setattr__(self, "asym_residual", resid)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def frobenius(self) -> float:
        return float(np.sqrt((self.entries**2).sum()))

    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending with matching orthonormal column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        v = np.asarray(self.eigenvectors, dtype=np.float64)
        if w.ndim != 1 or v.shape != (w.size, w.size):
            raise ValidationError("eigenvalues must be (d,), eigenvectors (d, d)")
        if not (np.isfinite(w).all() and np.isfinite(v).all()):
            raise NonFiniteError("spectrum must be finite")
        if np.any(np.diff(w) > 0):
            raise ValidationError("eigenvalues must be sorted descending")
        gram = v.T @ v - np.eye(w.size)
        if np.abs(gram).max() > ORTHO_TOL:
            raise ValidationError(
                f"eigenvector columns not orthonormal within {ORTHO_TOL:.0e}"
            )
        object.__setattr__(self, "eigenvalues", _frozen_array(w))
        object.__setattr__(self, "eigenvectors", _frozen_array(v))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class ElemSymPolys:
    """Values P_0..P_d of the elementary symmetric polynomials; P_0 = 1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise ValidationError("values must be a vector P_0..P_d")
        if v[0] != 1.0:
            raise ValidationError("P_0 must equal 1 exactly")
        if not np.isfinite(v).all():
            raise NonFiniteError("polynomial values must be finite")
        object.__setattr__(self, "values", _frozen_array(v))

    @property
    def degree(self) -> int:
        return self.values.size - 1


def eigen_sym(m: SymMatrix, *, max_sweeps: int = 100) -> Spectrum:
    """Eigendecomposition via cyclic Jacobi rotations.

    Deterministic for identical input; raises NoConvergenceError if the
    sweep cap is exceeded (pathological input).
    """
    a = np.ascontiguousarray(m.entries, dtype=np.float64)
    if not np.isfinite(a).all():
        raise NonFiniteError("matrix entries must be finite")
    w, v, ok = kernels.jacobi_eigh(a, max_sweeps)
    if not ok:
        raise NoConvergenceError(f"Jacobi did not converge within {max_sweeps} sweeps")
    recon = (v * w) @ v.T
    fro = float(np.sqrt((a * a).sum()))
    drift = float(np.sqrt(((recon - a) ** 2).sum()))
    if drift > RECON_REL_TOL * fro:
        raise NoConvergenceError(
            f"spectral reconstruction drift {drift:.3e} exceeds {RECON_REL_TOL:.0e} * ||M||_F"
        )
    return Spectrum(w, v)


def operator_norm(m: SymMatrix) -> float:
    """Euclidean operator norm: max |eigenvalue| for symmetric input."""
    s = eigen_sym(m)
    return float(np.abs(s.eigenvalues).max())


def determinant(m: SymMatrix) -> float:
    """Determinant as the product of the eigenvalues."""
    s = eigen_sym(m)
    return float(np.prod(s.eigenvalues))


def esp_values(sigma) -> np.ndarray:
    """P_0..P_d by incrementally multiplying out prod(1 + sigma_i t).

    Input is processed in descending order; O(d^2), stable for
    nonnegative entries.
    """
    sig = np.sort(np.asarray(sigma, dtype=np.float64))[::-1]
    if not np.isfinite(sig).all():
        raise NonFiniteError("spectrum must be finite")
    d = sig.size
    vals = np.zeros(d + 1)
    vals[0] = 1.0
    for i in range(d):
        for j in range(min(i + 1, d), 0, -1):
            vals[j] += sig[i] * vals[j - 1]
    return vals


def esp_batch(sigmas: np.ndarray) -> np.ndarray:
    """Row-wise esp_values for a (B, d) batch."""
    sig = np.sort(np.asarray(sigmas, dtype=np.float64), axis=1)[:, ::-1]
    b, d = sig.shape
    vals = np.zeros((b, d + 1))
    vals[:, 0] = 1.0
    for i in range(d):
        s = sig[:, i]
        for j in range(min(i + 1, d), 0, -1):
            vals[:, j] += s * vals[:, j - 1]
    return vals


def elem_sym_polys(s: Spectrum) -> ElemSymPolys:
    """Elementary symmetric polynomials of the eigenvalues."""
    return ElemSymPolys(esp_values(s.eigenvalues))
