"""Runtime verification of the distortion bounds and stretching estimates.

Covers: per-point distortion reports, the operator-norm / determinant
bounds for I - alpha*B, the elementary-symmetric-polynomial chain
inequality, multiscale stretching-exponent estimation, the per-stretch
displacement bound with an empirically calibrated constant, and the
cutoff/radius bookkeeping that isolates one center's stretch term.
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import GUARD, kernels
from .composite import (
    MapConfig,
    WeightDecomposition,
    _check_points,
    eval_map_many,
    jac_map,
    weight_decomposition,
    weight_fields_many,
)
from .errors import (
    AllRungsDegenerateError,
    IndexOutOfRangeError,
    NonFiniteError,
    QcsError,
    SpectrumOutOfRangeError,
    ValidationError,
)
from .stretch import StretchParams, eval_stretch_many
from .symmat import Spectrum, SymMatrix, _frozen_array, eigen_sym, esp_values

RATIO_REL_TOL = 1e-9
DET_GAP_TOL = 1e-11
PK_SLACK_TOL = 1e-12
DET_FRAME_AGREE_TOL = 1e-10
SPECTRUM_SUM_TOL = 1e-9
SPECTRUM_RANGE_TOL = 1e-11
UNIT_TOL = 1e-13

CALIBRATION_MARGIN = 1.05
PK_TAIL_ALPHAS = (0.1, 0.5, 0.9)


@dataclass(frozen=True)
class DistortionReport:
    """Pointwise distortion data: op-norm, determinant, their ratio, margins."""

    x: np.ndarray
    op_norm: float
    det: float
    ratio: float
    margin: float
    spectrum_b: Spectrum
    det_lower_gap: float

    def __post_init__(self):
        k = self.ratio + self.margin
        if self.margin < -RATIO_REL_TOL * k:
            raise ValidationError(
                f"distortion ratio {self.ratio} exceeds K={k} beyond tolerance"
            )
        if self.det_lower_gap < -DET_GAP_TOL:
            raise ValidationError(
                f"det(I - alpha*B) fell below 1/K by {-self.det_lower_gap:.3e}"
            )
        object.__setattr__(self, "x", _frozen_array(self.x))


@dataclass(frozen=True)
class ScaleLadder:
    """Geometric scale ladder r_k = r0 * q^k, k = 0..count-1."""

    r0: float
    q: float
    count: int

    def __post_init__(self):
        if not (np.isfinite(self.r0) and self.r0 > 0.0):
            raise ValidationError("r0 must be finite and positive")
        if not (0.0 < self.q < 1.0):
            raise ValidationError("q must lie in (0, 1)")
        if self.count < 4:
            raise ValidationError("count must be at least 4")
        if self.r0 * self.q ** (self.count - 1) < GUARD:
            raise ValidationError("smallest scale falls below the evaluation guard")

    @property
    def scales(self) -> np.ndarray:
        return self.r0 * self.q ** np.arange(self.count, dtype=np.float64)


def default_ladder(count: int = 31) -> ScaleLadder:
    """Dyadic ladder from 2^-10 down (31 rungs reach 2^-40)."""
    return ScaleLadder(r0=2.0**-10, q=0.5, count=count)


@dataclass(frozen=True)
class ExponentEstimate:
    """Secant and least-squares stretching-exponent diagnostics at a base point."""

    base: np.ndarray
    direction: np.ndarray
    ladder: ScaleLadder
    displacements: np.ndarray
    used: np.ndarray
    secant_slopes: np.ndarray
    fitted_slope: float
    residual: float

    def __post_init__(self):
        u = np.asarray(self.direction, dtype=np.float64)
        if abs(math.sqrt(float((u * u).sum())) - 1.0) > UNIT_TOL:
            raise ValidationError("direction must be a unit vector")
        d = np.asarray(self.displacements, dtype=np.float64)
        used = np.asarray(self.used, dtype=bool)
        if (d[used] <= 0.0).any():
            raise ValidationError("used displacements must be strictly positive")
        used.setflags(write=False)
        object.__setattr__(self, "base", _frozen_array(self.base))
        object.__setattr__(self, "direction", _frozen_array(u))
        object.__setattr__(self, "displacements", _frozen_array(d))
        object.__setattr__(self, "used", used)
        object.__setattr__(self, "secant_slopes", _frozen_array(self.secant_slopes))

    @property
    def excluded(self) -> np.ndarray:
        return np.flatnonzero(~self.used)

    @property
    def deepest_secant(self) -> float:
        if self.secant_slopes.size == 0:
            return float("nan")
        return float(self.secant_slopes[-1])


@dataclass(frozen=True)
class RStarPlan:
    """Cutoff index and radius below which competing stretch terms are negligible."""

    target_index: int
    epsilon: float
    c: float
    a: int
    n_star: int
    rho: float
    r_star: float
    unconstrained: bool = False

    def __post_init__(self):
        if self.c / 2.0 ** (self.n_star - 1) >= self.epsilon:
            raise ValidationError("cutoff invariant C / 2^(N*-1) < epsilon violated")
        if not self.unconstrained and not (self.r_star > 0.0):
            raise ValidationError("r* must be positive for multi-center sets")


@dataclass(frozen=True)
class StretchBoundReport:
    """Measured single-stretch displacement against C*min(r^(1/K), r*|center|^(1/K-1))."""

    center: np.ndarray
    r: float
    direction: np.ndarray
    t: float
    measured: float
    bound: float
    slack: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen_array(self.center))
        object.__setattr__(self, "direction", _frozen_array(self.direction))


@dataclass(frozen=True)
class CalibrationResult:
    """Empirical constant for the single-stretch displacement bound."""

    k: float
    dim: int
    c_star: float
    c: float
    n_directions: int
    n_scales: int
    seed: int
    scale: float = 1.0


@dataclass(frozen=True)
class DistortionFields:
    """Batch distortion quantities over sample points (NaN rows are on-center)."""

    points: np.ndarray
    w_total: np.ndarray
    op_norm: np.ndarray
    det: np.ndarray
    ratio: np.ndarray
    margin: np.ndarray
    min_dist: np.ndarray
    on_lambda: np.ndarray
    sigma_b: np.ndarray
    trace_b: np.ndarray
    opnorm_iab: np.ndarray
    det_iab: np.ndarray


def distortion_report(cfg: MapConfig, x) -> DistortionReport:
    """Distortion data at x from the Jacobian and the weight decomposition."""
    wd = weight_decomposition(cfg, x)
    jac = jac_map(cfg, x)
    spec_jac = eigen_sym(jac)
    op = float(np.abs(spec_jac.eigenvalues).max())
    det = float(np.prod(spec_jac.eigenvalues))
    ratio = op**cfg.dim / det
    spec_b = eigen_sym(wd.b)
    det_iab = float(np.prod(1.0 - cfg.alpha * spec_b.eigenvalues))
    return DistortionReport(
        x=wd.x,
        op_norm=op,
        det=det,
        ratio=ratio,
        margin=cfg.k - ratio,
        spectrum_b=spec_b,
        det_lower_gap=det_iab - cfg.inv_k,
    )


def distortion_fields_many(cfg: MapConfig, xs) -> DistortionFields:
    """Vectorized distortion sweep; the scalar report is its cross-check oracle."""
    pts = _check_points(cfg, xs)
    w, b, min_dist, _, on_lambda = weight_fields_many(cfg, pts)
    n = pts.shape[0]
    sigma = np.full((n, cfg.dim), np.nan)
    valid = ~on_lambda
    if valid.any():
        sig, _, ok = kernels.jacobi_eigh_many(np.ascontiguousarray(b[valid]))
        if not ok.all():
            raise QcsError("Jacobi failed to converge on a batch sample")
        sigma[valid] = sig
    trace_b = b[:, np.arange(cfg.dim), np.arange(cfg.dim)].sum(axis=1)
    eigs_jac = w[:, None] * (1.0 - cfg.alpha * sigma)
    op = eigs_jac.max(axis=1)
    det = np.prod(eigs_jac, axis=1)
    ratio = op**cfg.dim / det
    opnorm_iab = np.abs(1.0 - cfg.alpha * sigma).max(axis=1)
    det_iab = np.prod(1.0 - cfg.alpha * sigma, axis=1)
    return DistortionFields(
        points=pts,
        w_total=w,
        op_norm=op,
        det=det,
        ratio=ratio,
        margin=cfg.k - ratio,
        min_dist=min_dist,
        on_lambda=on_lambda,
        sigma_b=sigma,
        trace_b=trace_b,
        opnorm_iab=opnorm_iab,
        det_iab=det_iab,
    )


def check_operator_norm_bound(wd: WeightDecomposition, alpha: float) -> float:
    """Slack 1 - ||I - alpha*B||; the eigenvalues must lie in (0, 1]."""
    d = wd.b.dim
    spec = eigen_sym(SymMatrix(np.eye(d) - alpha * wd.b.entries))
    if spec.eigenvalues[-1] <= 0.0:
        raise QcsError("eigenvalue of I - alpha*B is not positive")
    return 1.0 - float(np.abs(spec.eigenvalues).max())


def _spectrum_values(s) -> np.ndarray:
    if isinstance(s, Spectrum):
        return np.asarray(s.eigenvalues, dtype=np.float64)
    return np.asarray(s, dtype=np.float64)


def check_determinant_bound(s, alpha: float, k: float) -> float:
    """Gap det(I - alpha*B) - 1/K, cross-checked via the alternating expansion."""
    sig = _spectrum_values(s)
    if not np.isfinite(sig).all():
        raise NonFiniteError("spectrum must be finite")
    if abs(sig.sum() - 1.0) > SPECTRUM_SUM_TOL:
        raise SpectrumOutOfRangeError(f"eigenvalues must sum to 1, got {sig.sum()!r}")
    if sig.min() < -SPECTRUM_RANGE_TOL or sig.max() > 1.0 + SPECTRUM_RANGE_TOL:
        raise SpectrumOutOfRangeError("eigenvalues must lie in [0, 1]")
    gap = float(np.prod(1.0 - alpha * sig)) - 1.0 / k
    p = esp_values(sig)
    tail = 0.0
    for j in range(2, sig.size + 1):
        tail += (-alpha) ** j * p[j]
    det_esp = 1.0 / k + tail
    gap_esp = det_esp - 1.0 / k
    if abs(gap - gap_esp) > DET_FRAME_AGREE_TOL:
        raise QcsError(
            f"determinant gap frames disagree: {gap!r} (product) vs {gap_esp!r} (expansion)"
        )
    return gap


def check_pk_chain(s) -> np.ndarray:
    """Slacks P_k - (k+1) P_{k+1}, k = 1..d-1, for a simplex spectrum.

    Entries below zero by at most the spectral tolerance are clamped; the
    alternating tails for the reference alpha values are verified as well.
    """
    sig = _spectrum_values(s)
    if not np.isfinite(sig).all():
        raise NonFiniteError("spectrum must be finite")
    if sig.min() < -SPECTRUM_RANGE_TOL:
        raise SpectrumOutOfRangeError("eigenvalues must be nonnegative")
    if abs(sig.sum() - 1.0) > SPECTRUM_SUM_TOL:
        raise SpectrumOutOfRangeError(f"eigenvalues must sum to 1, got {sig.sum()!r}")
    sig = np.maximum(sig, 0.0)
    p = esp_values(sig)
    d = sig.size
    ks = np.arange(1, d)
    slacks = p[1:d] - (ks + 1) * p[2 : d + 1]
    for alpha in PK_TAIL_ALPHAS:
        tail = 0.0
        for j in range(2, d + 1):
            tail += (-alpha) ** j * p[j]
        if tail < -PK_SLACK_TOL:
            raise QcsError(f"alternating tail negative ({tail!r}) at alpha={alpha}")
    return slacks


def estimate_exponent(cfg: MapConfig, base, u, ladder: ScaleLadder) -> ExponentEstimate:
    """Fit log-displacement against log-scale along the ladder at base.

    Rungs whose displacement underflows to zero are excluded and reported
    via the ``used`` mask.
    """
    base_pt = _check_points(cfg, base, allow_1d=True)[0]
    direction = np.asarray(u, dtype=np.float64)
    if direction.shape != (cfg.dim,):
        raise ValidationError(f"direction must have shape ({cfg.dim},)")
    if abs(math.sqrt(float((direction**2).sum())) - 1.0) > UNIT_TOL:
        raise ValidationError("direction must be a unit vector")
    scales = ladder.scales
    pts = np.vstack([base_pt[None, :] + scales[:, None] * direction[None, :], base_pt[None, :]])
    values = eval_map_many(cfg, pts)
    disp = np.sqrt(((values[:-1] - values[-1]) ** 2).sum(-1))
    used = np.isfinite(disp) & (disp > 0.0)
    if not used.any():
        raise AllRungsDegenerateError("every rung displacement underflowed")
    x = np.log(scales[used])
    y = np.log(disp[used])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())
    secants = np.diff(y) / np.diff(x)
    return ExponentEstimate(
        base=base_pt,
        direction=direction,
        ladder=ladder,
        displacements=disp,
        used=used,
        secant_slopes=secants,
        fitted_slope=float(slope),
        residual=residual,
    )


def check_stretch_bound(lam, k: float, r: float, u, c: float) -> StretchBoundReport:
    """Measured |S(r u) - S(0)| for the stretch centered at lam, against the bound."""
    center = np.asarray(lam, dtype=np.float64)
    params = StretchParams(center, k)
    lam_norm = float(np.sqrt((center**2).sum()))
    if lam_norm <= GUARD:
        raise ValidationError("center must be nonzero")
    if not (r > 0.0 and np.isfinite(r)):
        raise ValidationError("r must be positive and finite")
    direction = np.asarray(u, dtype=np.float64)
    if abs(math.sqrt(float((direction**2).sum())) - 1.0) > UNIT_TOL:
        raise ValidationError("direction must be a unit vector")
    pts = np.vstack([r * direction[None, :], np.zeros((1, center.size))])
    vals = eval_stretch_many(params, pts)
    measured = float(np.sqrt(((vals[0] - vals[1]) ** 2).sum()))
    inv_k = 1.0 / k
    bound = c * min(r**inv_k, r * lam_norm ** (inv_k - 1.0))
    return StretchBoundReport(
        center=center,
        r=r,
        direction=direction,
        t=r / lam_norm,
        measured=measured,
        bound=bound,
        slack=bound - measured,
    )


def calibrate_stretch_constant(
    k: float,
    dim: int = 3,
    n_directions: int = 1024,
    n_scales: int = 512,
    seed: int = 0,
    scale: float = 1.0,
    margin: float = CALIBRATION_MARGIN,
) -> CalibrationResult:
    """Empirical sup of measured / min(r^(1/K), r |center|^(1/K-1)).

    Sweeps seeded random unit directions (plus the two radial ones) against
    log-spaced radii around the center scale; returns the sup and the
    padded constant margin * sup. The result is scale-invariant up to
    rounding, so the default unit center scale is representative.
    """
    if dim < 2:
        raise ValidationError("dimension must be at least 2")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_directions, dim))
    dirs /= np.sqrt((dirs**2).sum(-1))[:, None]
    radial = np.zeros((2, dim))
    radial[0, 0] = 1.0
    radial[1, 0] = -1.0
    dirs = np.vstack([radial, dirs])
    ts = np.concatenate([np.logspace(-6.0, 3.0, n_scales), np.linspace(0.25, 4.0, 64)])
    center = np.zeros(dim)
    center[0] = scale
    params = StretchParams(center, k)
    inv_k = 1.0 / k
    rs = ts * scale
    pts = (rs[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    vals = eval_stretch_many(params, pts).reshape(rs.size, dirs.shape[0], dim)
    origin_val = eval_stretch_many(params, np.zeros((1, dim)))[0]
    disp = np.sqrt(((vals - origin_val[None, None, :]) ** 2).sum(-1))
    denom = np.minimum(rs**inv_k, rs * scale ** (inv_k - 1.0))
    ratio = disp / denom[:, None]
    c_star = float(ratio.max())
    return CalibrationResult(
        k=k,
        dim=dim,
        c_star=c_star,
        c=margin * c_star,
        n_directions=n_directions,
        n_scales=n_scales,
        seed=seed,
        scale=scale,
    )


def predict_r_star(cfg: MapConfig, n_index: int, epsilon: float, c: float) -> RStarPlan:
    """Cutoff N* = N + A with C/2^(N*-1) < epsilon, and the matching radius r*.

    For a singleton set there are no competing centers; the plan is
    flagged unconstrained with r* = +inf.
    """
    m = cfg.count
    if not 1 <= n_index <= m:
        raise IndexOutOfRangeError(f"index {n_index} outside 1..{m}")
    if not (epsilon > 0.0 and np.isfinite(epsilon)):
        raise ValidationError("epsilon must be positive and finite")
    if not (c > 0.0 and np.isfinite(c)):
        raise ValidationError("C must be positive and finite")
    a = 1
    while c / 2.0 ** (n_index + a - 1) >= epsilon:
        a += 1
    n_star = n_index + a
    if m == 1:
        return RStarPlan(
            target_index=n_index,
            epsilon=epsilon,
            c=c,
            a=a,
            n_star=n_star,
            rho=np.inf,
            r_star=np.inf,
            unconstrained=True,
        )
    centers = cfg.lambda_set.centers
    others = [n for n in range(1, min(n_star, m) + 1) if n != n_index]
    dists = np.sqrt(((centers[[n - 1 for n in others]] - centers[n_index - 1]) ** 2).sum(-1))
    rho = float(dists.min())
    r_star = rho * (epsilon / c) ** (cfg.k / (cfg.k - 1.0))
    return RStarPlan(
        target_index=n_index,
        epsilon=epsilon,
        c=c,
        a=a,
        n_star=n_star,
        rho=rho,
        r_star=r_star,
    )


def split_tail_check(cfg: MapConfig, n_index: int, plan: RStarPlan, r: float):
    """(near_sum, far_sum) of competing stretch terms at lambda_N + r e1.

    near: indices at or beyond the cutoff N*; far: indices below it,
    excluding N. Both must stay below epsilon * r^(1/K) when r < r*.
    """
    m = cfg.count
    if not 1 <= n_index <= m:
        raise IndexOutOfRangeError(f"index {n_index} outside 1..{m}")
    if not r < plan.r_star:
        raise ValidationError("r must lie strictly below the plan's r*")
    if not (r > 0.0 and np.isfinite(r)):
        raise ValidationError("r must be positive and finite")
    centers = cfg.lambda_set.centers
    base = centers[n_index - 1]
    probe = base.copy()
    probe[0] += r
    pts = np.vstack([probe[None, :], base[None, :]])
    near_terms = []
    far_terms = []
    for n in range(1, m + 1):
        if n == n_index:
            continue
        params = StretchParams(centers[n - 1], cfg.k)
        vals = eval_stretch_many(params, pts)
        term = math.ldexp(1.0, -n) * float(np.sqrt(((vals[0] - vals[1]) ** 2).sum()))
        if n >= plan.n_star:
            near_terms.append(term)
        else:
            far_terms.append(term)
    return math.fsum(near_terms), math.fsum(far_terms)
