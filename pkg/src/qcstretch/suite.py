"""The runnable verification suite: every distortion-proof invariant as a check.

Each check yields a worst margin (pass iff margin >= 0) plus the sample
count; failing per-sample checks carry the worst sample's coordinates.
Stretching-exponent fits at the configured centers are deliberately not
asserted here: for arbitrary center geometries the shallow rungs of a
fixed ladder mix in the locally-Lipschitz terms, so only scale-free
stretching facts (singleton slope, off-center bilipschitz slope, and the
cutoff/tail bookkeeping below r*) are theorem-guaranteed.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .backend import BACKEND_NAME
from .composite import (
    LambdaSet,
    MapConfig,
    eval_map_many,
    jac_direct_sum_many,
    weight_decomposition,
    weight_fields_many,
)
from .errors import QcsError
from .symmat import esp_batch


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    samples: int
    witness: list | None = None


@dataclass(frozen=True)
class SuiteReport:
    checks: list
    all_pass: bool
    seed: int
    samples: int
    backend: str
    c_star: float
    c: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "all_pass": self.all_pass,
                "backend": self.backend,
                "calibration": {"c": self.c, "c_star": self.c_star},
                "checks": [
                    {
                        "name": c.name,
                        "pass": c.passed,
                        "worst_margin": c.worst_margin,
                        "samples": c.samples,
                        **({"witness": c.witness} if c.witness is not None else {}),
                    }
                    for c in self.checks
                ],
                "samples": self.samples,
                "seed": self.seed,
            },
            sort_keys=True,
            indent=2,
        )

    def human_lines(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"[{status}] {c.name:28s} worst_margin={c.worst_margin:.6e} samples={c.samples}"
            if c.witness is not None:
                line += f" witness={c.witness}"
            lines.append(line)
        lines.append(f"result: {'all checks passed' if self.all_pass else 'CHECKS FAILED'}")
        return lines


def _sample_box(cfg):
    centers = cfg.lambda_set.centers
    lo = centers.min(axis=0) - 1.0
    hi = centers.max(axis=0) + 1.0
    return lo, hi


def _result(name, margin, samples, witness=None):
    passed = bool(margin >= 0.0 and np.isfinite(margin))
    return CheckResult(
        name=name,
        passed=passed,
        worst_margin=float(margin),
        samples=int(samples),
        witness=None if passed else witness,
    )


def _witness(points, idx):
    return [float(v) for v in points[idx]]


def run_verification_suite(cfg: MapConfig, samples: int = 10000, seed: int = 0) -> SuiteReport:
    """Run every invariant check at the configured sample counts."""
    rng = np.random.default_rng(seed)
    checks = []
    k, alpha, d = cfg.k, cfg.alpha, cfg.dim

    # 0. the config object itself (guards against post-load corruption);
    # every later check presumes these invariants, so stop early on failure
    try:
        reconstructed = MapConfig(LambdaSet(np.array(cfg.lambda_set.centers)), cfg.k)
        margin = min(
            reconstructed.lambda_set.min_pairwise_distance() - 1e-12,
            cfg.k - 1.0,
        )
        checks.append(_result("config-invariants", margin, cfg.count))
    except QcsError as exc:
        checks.append(
            CheckResult("config-invariants", False, float("-inf"), cfg.count, [str(exc)])
        )
    if not checks[0].passed:
        return SuiteReport(
            checks=checks,
            all_pass=False,
            seed=seed,
            samples=samples,
            backend=BACKEND_NAME,
            c_star=float("nan"),
            c=float("nan"),
        )

    lo, hi = _sample_box(cfg)
    pts = rng.uniform(lo, hi, size=(samples, d))
    f = analysis.distortion_fields_many(cfg, pts)
    valid = ~f.on_lambda
    nv = int(valid.sum())
    sig = f.sigma_b[valid]

    # 1. trace of B equals 1
    dev = np.abs(f.trace_b[valid] - 1.0)
    i = int(np.argmax(dev))
    checks.append(_result("trace-b", 1e-11 - dev[i], nv, _witness(pts[valid], i)))

    # 2. spectrum of B within [0, 1] (tolerance 1e-11)
    excess = np.maximum(sig.max(axis=1) - 1.0, -sig.min(axis=1))
    i = int(np.argmax(excess))
    checks.append(_result("b-spectrum-range", 1e-11 - excess[i], nv, _witness(pts[valid], i)))

    # 3. operator norm of I - alpha B at most 1
    i = int(np.argmax(f.opnorm_iab[valid]))
    checks.append(
        _result("opnorm-bound", (1.0 + 1e-11) - f.opnorm_iab[valid][i], nv, _witness(pts[valid], i))
    )

    # 4. determinant of I - alpha B at least 1/K
    i = int(np.argmin(f.det_iab[valid]))
    checks.append(
        _result("det-bound", f.det_iab[valid][i] - (1.0 / k - 1e-11), nv, _witness(pts[valid], i))
    )

    # 5. distortion ratio at most K
    i = int(np.argmax(f.ratio[valid]))
    checks.append(
        _result("distortion-ratio", k * (1.0 + 1e-9) - f.ratio[valid][i], nv, _witness(pts[valid], i))
    )

    # 6. eta sums to 1, unit directions (decomposition detail, subset)
    nsub = min(256, nv)
    sub_idx = np.flatnonzero(valid)[:nsub]
    worst_eta = 0.0
    worst_dir = 0.0
    for j in sub_idx:
        wd = weight_decomposition(cfg, pts[j])
        worst_eta = max(worst_eta, abs(float(wd.eta.sum()) - 1.0))
        worst_dir = max(
            worst_dir, float(np.abs(np.sqrt((wd.directions**2).sum(-1)) - 1.0).max())
        )
    checks.append(_result("eta-sum", 1e-12 - worst_eta, nsub))
    checks.append(_result("unit-directions", 1e-13 - worst_dir, nsub))

    # 7. P_k chain and alternating tail on the sampled B spectra
    sig_clamped = np.maximum(sig, 0.0)
    p = esp_batch(sig_clamped)
    ks = np.arange(1, d)
    slack = p[:, 1:d] - (ks + 1)[None, :] * p[:, 2 : d + 1]
    min_slack = float(slack.min()) if slack.size else 0.0
    min_tail = np.inf
    for a_val in (*analysis.PK_TAIL_ALPHAS, alpha):
        tail = np.zeros(p.shape[0])
        for j in range(2, d + 1):
            tail += (-a_val) ** j * p[:, j]
        min_tail = min(min_tail, float(tail.min()))
    checks.append(_result("pk-chain", min(min_slack, min_tail) + 1e-12, nv))

    # 8. determinant gap: eigenvalue product vs alternating expansion
    gap_prod = f.det_iab[valid] - 1.0 / k
    tail = np.zeros(p.shape[0])
    for j in range(2, d + 1):
        tail += (-alpha) ** j * p[:, j]
    gap_esp = (1.0 / k + tail) - 1.0 / k
    diff = np.abs(gap_prod - gap_esp)
    i = int(np.argmax(diff))
    checks.append(_result("det-gap-frames", 1e-10 - diff[i], nv, _witness(pts[valid], i)))

    # 9. two Jacobian frames: W(I - alpha B) vs the direct series sum
    nsub = min(1024, nv)
    sub = pts[np.flatnonzero(valid)[:nsub]]
    w_sub, b_sub, _, _, _ = weight_fields_many(cfg, sub)
    jd = w_sub[:, None, None] * (np.eye(d)[None] - alpha * b_sub)
    js = jac_direct_sum_many(cfg, sub)
    rel = np.sqrt(((jd - js) ** 2).sum(axis=(1, 2))) / np.sqrt((js**2).sum(axis=(1, 2)))
    i = int(np.argmax(rel))
    checks.append(_result("jac-two-frames", 1e-11 - rel[i], nsub, _witness(sub, i)))

    # 10. analytic Jacobian vs central finite differences (off the centers)
    fd_idx = np.flatnonzero(valid & (f.min_dist >= 0.05))[:10]
    if fd_idx.size:
        fd_pts = pts[fd_idx]
        h = 1e-6
        w_fd, b_fd, _, _, _ = weight_fields_many(cfg, fd_pts)
        jan = w_fd[:, None, None] * (np.eye(d)[None] - alpha * b_fd)
        jfd = np.empty_like(jan)
        for axis in range(d):
            step = np.zeros(d)
            step[axis] = h
            jfd[:, :, axis] = (
                eval_map_many(cfg, fd_pts + step) - eval_map_many(cfg, fd_pts - step)
            ) / (2 * h)
        rel = np.sqrt(((jfd - jan) ** 2).sum(axis=(1, 2))) / np.sqrt((jan**2).sum(axis=(1, 2)))
        i = int(np.argmax(rel))
        checks.append(_result("jac-finite-diff", 1e-6 - rel[i], fd_idx.size, _witness(fd_pts, i)))
    else:
        checks.append(_result("jac-finite-diff", 0.0, 0))

    # 11. monotone pairing (injectivity surrogate): <F(x)-F(y), x-y> > 0
    xs = rng.uniform(lo, hi, size=(samples, d))
    ys = rng.uniform(lo, hi, size=(samples, d))
    keep = ((xs - ys) ** 2).sum(-1) > 0
    dots = ((eval_map_many(cfg, xs) - eval_map_many(cfg, ys)) * (xs - ys)).sum(-1)[keep]
    i = int(np.argmin(dots))
    checks.append(
        _result("injectivity-pairing", float(np.nextafter(dots[i], -np.inf)), int(keep.sum()),
                _witness(xs[keep], i))
    )

    # 12. translation / rotation / scale equivariance
    trials = 64
    worst = 0.0
    probe = rng.uniform(lo, hi, size=(trials, d))
    base_vals = eval_map_many(cfg, probe)
    base_norm = np.sqrt((base_vals**2).sum(-1))
    scale_ref = np.maximum(base_norm, 1.0)
    for t in range(trials):
        v = rng.normal(size=d)
        q_mat, _ = np.linalg.qr(rng.normal(size=(d, d)))
        c_scl = float(rng.uniform(0.5, 2.0))
        cen = cfg.lambda_set.centers
        cfg_t = MapConfig(LambdaSet(cen + v), k)
        cfg_r = MapConfig(LambdaSet(cen @ q_mat.T), k)
        cfg_s = MapConfig(LambdaSet(c_scl * cen), k)
        x = probe[t]
        val = base_vals[t]
        err_t = np.abs(eval_map_many(cfg_t, (x + v)[None])[0] - val).max()
        err_r = np.abs(eval_map_many(cfg_r, (q_mat @ x)[None])[0] - q_mat @ val).max()
        err_s = np.abs(
            eval_map_many(cfg_s, (c_scl * x)[None])[0] - c_scl ** (1.0 / k) * val
        ).max()
        worst = max(worst, max(err_t, err_r, err_s) / scale_ref[t])
    checks.append(_result("equivariance", 1e-12 - worst, trials))

    # 13. singleton stretching slope equals 1/K
    cfg_single = MapConfig(LambdaSet(cfg.lambda_set.centers[:1]), k)
    e1 = np.zeros(d)
    e1[0] = 1.0
    est = analysis.estimate_exponent(
        cfg_single, cfg.lambda_set.centers[0], e1, analysis.default_ladder()
    )
    checks.append(_result("exponent-singleton", 1e-10 - abs(est.fitted_slope - 1.0 / k), 1))

    # 14. bilipschitz slope ~ 1 away from the centers
    far_pt = cfg.lambda_set.centers.max(axis=0) + 1.0
    cand = [far_pt]
    interior = np.flatnonzero(valid & (f.min_dist >= 0.1))[:4]
    cand.extend(pts[j] for j in interior)
    worst = 0.0
    for x in cand:
        est = analysis.estimate_exponent(cfg, x, e1, analysis.default_ladder(count=21))
        worst = max(worst, abs(est.fitted_slope - 1.0))
    checks.append(_result("exponent-bilipschitz", 1e-3 - worst, len(cand)))

    # 15/16. calibrated stretch constant, then the cutoff/tail bookkeeping
    cal = analysis.calibrate_stretch_constant(k, d, seed=int(rng.integers(2**63)))
    worst_slack = np.inf
    n_bound_samples = 0
    cen = cfg.lambda_set.centers
    lam_pool = []
    for n in range(1, cfg.count):
        lam_pool.append(cen[n] - cen[0])
        if len(lam_pool) >= 16:
            break
    for _ in range(8):
        lam_pool.append(rng.normal(size=d) * float(rng.uniform(0.2, 5.0)))
    for lam in lam_pool:
        lam_norm = np.sqrt((lam**2).sum())
        if lam_norm <= 1e-9:
            continue
        for r_rel in np.logspace(-4, 1, 12):
            u = _unit_vec(rng.normal(size=d))
            rep = analysis.check_stretch_bound(lam, k, r_rel * lam_norm, u, cal.c)
            worst_slack = min(worst_slack, rep.slack)
            n_bound_samples += 1
    checks.append(_result("stretch-bound-slack", worst_slack, n_bound_samples))

    worst_tail = np.inf
    n_tail = 0
    if cfg.count > 1:
        for n in range(1, cfg.count + 1):
            eps = 2.0 ** (-(n + 2))
            plan = analysis.predict_r_star(cfg, n, eps, cal.c)
            for _ in range(5):
                r = plan.r_star * 10.0 ** float(-rng.uniform(0.001, 4.0))
                near, far = analysis.split_tail_check(cfg, n, plan, r)
                cap = eps * r ** (1.0 / k)
                worst_tail = min(worst_tail, cap - near, cap - far)
                n_tail += 1
        checks.append(_result("split-tail", worst_tail, n_tail))
    else:
        checks.append(_result("split-tail", 0.0, 0))

    all_pass = all(c.passed for c in checks)
    return SuiteReport(
        checks=checks,
        all_pass=all_pass,
        seed=seed,
        samples=samples,
        backend=BACKEND_NAME,
        c_star=cal.c_star,
        c=cal.c,
    )


def _unit_vec(v):
    return v / np.sqrt((v**2).sum())
