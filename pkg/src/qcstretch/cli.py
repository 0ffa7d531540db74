"""Command-line interface: evaluation, sweeps, calibration, verification.

Exit codes: 0 success, 1 failed verification check, 2 usage/config error.
Every --out export gains a <out>.manifest.json provenance sidecar.
"""

import argparse
import json
import sys
import time

import numpy as np

from .analysis import (
    ScaleLadder,
    calibrate_stretch_constant,
    default_ladder,
    distortion_report,
    predict_r_star,
)
from .backend import BACKEND_NAME
from .composite import eval_map_many, jac_map
from .errors import (
    IndexOutOfRangeError,
    OnLambdaError,
    ParseError,
    QcsError,
    ValidationError,
)
from .field import (
    GridAxis,
    RunManifest,
    config_digest,
    load_config,
    sample_distortion,
    sweep_distortion,
    sweep_exponent,
    write_distortion_csv,
    write_exponent_csv,
    write_manifest,
)
from .suite import run_verification_suite

VERSION = "0.1.0"


def _parse_floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse {what} {text!r}: {exc}") from exc


def _parse_grid_axis(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--grid expects LO,HI,N, got {text!r}")
    try:
        return GridAxis(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ValidationError(f"cannot parse --grid {text!r}: {exc}") from exc


def _parse_ladder(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--ladder expects R0,Q,COUNT, got {text!r}")
    try:
        return ScaleLadder(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ValidationError(f"cannot parse --ladder {text!r}: {exc}") from exc


def _point(text, dim):
    vals = _parse_floats(text, "--point")
    if len(vals) != dim:
        raise ValidationError(f"point {text!r} has {len(vals)} coordinates, expected {dim}")
    return np.asarray(vals, dtype=np.float64)


def _emit(doc, out_path, args, t0, extra_outputs=()):
    text = json.dumps(doc, sort_keys=True, indent=2)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        _write_sidecar(args, t0, out_path, extra_outputs)


def _write_sidecar(args, t0, out_path, extra_outputs=()):
    manifest = RunManifest(
        config_digest=config_digest(args.config),
        seed=getattr(args, "seed", None),
        tool_version=VERSION,
        command=["qcstretch"] + list(args.raw_argv),
        backend=BACKEND_NAME,
        wall_time_s=time.perf_counter() - t0,
        outputs=[str(out_path), *map(str, extra_outputs)],
    )
    write_manifest(manifest, out_path)


def cmd_eval(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if not args.point:
        raise ValidationError("at least one --point is required")
    pts = np.vstack([_point(p, cfg.dim) for p in args.point])
    vals = eval_map_many(cfg, pts)
    doc = {
        "backend": BACKEND_NAME,
        "points": pts.tolist(),
        "values": vals.tolist(),
    }
    _emit(doc, args.out, args, t0)
    return 0


def cmd_jac(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if not args.point:
        raise ValidationError("at least one --point is required")
    rows = []
    for text in args.point:
        x = _point(text, cfg.dim)
        try:
            rep = distortion_report(cfg, x)
            rows.append(
                {
                    "point": x.tolist(),
                    "matrix": jac_map(cfg, x).entries.tolist(),
                    "eigenvalues_b": rep.spectrum_b.eigenvalues.tolist(),
                    "op_norm": rep.op_norm,
                    "det": rep.det,
                    "ratio": rep.ratio,
                    "margin": rep.margin,
                    "det_lower_gap": rep.det_lower_gap,
                }
            )
        except OnLambdaError as exc:
            rows.append({"point": x.tolist(), "error": f"on center n={exc.index}"})
    _emit({"backend": BACKEND_NAME, "jacobians": rows}, args.out, args, t0)
    return 0


def cmd_distortion_grid(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if not args.grid or len(args.grid) != cfg.dim:
        raise ValidationError(f"--grid must be given once per coordinate ({cfg.dim} times)")
    axes = [_parse_grid_axis(g) for g in args.grid]
    if cfg.dim <= 3:
        grid = sweep_distortion(cfg, axes)
    else:
        if not args.samples:
            raise ValidationError("d > 3 requires --samples (full grids are d <= 3 only)")
        grid = sample_distortion(
            cfg,
            [ax.lo for ax in axes],
            [ax.hi for ax in axes],
            args.samples,
            args.seed,
        )
    if not args.out:
        raise ValidationError("--out is required for distortion-grid")
    write_distortion_csv(grid, args.out)
    _write_sidecar(args, t0, args.out)
    valid = ~grid.degenerate
    max_ratio = float(np.max(grid.ratio[valid])) if valid.any() else float("nan")
    print(
        f"wrote {grid.rows} rows to {args.out} "
        f"(degenerate: {int(grid.degenerate.sum())}, max ratio: {max_ratio:.12g})"
    )
    return 0


def cmd_exponent(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    targets = []
    for n in args.target_index or []:
        targets.append(int(n))
    for text in args.target_point or []:
        targets.append(_point(text, cfg.dim))
    if not (args.target_index or args.target_point):
        targets = list(range(1, cfg.count + 1))
    ladder = _parse_ladder(args.ladder) if args.ladder else default_ladder()
    rows = sweep_exponent(
        cfg,
        targets,
        ladder=ladder,
        direction_mode=args.direction,
        seed=args.seed,
        n_directions=args.directions,
    )
    for row in rows:
        if row.estimate is None:
            print(f"{row.label}: degenerate ({row.error})")
        else:
            est = row.estimate
            print(
                f"{row.label}: fitted={est.fitted_slope:.6f} "
                f"deepest_secant={est.deepest_secant:.6f} residual={est.residual:.3e}"
            )
    if args.out:
        write_exponent_csv(rows, args.out, cfg.dim)
        _write_sidecar(args, t0, args.out)
    return 0


def cmd_calibrate_c(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    cal = calibrate_stretch_constant(
        cfg.k, cfg.dim, n_directions=args.samples or 1024, seed=args.seed
    )
    doc = {
        "K": cal.k,
        "dim": cal.dim,
        "c_star": cal.c_star,
        "c": cal.c,
        "n_directions": cal.n_directions,
        "n_scales": cal.n_scales,
        "seed": cal.seed,
    }
    _emit(doc, args.out, args, t0)
    return 0


def cmd_predict_rstar(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if not args.target_index or len(args.target_index) != 1:
        raise ValidationError("predict-rstar requires exactly one --target-index")
    if args.epsilon is None:
        raise ValidationError("--epsilon is required")
    if args.c_constant is not None:
        c = args.c_constant
    else:
        c = calibrate_stretch_constant(cfg.k, cfg.dim, seed=args.seed).c
    plan = predict_r_star(cfg, int(args.target_index[0]), args.epsilon, c)
    doc = {
        "target_index": plan.target_index,
        "epsilon": plan.epsilon,
        "c": plan.c,
        "a": plan.a,
        "n_star": plan.n_star,
        "rho": None if plan.unconstrained else plan.rho,
        "r_star": None if plan.unconstrained else plan.r_star,
        "unconstrained": plan.unconstrained,
    }
    _emit(doc, args.out, args, t0)
    return 0


def cmd_verify(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    report = run_verification_suite(cfg, samples=args.samples or 10000, seed=args.seed)
    for line in report.human_lines():
        print(line)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json() + "\n")
        _write_sidecar(args, t0, args.out)
    return 0 if report.all_pass else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qcstretch",
        description="Evaluate and verify the weighted radial-stretch map.",
    )
    parser.add_argument("--version", action="version", version=f"qcstretch {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, out=True):
        p.add_argument("--config", required=True, help="JSON config path")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
        if out:
            p.add_argument("--out", help="output file path")

    p = sub.add_parser("eval", help="evaluate the map at points")
    common(p)
    p.add_argument("--point", action="append", help="comma-separated coordinates")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("jac", help="Jacobian and distortion data at points")
    common(p)
    p.add_argument("--point", action="append", help="comma-separated coordinates")
    p.set_defaults(func=cmd_jac)

    p = sub.add_parser("distortion-grid", help="distortion field sweep to CSV")
    common(p)
    p.add_argument("--grid", action="append", help="LO,HI,N per axis")
    p.add_argument("--samples", type=int, help="random sample count (required for d > 3)")
    p.set_defaults(func=cmd_distortion_grid)

    p = sub.add_parser("exponent", help="stretching-exponent estimates")
    common(p)
    p.add_argument("--target-index", action="append", type=int, help="1-based center index")
    p.add_argument("--target-point", action="append", help="comma-separated coordinates")
    p.add_argument("--ladder", help="R0,Q,COUNT")
    p.add_argument("--direction", choices=("fixed", "sweep"), default="fixed")
    p.add_argument("--directions", type=int, default=16, help="directions in sweep mode")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("calibrate-c", help="calibrate the stretch-bound constant")
    common(p)
    p.add_argument("--samples", type=int, help="number of sweep directions")
    p.set_defaults(func=cmd_calibrate_c)

    p = sub.add_parser("predict-rstar", help="cutoff and radius plan for a center")
    common(p)
    p.add_argument("--target-index", action="append", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--c-constant", type=float, help="use this C instead of calibrating")
    p.set_defaults(func=cmd_predict_rstar)

    p = sub.add_parser("verify", help="run the full verification suite")
    common(p)
    p.add_argument("--samples", type=int, help="sample count per check family")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(raw_argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.raw_argv = raw_argv
    try:
        return args.func(args)
    except (ParseError, ValidationError, IndexOutOfRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
