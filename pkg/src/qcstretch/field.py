"""Config ingestion, field sweeps, and deterministic export.

Config files are single JSON documents {dim, K, lambdas}; the order of
``lambdas`` is semantic (it carries the 2^-n weights). CSV exports use 17
significant digits so doubles round-trip losslessly.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ExponentEstimate,
    ScaleLadder,
    default_ladder,
    distortion_fields_many,
    estimate_exponent,
)
from .composite import LambdaSet, MapConfig
from .errors import AllRungsDegenerateError, IndexOutOfRangeError, ParseError, ValidationError

CSV_FLOAT_FMT = "%.17g"


def _fmt(v: float) -> str:
    return CSV_FLOAT_FMT % v


def config_digest(path) -> str:
    """sha256 over the raw config bytes; stable for identical files."""
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def load_config(path) -> MapConfig:
    """Load and validate a map config; every violated invariant is named."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed config document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("config root must be a JSON object")
    unknown = set(doc) - {"dim", "K", "lambdas"}
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    for key in ("dim", "K", "lambdas"):
        if key not in doc:
            raise ValidationError(f"config key {key!r} is required")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ValidationError("dim must be an integer")
    k = doc["K"]
    if not isinstance(k, (int, float)) or isinstance(k, bool):
        raise ValidationError("K must be a number")
    lambdas = doc["lambdas"]
    if not isinstance(lambdas, list) or not lambdas:
        raise ValidationError("lambdas must be a non-empty array of points")
    for i, row in enumerate(lambdas):
        if not isinstance(row, list) or len(row) != dim:
            raise ValidationError(
                f"lambdas[{i}] must be an array of {dim} numbers (dimension mismatch)"
            )
        for v in row:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ValidationError(f"lambdas[{i}] contains a non-numeric entry")
    centers = np.asarray(lambdas, dtype=np.float64)
    return MapConfig(LambdaSet(centers), float(k))


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise ValidationError("grid axis must satisfy lo < hi with finite bounds")
        if self.n < 2:
            raise ValidationError("grid resolution must be at least 2 per axis")


@dataclass(frozen=True)
class FieldGrid:
    """Per-sample distortion records over a box, row-major and deterministic."""

    box_lo: np.ndarray
    box_hi: np.ndarray
    resolution: tuple | None
    points: np.ndarray
    w_total: np.ndarray
    op_norm: np.ndarray
    det: np.ndarray
    ratio: np.ndarray
    margin: np.ndarray
    min_dist: np.ndarray
    degenerate: np.ndarray
    mode: str = "grid"
    seed: int | None = None

    @property
    def rows(self) -> int:
        return self.points.shape[0]


def _fields_to_grid(cfg, pts, box_lo, box_hi, resolution, mode, seed=None) -> FieldGrid:
    f = distortion_fields_many(cfg, pts)
    return FieldGrid(
        box_lo=np.asarray(box_lo, dtype=np.float64),
        box_hi=np.asarray(box_hi, dtype=np.float64),
        resolution=resolution,
        points=f.points,
        w_total=f.w_total,
        op_norm=f.op_norm,
        det=f.det,
        ratio=f.ratio,
        margin=f.margin,
        min_dist=f.min_dist,
        degenerate=f.on_lambda,
        mode=mode,
        seed=seed,
    )


def sweep_distortion(cfg: MapConfig, axes) -> FieldGrid:
    """Full Cartesian sweep (d <= 3); row count is always prod(resolutions).

    Samples on a center are flagged degenerate, not dropped.
    """
    axes = list(axes)
    if len(axes) != cfg.dim:
        raise ValidationError(f"need one grid axis per coordinate ({cfg.dim})")
    if cfg.dim > 3:
        raise ValidationError("full Cartesian grids are restricted to d <= 3; use random sampling")
    grids = [np.linspace(ax.lo, ax.hi, ax.n) for ax in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, cfg.dim)
    return _fields_to_grid(
        cfg,
        pts,
        [ax.lo for ax in axes],
        [ax.hi for ax in axes],
        tuple(ax.n for ax in axes),
        "grid",
    )


def sample_distortion(cfg: MapConfig, box_lo, box_hi, n_samples: int, seed: int) -> FieldGrid:
    """Seeded uniform sampling of the box; the d > 3 counterpart of the grid sweep."""
    lo = np.asarray(box_lo, dtype=np.float64)
    hi = np.asarray(box_hi, dtype=np.float64)
    if lo.shape != (cfg.dim,) or hi.shape != (cfg.dim,) or not (lo < hi).all():
        raise ValidationError("box bounds must be per-coordinate with lo < hi")
    if n_samples < 1:
        raise ValidationError("sample count must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(n_samples, cfg.dim))
    return _fields_to_grid(cfg, pts, lo, hi, None, "random", seed)


def write_distortion_csv(grid: FieldGrid, path) -> None:
    d = grid.points.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + [
        "W",
        "op_norm",
        "det",
        "ratio",
        "margin",
        "min_dist",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(grid.rows):
            cols = [_fmt(v) for v in grid.points[i]]
            if grid.degenerate[i]:
                cols += ["", "", "", "", ""]
            else:
                cols += [
                    _fmt(grid.w_total[i]),
                    _fmt(grid.op_norm[i]),
                    _fmt(grid.det[i]),
                    _fmt(grid.ratio[i]),
                    _fmt(grid.margin[i]),
                ]
            cols.append(_fmt(grid.min_dist[i]))
            fh.write(",".join(cols) + "\n")


@dataclass(frozen=True)
class ExponentRow:
    """One sweep target: either a center index or a raw point."""

    label: str
    index: int | None
    base: np.ndarray
    estimate: ExponentEstimate | None
    error: str | None = None


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.sqrt((v**2).sum())


def sweep_exponent(
    cfg: MapConfig,
    targets,
    ladder: ScaleLadder | None = None,
    direction_mode: str = "fixed",
    seed: int = 0,
    n_directions: int = 16,
):
    """Exponent estimates per target (center index or point).

    fixed mode probes along e1; sweep mode samples seeded random unit
    directions and keeps the smallest fitted slope (the strongest
    stretching seen). Per-target degeneracies are reported in-row.
    """
    if direction_mode not in ("fixed", "sweep"):
        raise ValidationError("direction mode must be 'fixed' or 'sweep'")
    ladder = ladder or default_ladder()
    rng = np.random.default_rng(seed)
    e1 = np.zeros(cfg.dim)
    e1[0] = 1.0
    rows = []
    for t in targets:
        if isinstance(t, (int, np.integer)):
            n = int(t)
            if not 1 <= n <= cfg.count:
                raise IndexOutOfRangeError(f"target index {n} outside 1..{cfg.count}")
            base = cfg.lambda_set.centers[n - 1]
            label, index = f"center-{n}", n
        else:
            base = np.asarray(t, dtype=np.float64)
            label, index = "point", None
        if direction_mode == "fixed":
            dirs = [e1]
        else:
            dirs = [_unit(rng.normal(size=cfg.dim)) for _ in range(n_directions)]
        best = None
        error = None
        for u in dirs:
            try:
                est = estimate_exponent(cfg, base, u, ladder)
            except AllRungsDegenerateError as exc:
                error = str(exc)
                continue
            if best is None or est.fitted_slope < best.fitted_slope:
                best = est
        if best is not None:
            error = None
        rows.append(ExponentRow(label=label, index=index, base=base, estimate=best, error=error))
    return rows


def write_exponent_csv(rows, path, dim: int) -> None:
    header = (
        ["target", "index"]
        + [f"x{i + 1}" for i in range(dim)]
        + [f"u{i + 1}" for i in range(dim)]
        + ["fitted_slope", "residual", "deepest_secant", "used_rungs", "excluded_rungs", "error"]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cols = [row.label, "" if row.index is None else str(row.index)]
            cols += [_fmt(v) for v in row.base]
            est = row.estimate
            if est is None:
                cols += [""] * dim + ["", "", "", "", "", row.error or ""]
            else:
                cols += [_fmt(v) for v in est.direction]
                cols += [
                    _fmt(est.fitted_slope),
                    _fmt(est.residual),
                    _fmt(est.deepest_secant),
                    str(int(est.used.sum())),
                    str(int((~est.used).sum())),
                    "",
                ]
            fh.write(",".join(cols) + "\n")


@dataclass(frozen=True)
class RunManifest:
    """Provenance sidecar written next to every export."""

    config_digest: str
    seed: int | None
    tool_version: str
    command: list
    backend: str
    wall_time_s: float
    outputs: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "backend": self.backend,
                "command": list(self.command),
                "config_digest": self.config_digest,
                "outputs": list(self.outputs),
                "seed": self.seed,
                "tool_version": self.tool_version,
                "wall_time_s": self.wall_time_s,
            },
            sort_keys=True,
            indent=2,
        )


def write_manifest(manifest: RunManifest, out_path) -> str:
    path = f"{out_path}.manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest.to_json() + "\n")
    return path
