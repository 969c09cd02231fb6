"""Experiment harness: concentration and distortion studies plus verification.

Every experiment is a pure function of its config; per-trial seeds are
derived from the master seed and the trial index, so trials can run on a
thread pool and results are sorted by index before writing.  Re-running with
the same master seed yields byte-identical CSV and SVG outputs.
"""

from __future__ import annotations

import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._mix import mix2
from .generators import SparseSpec, gen_pair
from .oracle import WeightedPair, distortion, exact_rho_expectation, exact_sketch_expectation, weighted_sq_norm
from .projection import reduce_sparse, rho, sample_matrix
from .sketch import SketchConfig, StreamSketch, ingest_pair, new_pair, plan_sketch, sketch_estimate

# Seed-stream tags for deriving per-purpose seeds from the master seed.
_TAG_PAIR = 1
_TAG_MATRIX = 2
_TAG_VECTOR = 3
_TAG_SKETCH = 4

DESK_SCALE = {"d": 2_000, "k_list": (100, 1_000, 10_000), "trials": 100}
PAPER_SCALE = {"d": 200_000, "k_list": (100, 1_000, 10_000, 100_000), "trials": 250}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    trials: int = 250
    k_list: tuple[int, ...] = (100, 1_000, 10_000, 100_000)
    spec: SparseSpec = field(default_factory=lambda: SparseSpec(d=200_000, l_x=10, l_w=10, l_overlap=8))
    out_dir: Path = Path(".")
    master_seed: int = 0
    threads: int = 1
    epsilon: float = 0.3
    delta: float = 0.05

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")

    @classmethod
    def desk(cls, experiment: str, **overrides) -> "ExperimentConfig":
        """Laptop-friendly preset: d=2e3, k up to 1e4, 100 trials."""
        spec = SparseSpec(d=DESK_SCALE["d"], l_x=10, l_w=10, l_overlap=8)
        cfg = cls(
            experiment=experiment,
            trials=DESK_SCALE["trials"],
            k_list=DESK_SCALE["k_list"],
            spec=spec,
        )
        return replace(cfg, **overrides)


@dataclass
class TrialRecord:
    trial_index: int
    k: int
    estimate: float
    true_value: float
    distortion: float
    wall_time_ms: float
    arm: str = ""

    @property
    def ratio(self) -> Optional[float]:
        if self.true_value == 0.0:
            return None
        return self.estimate / self.true_value


# wall_time_ms stays on the in-memory record only: CSV output must be
# byte-identical across re-runs with the same master seed.
_CSV_COLUMNS = ("trial_index", "k", "arm", "estimate", "true_value", "ratio", "distortion")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def records_to_csv(records: list[TrialRecord], meta: dict) -> str:
    """Serialize records with a leading metadata comment line."""
    buf = io.StringIO()
    meta = dict(meta, library_version=__version__)
    buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
    buf.write(",".join(_CSV_COLUMNS) + "\n")
    for rec in sorted(records, key=lambda r: (r.arm, r.k, r.trial_index)):
        row = [rec.trial_index, rec.k, rec.arm, rec.estimate, rec.true_value, rec.ratio, rec.distortion]
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Parse a harness CSV back into (metadata, row dicts)."""
    lines = [ln for ln in text.splitlines() if ln]
    meta = {}
    if lines and lines[0].startswith("#"):
        meta = json.loads(lines[0][1:].strip())
        lines = lines[1:]
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        rows.append(dict(zip(header, ln.split(","))))
    return meta, rows


def _write(cfg: ExperimentConfig, name: str, text: str) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _map(cfg: ExperimentConfig, fn, args_list):
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, args_list))
    return [fn(a) for a in args_list]


def _sparse(pair: WeightedPair) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    ix = np.flatnonzero(pair.x)
    iw = np.flatnonzero(pair.w)
    return ix, pair.x[ix], iw, pair.w[iw]


def _rho_trial(d: int, k: int, seed: int, pair: WeightedPair) -> tuple[float, float]:
    """Estimate the pair's weighted squared norm with a fresh matrix; returns (estimate, ms)."""
    start = time.perf_counter()
    A = sample_matrix(d, k, seed)
    ix, vx, iw, vw = _sparse(pair)
    est = rho(reduce_sparse(A, ix, vx), reduce_sparse(A, iw, vw))
    return est, (time.perf_counter() - start) * 1e3


def _config_meta(cfg: ExperimentConfig, **extra) -> dict:
    meta = {
        "experiment": cfg.experiment,
        "trials": cfg.trials,
        "k_list": list(cfg.k_list),
        "spec": vars(cfg.spec) | {},
        "master_seed": cfg.master_seed,
    }
    meta.update(extra)
    return meta


def run_fig1(cfg: ExperimentConfig) -> tuple[list[TrialRecord], Path]:
    """Fixed pair, fresh matrix per trial, all k in the grid."""
    pair = gen_pair(replace(cfg.spec, seed=mix2(cfg.master_seed, _TAG_PAIR, 0)))
    truth = weighted_sq_norm(pair)
    dist = distortion(pair)

    def task(arg):
        ki, trial = arg
        k = cfg.k_list[ki]
        seed = mix2(cfg.master_seed, _TAG_MATRIX, ki * cfg.trials + trial)
        est, ms = _rho_trial(cfg.spec.d, k, seed, pair)
        return TrialRecord(trial, k, est, truth, dist, ms)

    args = [(ki, t) for ki in range(len(cfg.k_list)) for t in range(cfg.trials)]
    records = _map(cfg, task, args)
    path = _write(cfg, "fig1.csv", records_to_csv(records, _config_meta(cfg, true_value=truth)))
    return records, path


def run_fig2(cfg: ExperimentConfig) -> tuple[list[TrialRecord], Path]:
    """Fixed matrix seed and weight vector, fresh random x per trial."""
    w_pair = gen_pair(replace(cfg.spec, seed=mix2(cfg.master_seed, _TAG_PAIR, 0)))
    matrix_seed = mix2(cfg.master_seed, _TAG_MATRIX, 0)

    def task(arg):
        ki, trial = arg
        k = cfg.k_list[ki]
        pair_t = gen_pair(replace(cfg.spec, seed=mix2(cfg.master_seed, _TAG_VECTOR, trial)))
        pair = WeightedPair(pair_t.x, w_pair.w)  # overlap of this pair varies with the draw
        truth = weighted_sq_norm(pair)
        start = time.perf_counter()
        A = sample_matrix(cfg.spec.d, k, matrix_seed)
        ix, vx, iw, vw = _sparse(pair)
        est = rho(reduce_sparse(A, ix, vx), reduce_sparse(A, iw, vw))
        ms = (time.perf_counter() - start) * 1e3
        return TrialRecord(trial, k, est, truth, distortion(pair) if truth else float("nan"), ms)

    args = [(ki, t) for ki in range(len(cfg.k_list)) for t in range(cfg.trials)]
    records = _map(cfg, task, args)
    path = _write(cfg, "fig2.csv", records_to_csv(records, _config_meta(cfg, matrix_seed=matrix_seed)))
    return records, path


def _fixed_pair_arm(
    cfg: ExperimentConfig, arm: str, arm_tag: int, spec: SparseSpec, k: int
) -> list[TrialRecord]:
    pair = gen_pair(spec)
    truth = weighted_sq_norm(pair)
    dist = distortion(pair)

    def task(trial):
        seed = mix2(cfg.master_seed, _TAG_MATRIX, arm_tag * 1_000_000 + trial)
        est, ms = _rho_trial(spec.d, k, seed, pair)
        return TrialRecord(trial, k, est, truth, dist, ms, arm=arm)

    return _map(cfg, task, list(range(cfg.trials)))


def run_fig3(cfg: ExperimentConfig) -> tuple[list[TrialRecord], Path]:
    """Two arms differing only in support overlap (2 vs 10)."""
    k = max(cfg.k_list)
    records = []
    for overlap in (2, 10):
        spec = replace(cfg.spec, l_overlap=overlap, seed=mix2(cfg.master_seed, _TAG_PAIR, overlap))
        records.extend(_fixed_pair_arm(cfg, f"overlap{overlap}", overlap, spec, k))
    path = _write(cfg, "fig3.csv", records_to_csv(records, _config_meta(cfg, k=k)))
    return records, path


def run_fig4(cfg: ExperimentConfig) -> tuple[list[TrialRecord], Path]:
    """Arms of increasing density l, overlap fixed at 0.8 l."""
    k = max(cfg.k_list)
    records = []
    for l in (10, 30, 100):
        spec = replace(
            cfg.spec,
            l_x=l,
            l_w=l,
            l_overlap=int(0.8 * l),
            seed=mix2(cfg.master_seed, _TAG_PAIR, l),
        )
        records.extend(_fixed_pair_arm(cfg, f"l{l}", l, spec, k))
    path = _write(cfg, "fig4.csv", records_to_csv(records, _config_meta(cfg, k=k)))
    return records, path


def sketch_success_rate(
    pair: WeightedPair,
    epsilon: float,
    r: int,
    m: int,
    n_seeds: int,
    master_seed: int,
) -> float:
    """Fraction of independent sketches whose estimate lands within epsilon."""
    truth = weighted_sq_norm(pair)
    union = np.union1d(np.flatnonzero(pair.x), np.flatnonzero(pair.w))
    xs, ws = pair.x[union], pair.w[union]
    hits = 0
    for s in range(n_seeds):
        cfg = SketchConfig(r=r, m=m, seed=mix2(master_seed, _TAG_SKETCH, s), mode="turnstile")
        sx, sw = new_pair(cfg)
        ingest_pair(sx, sw, union, xs, ws)
        est = sketch_estimate(sx, sw).value
        if abs(est - truth) <= epsilon * truth:
            hits += 1
    return hits / n_seeds


def run_sketch_eval(cfg: ExperimentConfig, n_seeds: int = 500) -> tuple[list[dict], Path]:
    """Empirical (epsilon, delta) check of the planned sketch dimensions.

    Includes a deliberately undersized m/4 arm as a sanity direction.
    """
    spec = replace(cfg.spec, l_x=2, l_w=2, l_overlap=2, seed=mix2(cfg.master_seed, _TAG_PAIR, 0))
    pair = gen_pair(spec)
    dist = distortion(pair)
    r, m = plan_sketch(cfg.epsilon, cfg.delta, dist)
    rows = []
    for arm, m_used in (("planned", m), ("undersized", max(1, m // 4))):
        rate = sketch_success_rate(pair, cfg.epsilon, r, m_used, n_seeds, cfg.master_seed)
        rows.append(
            {
                "arm": arm,
                "epsilon": cfg.epsilon,
                "delta": cfg.delta,
                "distortion": dist,
                "r": r,
                "m": m_used,
                "n_seeds": n_seeds,
                "success_rate": rate,
                "sketch_bytes": StreamSketch.serialized_size(r, m_used),
            }
        )
    buf = io.StringIO()
    meta = _config_meta(cfg, true_value=weighted_sq_norm(pair))
    meta["library_version"] = __version__
    buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
    cols = list(rows[0])
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    path = _write(cfg, "sketch_eval.csv", buf.getvalue())
    return rows, path


def run_verify(seed: int = 0, rel_tol: float = 1e-9) -> list[tuple[str, bool]]:
    """Oracle-vs-implementation equivalence suite; returns (check, passed) pairs."""
    rng = np.random.default_rng(seed)
    results = []

    ok = True
    for d in range(1, 7):
        for _ in range(20):
            x = rng.standard_normal(d)
            w = np.abs(rng.standard_normal(d))
            truth = weighted_sq_norm(WeightedPair(x, w))
            if abs(exact_rho_expectation(x, w) - truth) > rel_tol * max(truth, 1e-30):
                ok = False
            if abs(exact_sketch_expectation(x, w) - truth) > rel_tol * max(truth, 1e-30):
                ok = False
    results.append(("enumeration oracles match weighted squared norm", ok))

    ok = True
    for _ in range(100):
        x1 = float(rng.standard_normal())
        w1 = float(abs(rng.standard_normal()) + 0.1)
        k = int(rng.integers(1, 64))
        A = sample_matrix(1, k, int(rng.integers(0, 2**63)))
        est = rho(reduce_sparse(A, [0], [x1]), reduce_sparse(A, [0], [w1]))
        if abs(est - (x1 * w1) ** 2) > 1e-12 * (x1 * w1) ** 2:
            ok = False
    results.append(("d=1 estimates are exact", ok))

    ok = True
    for _ in range(50):
        x = rng.standard_normal(8)
        w = np.abs(rng.standard_normal(8))
        pair = WeightedPair(x, w)
        if distortion(pair) < 1.0 - 1e-12:
            ok = False
    results.append(("distortion at least 1", ok))
    return results


def render_histogram(csv_in: Path, column: str, bins: int, svg_out: Path) -> Path:
    """Deterministic SVG histogram over a numeric CSV column.

    Fixed 640x480 viewport, equal-width bins over [min, max], heights
    normalized to the fullest bin; a vertical reference line marks the true
    value when present in the CSV metadata.
    """
    meta, rows = read_csv(Path(csv_in).read_text())
    if not rows:
        raise ValueError("no data rows in CSV")
    if column not in rows[0]:
        raise ValueError(f"column {column!r} not found")
    try:
        values = np.array([float(r[column]) for r in rows if r[column] != ""])
    except ValueError as exc:
        raise ValueError(f"column {column!r} is not numeric") from exc
    if values.size == 0:
        raise ValueError("no numeric values in column")
    if bins < 1:
        raise ValueError("bins must be positive")

    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        counts = np.array([values.size])
        edges = np.array([lo, hi])
        bins = 1
    else:
        counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    heights = counts / counts.max()

    width, height = 640, 480
    ml, mr, mt, mb = 50, 20, 20, 40
    plot_w, plot_h = width - ml - mr, height - mt - mb

    def sx(v):  # data x -> pixels
        if hi == lo:
            return ml + plot_w / 2
        return ml + (v - lo) / (hi - lo) * plot_w

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    bar_w = plot_w / bins if hi != lo else plot_w / 4
    for idx, h in enumerate(heights):
        if hi == lo:
            x0 = ml + plot_w / 2 - bar_w / 2
        else:
            x0 = sx(edges[idx])
        bh = h * plot_h
        parts.append(
            f'<rect x="{x0!r}" y="{mt + plot_h - bh!r}" width="{bar_w!r}" '
            f'height="{bh!r}" fill="#4878a8" stroke="black" stroke-width="0.5"/>'
        )
    truth = meta.get("true_value")
    if truth is not None and lo <= float(truth) <= hi:
        tx = sx(float(truth))
        parts.append(
            f'<line x1="{tx!r}" y1="{mt}" x2="{tx!r}" y2="{mt + plot_h}" '
            f'stroke="red" stroke-width="1.5" stroke-dasharray="4,3"/>'
        )
    parts.append(
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" y2="{mt + plot_h}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(f'<text x="{ml}" y="{height - 10}" font-size="12">{_fmt(lo)}</text>')
    parts.append(
        f'<text x="{ml + plot_w - 80}" y="{height - 10}" font-size="12">{_fmt(hi)}</text>'
    )
    parts.append("</svg>")
    svg_out = Path(svg_out)
    svg_out.parent.mkdir(parents=True, exist_ok=True)
    svg_out.write_text("\n".join(parts) + "\n")
    return svg_out
