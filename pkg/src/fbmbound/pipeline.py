"""End-to-end analysis: training logs in, bound and indicators out.

A run directory holds four artifacts written by :func:`save_run`:

    sgn.trjl           K x c gradient-noise log
    loss_vectors.trjl  rows of per-example training losses
    weights.txt        weight archive
    summary.txt        key=value training summary
"""

from __future__ import annotations

import csv
import io as _io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .bounds import BoundInputs, BoundReport, clamp_hurst, full_bound
from .enclosing_ball import diameter_lower_bound, miniball_core_set
from .errors import DomainError, EstimationError, FbmBoundError, FormatError, TrainingDivergence
from .hurst import HurstEstimate, SeriesMatrix, estimate_hurst_from_vectors
from .indicators import IndicatorReport, mean_power_law_index, norm_measures, sgn_bg_index
from .trainer import MlpSpec, TrainConfig, TrainLog, generalization_gap, make_dataset, train

__all__ = [
    "SGN_FILE",
    "LOSS_FILE",
    "WEIGHTS_FILE",
    "SUMMARY_FILE",
    "MissingArtifact",
    "AnalysisReport",
    "RunSetup",
    "save_run",
    "analyze",
    "analyze_arrays",
    "run_cell",
    "sweep",
    "pearson",
    "AXES",
]

SGN_FILE = "sgn.trjl"
LOSS_FILE = "loss_vectors.trjl"
WEIGHTS_FILE = "weights.txt"
SUMMARY_FILE = "summary.txt"

AXES = ("train_size", "lr", "batch", "momentum", "wd", "width", "depth")


class MissingArtifact(FormatError):
    pass


@dataclass
class AnalysisReport:
    hurst: Optional[HurstEstimate]
    h_used: Optional[float]
    clamped: bool
    diameter: Optional[float]
    diameter_lower_bound: Optional[float]
    bound: Optional[BoundReport]
    indicators: IndicatorReport
    gap: Optional[float]
    run_metadata: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_items(self) -> dict:
        h = self.hurst
        b = self.bound
        ind = self.indicators
        items = {
            "hurst.h_hat": h.h_hat if h else None,
            "hurst.stderr": h.stderr if h else None,
            "hurst.n_windows": h.n_windows if h else None,
            "hurst.h_used": self.h_used,
            "hurst.clamped": self.clamped,
            "diameter": self.diameter,
            "diameter_lower_bound": self.diameter_lower_bound,
            "bound.rademacher_complexity": b.rademacher_complexity if b else None,
            "bound.rademacher_term": b.rademacher_term if b else None,
            "bound.concentration_term": b.concentration_term if b else None,
            "bound.total": b.total if b else None,
            "indicators.bg_index": ind.bg_index,
            "indicators.power_law_index": ind.power_law_index,
            "indicators.spectral_product": ind.spectral_product,
            "indicators.frobenius_product": ind.frobenius_product,
            "indicators.spectral_sum_log": ind.spectral_sum_log,
            "indicators.frobenius_sum_log": ind.frobenius_sum_log,
            "indicators.overflow": ind.overflow,
            "gap": self.gap,
        }
        for k in sorted(self.run_metadata):
            items[f"meta.{k}"] = self.run_metadata[k]
        items["failures"] = ";".join(self.failures) if self.failures else "none"
        return items

    def to_text(self) -> str:
        return "".join(f"{k}={io.format_value(v)}\n" for k, v in self.as_items().items())


def save_run(log: TrainLog, run_dir, meta: Optional[dict] = None) -> Path:
    """Write the four run artifacts of a training log."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    io.write_log(log.sgn, run_dir / SGN_FILE)
    io.write_log(log.loss_vectors, run_dir / LOSS_FILE)
    io.write_weights(log.weights, run_dir / WEIGHTS_FILE)
    summary = {
        "m_train": log.loss_vectors.shape[1],
        "iters": log.iters,
        "converged": log.converged,
        "train_acc": log.train_acc,
        "test_acc": log.test_acc,
        "gap": generalization_gap(log),
        "empirical_risk": log.empirical_risk,
        "zeta_observed": log.zeta_observed,
    }
    for k, v in (meta or {}).items():
        summary[f"config.{k}"] = v
    io.write_kv(summary, run_dir / SUMMARY_FILE)
    return run_dir


def analyze_arrays(
    sgn: np.ndarray,
    loss_vectors: np.ndarray,
    weights: Sequence[np.ndarray],
    summary: dict,
    zeta: Optional[float] = None,
    beta: float = 0.0,
    tau: float = 0.05,
    strategy: str = "per_coordinate_mean",
    subsample_count: Optional[int] = None,
    seed: int = 0,
    min_window: Optional[int] = None,
    eps: float = 1e-3,
    k1: Optional[int] = None,
    tail_fraction: float = 0.1,
) -> AnalysisReport:
    """Compose the estimators into one report.

    A failing sub-estimator leaves its fields absent and is listed in
    ``failures``; it does not abort the analysis.
    """
    failures = []
    m = int(summary["m_train"])

    hurst = None
    try:
        hurst = estimate_hurst_from_vectors(
            SeriesMatrix(sgn, kind="sgn"), strategy, subsample_count, seed, min_window
        )
    except (EstimationError, DomainError) as exc:
        failures.append(f"hurst: {exc}")

    ball = miniball_core_set(loss_vectors, eps)
    diameter = ball.diameter
    lower = diameter_lower_bound(loss_vectors) if loss_vectors.shape[0] >= 2 else 0.0

    h_used, clamped, bound = None, False, None
    if hurst is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            h_used, clamped = clamp_hurst(hurst.h_hat)
        inputs = BoundInputs(
            diam=diameter,
            m=m,
            h=h_used,
            zeta=float(summary["zeta_observed"]) if zeta is None else zeta,
            beta=beta,
            tau=tau,
            empirical_risk=float(summary["empirical_risk"]),
        )
        bound = full_bound(inputs, clamped=clamped)

    indicators = norm_measures(weights)
    try:
        indicators.bg_index = sgn_bg_index(sgn, k1)
    except (EstimationError, DomainError) as exc:
        failures.append(f"bg_index: {exc}")
    indicators.power_law_index = mean_power_law_index(weights, tail_fraction)

    meta = {k: v for k, v in summary.items() if k not in ("gap",)}
    meta.update(
        {
            "analyze.strategy": strategy,
            "analyze.subsample_count": subsample_count,
            "analyze.seed": seed,
            "analyze.min_window": min_window,
            "analyze.eps": eps,
            "analyze.beta": beta,
            "analyze.tau": tau,
            "analyze.zeta": zeta,
        }
    )
    return AnalysisReport(
        hurst=hurst,
        h_used=h_used,
        clamped=clamped,
        diameter=diameter,
        diameter_lower_bound=lower,
        bound=bound,
        indicators=indicators,
        gap=float(summary["gap"]) if "gap" in summary else None,
        run_metadata=meta,
        failures=failures,
    )


def analyze(run_dir, **kwargs) -> AnalysisReport:
    """Load a run directory and analyze it (see :func:`analyze_arrays`)."""
    run_dir = Path(run_dir)
    for name in (SGN_FILE, LOSS_FILE, WEIGHTS_FILE, SUMMARY_FILE):
        if not (run_dir / name).is_file():
            raise MissingArtifact(f"run directory {run_dir} has no {name}", field=name)
    summary = io.read_kv(run_dir / SUMMARY_FILE)
    for key in ("m_train", "gap", "empirical_risk", "zeta_observed"):
        if key not in summary:
            raise FormatError(f"{SUMMARY_FILE} lacks {key}", field=key)
    return analyze_arrays(
        io.read_log(run_dir / SGN_FILE),
        io.read_log(run_dir / LOSS_FILE),
        io.read_weights(run_dir / WEIGHTS_FILE),
        summary,
        **kwargs,
    )


@dataclass(frozen=True)
class RunSetup:
    """Everything needed to train one toy model."""

    dataset: str = "gaussian_blobs"
    m_train: int = 200
    m_test: int = 1000
    classes: int = 2
    dim: int = 10
    separation: float = 6.0
    width: int = 32
    depth: int = 1
    lr: float = 0.01
    batch: int = 64
    momentum: float = 0.0
    wd: float = 0.0
    stop_loss: float = 0.01
    max_iters: int = 20_000
    stride: int = 10
    sgn_coords: int = 256
    seed: int = 0

    def with_axis(self, axis: str, value) -> "RunSetup":
        field_name = {"train_size": "m_train", "batch": "batch"}.get(axis, axis)
        if axis not in AXES:
            raise DomainError(f"unknown sweep axis {axis!r}")
        if field_name in ("m_train", "batch", "width", "depth"):
            value = int(value)
        else:
            value = float(value)
        return replace(self, **{field_name: value})

    def dataset_obj(self):
        return make_dataset(self.dataset, self.m_train, self.m_test, seed=self.seed,
                            classes=self.classes, dim=self.dim, separation=self.separation)

    def spec(self) -> MlpSpec:
        n_classes = 2 if self.dataset == "two_rings" else self.classes
        n_in = 2 if self.dataset == "two_rings" else self.dim
        sizes = (n_in,) + (self.width,) * self.depth + (n_classes,)
        return MlpSpec(sizes, init_seed=self.seed)

    def config(self) -> TrainConfig:
        return TrainConfig(lr=self.lr, batch_size=self.batch, momentum=self.momentum,
                           weight_decay=self.wd, stop_loss=self.stop_loss,
                           max_iters=self.max_iters, data_seed=self.seed,
                           shuffle_seed=self.seed, loss_log_stride=self.stride,
                           sgn_coord_count=self.sgn_coords)

    def meta(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def run_cell(setup: RunSetup, run_dir=None, **analyze_kwargs) -> tuple[Optional[TrainLog], AnalysisReport]:
    """Train one model and analyze it, optionally persisting the run."""
    log = train(setup.spec(), setup.config(), setup.dataset_obj())
    if run_dir is not None:
        save_run(log, run_dir, setup.meta())
        return log, analyze(run_dir, **analyze_kwargs)
    summary = {
        "m_train": log.loss_vectors.shape[1],
        "gap": generalization_gap(log),
        "empirical_risk": log.empirical_risk,
        "zeta_observed": log.zeta_observed,
        "iters": log.iters,
        "converged": log.converged,
    }
    return log, analyze_arrays(log.sgn, log.loss_vectors, log.weights, summary, **analyze_kwargs)


CSV_FIELDS = [
    "axis", "value", "seed", "status", "gap", "bound", "rademacher_term",
    "rademacher_complexity", "concentration_term", "h_hat", "h_used", "diameter",
    "empirical_risk", "zeta", "iters", "converged", "bg_index", "power_law_index",
    "spectral_product", "frobenius_product", "spectral_sum_log",
]
MEASURES = ["gap", "bound", "rademacher_complexity", "h_hat", "diameter", "bg_index",
            "power_law_index", "spectral_sum_log"]


def _cell_row(args) -> dict:
    setup, axis, value, analyze_kwargs, runs_dir = args
    row = {"axis": axis, "value": value, "seed": setup.seed}
    run_dir = None
    if runs_dir is not None:
        run_dir = Path(runs_dir) / f"{axis}={value}_seed={setup.seed}"
    try:
        log, rep = run_cell(setup, run_dir, **analyze_kwargs)
    except TrainingDivergence as exc:
        row["status"] = f"diverged@{exc.iteration}"
        return row
    except FbmBoundError as exc:
        row["status"] = f"failed:{type(exc).__name__}"
        return row
    b = rep.bound
    ind = rep.indicators
    row.update(
        status="ok" if rep.ok else "partial",
        gap=rep.gap,
        bound=b.total if b else None,
        rademacher_term=b.rademacher_term if b else None,
        rademacher_complexity=b.rademacher_complexity if b else None,
        concentration_term=b.concentration_term if b else None,
        h_hat=rep.hurst.h_hat if rep.hurst else None,
        h_used=rep.h_used,
        diameter=rep.diameter,
        empirical_risk=log.empirical_risk,
        zeta=log.zeta_observed,
        iters=log.iters,
        converged=log.converged,
        bg_index=ind.bg_index,
        power_law_index=ind.power_law_index,
        spectral_product=ind.spectral_product,
        frobenius_product=ind.frobenius_product,
        spectral_sum_log=ind.spectral_sum_log,
    )
    return row


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Pearson correlation over pairs where both values are present.

    Returns None (undefined) for fewer than two pairs or zero variance.
    """
    pairs = [(float(a), float(b)) for a, b in zip(x, y)
             if a is not None and b is not None and math.isfinite(float(a)) and math.isfinite(float(b))]
    if len(pairs) < 2:
        return None
    xa = np.array([p[0] for p in pairs])
    ya = np.array([p[1] for p in pairs])
    xs, ys = xa - xa.mean(), ya - ya.mean()
    den = math.sqrt(float(xs @ xs) * float(ys @ ys))
    if den == 0.0:
        return None
    return float(xs @ ys) / den


def sweep(
    base: RunSetup,
    axis: str,
    values: Sequence,
    seeds: Sequence[int],
    out_csv=None,
    jobs: int = 1,
    runs_dir=None,
    **analyze_kwargs,
) -> tuple[list, dict]:
    """Train and analyze every (value, seed) cell; write one CSV row per cell.

    Returns ``(rows, correlations)`` where correlations maps each measure to
    its Pearson correlation with the axis value (None when undefined).
    """
    if axis not in AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    tasks = [
        (replace(base.with_axis(axis, v), seed=int(s)), axis, v, analyze_kwargs, runs_dir)
        for v in values
        for s in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell_row, tasks))
    else:
        rows = [_cell_row(t) for t in tasks]
    corr = {
        meas: pearson([r["value"] for r in rows], [r.get(meas) for r in rows])
        for meas in MEASURES
    }
    if out_csv is not None:
        Path(out_csv).write_text(format_sweep_csv(rows, corr))
    return rows, corr


def format_sweep_csv(rows: list, corr: dict) -> str:
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: io.format_value(r.get(k)) for k in CSV_FIELDS})
    for meas, val in corr.items():
        buf.write(f"# pearson {meas}={'undefined' if val is None else repr(val)}\n")
    return buf.getvalue()
