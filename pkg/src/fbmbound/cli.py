"""Command-line entry point.

Exit codes: 0 success, 1 invalid arguments, 2 format error, 3 estimation
error, 4 training divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .bounds import BoundInputs, clamp_hurst, full_bound
from .enclosing_ball import diameter_lower_bound, miniball_core_set
from .errors import (
    DomainError,
    EstimationError,
    FbmBoundError,
    FormatError,
    IntegrationError,
    NumericalError,
    TrainingDivergence,
)
from .fbm import METHODS, sample_fbm_multi
from .fractal_dim import estimate_boxdim
from .hurst import SeriesMatrix, estimate_hurst_from_vectors, estimate_hurst_rs
from .indicators import IndicatorReport, mean_power_law_index, norm_measures, sgn_bg_index
from .pipeline import AXES, RunSetup, analyze, format_sweep_csv, save_run, sweep
from .sde import Drift, SdeConfig, integrate
from .trainer import MlpSpec, TrainConfig, make_dataset, train

log = logging.getLogger("fbmbound")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_ESTIMATION = 3
EXIT_DIVERGENCE = 4


def _emit(items: dict) -> None:
    for k, v in items.items():
        print(f"{k}={io.format_value(v)}")


def cmd_fbm(args) -> int:
    path = sample_fbm_multi(args.n, args.d, args.hurst, args.dt, args.method, args.seed)
    io.write_log(path.values, args.out)
    _emit({"rows": path.values.shape[0], "cols": path.d, "out": args.out})
    return EXIT_OK


def cmd_hurst(args) -> int:
    data = io.read_log(args.inp)
    if data.shape[1] == 1:
        est = estimate_hurst_rs(data[:, 0], args.min_window)
    else:
        est = estimate_hurst_from_vectors(
            SeriesMatrix(data, "sgn"), args.strategy, args.subsample_count, args.seed, args.min_window
        )
    _emit({"h_hat": est.h_hat, "stderr": est.stderr, "n_windows": est.n_windows})
    if args.dump_fit:
        with open(args.dump_fit, "w") as fh:
            fh.write("log_window,log_rs\n")
            for w, rs in zip(est.windows, est.rs_values):
                fh.write(f"{float(np.log(w))!r},{float(np.log(rs))!r}\n")
    return EXIT_OK


def cmd_boxdim(args) -> int:
    data = io.read_log(args.inp)
    est = estimate_boxdim(data, args.delta_min, args.delta_max, args.scales, args.project_dim, args.seed)
    _emit({"dim_hat": est.dim_hat, "r_squared": est.r_squared, "n_scales": len(est.deltas),
           "projection_seed": est.projection_seed})
    if args.dump_scales:
        with open(args.dump_scales, "w") as fh:
            fh.write("log_inv_delta,log_count\n")
            for d, n in zip(est.deltas, est.counts):
                fh.write(f"{float(np.log(1 / d))!r},{float(np.log(n))!r}\n")
    return EXIT_OK


def cmd_diam(args) -> int:
    data = io.read_log(args.inp)
    ball = miniball_core_set(data, args.eps)
    lower = diameter_lower_bound(data) if data.shape[0] >= 2 else 0.0
    _emit({"center_norm": float(np.linalg.norm(ball.center)), "radius": ball.radius,
           "diameter": ball.diameter, "lower_bound": lower})
    return EXIT_OK


def cmd_bound(args) -> int:
    h, clamped = clamp_hurst(args.hurst)
    rep = full_bound(BoundInputs(args.diam, args.m, h, args.zeta, args.beta, args.tau, args.risk), clamped)
    _emit({"rademacher_complexity": rep.rademacher_complexity, "rademacher_term": rep.rademacher_term,
           "concentration_term": rep.concentration_term, "total": rep.total, "clamped": rep.clamped})
    return EXIT_OK


def cmd_indicators(args) -> int:
    if args.sgn_in is None and args.weights_in is None:
        raise DomainError("give --sgn-in and/or --weights-in")
    rep = IndicatorReport()
    if args.weights_in:
        layers = io.read_weights(args.weights_in)
        rep = norm_measures(layers)
        rep.power_law_index = mean_power_law_index(layers, args.tail_fraction)
    if args.sgn_in:
        rep.bg_index = sgn_bg_index(io.read_log(args.sgn_in), args.k1)
    _emit(vars(rep))
    return EXIT_OK


def cmd_sde(args) -> int:
    w0 = np.zeros(args.dim) if args.w0 is None else np.full(args.dim, args.w0)
    cfg = SdeConfig(Drift(args.drift, args.rate, args.a, args.b), args.sigma, args.hurst,
                    args.dt, args.steps, w0, args.seed, args.method)
    path = integrate(cfg)
    io.write_log(path.values, args.out)
    _emit({"rows": path.values.shape[0], "cols": path.d, "out": args.out})
    return EXIT_OK


def cmd_train(args) -> int:
    layers = tuple(int(v) for v in args.layers.split(","))
    data = make_dataset(args.dataset, args.m_train, args.m_test, seed=args.seed,
                        classes=layers[-1], dim=layers[0], separation=args.separation)
    cfg = TrainConfig(lr=args.lr, batch_size=args.batch, momentum=args.momentum,
                      weight_decay=args.wd, stop_loss=args.stop_loss, max_iters=args.max_iters,
                      data_seed=args.seed, shuffle_seed=args.seed, loss_log_stride=args.stride,
                      sgn_coord_count=args.sgn_coords)
    result = train(MlpSpec(layers, init_seed=args.seed), cfg, data)
    meta = {"layers": args.layers, "dataset": args.dataset, "separation": args.separation,
            "lr": args.lr, "batch": args.batch, "momentum": args.momentum, "wd": args.wd,
            "stop_loss": args.stop_loss, "max_iters": args.max_iters, "stride": args.stride,
            "sgn_coords": args.sgn_coords, "seed": args.seed, "m_test": args.m_test}
    save_run(result, args.out_dir, meta)
    _emit({"iters": result.iters, "converged": result.converged, "train_acc": result.train_acc,
           "test_acc": result.test_acc, "out_dir": args.out_dir})
    return EXIT_OK


def cmd_analyze(args) -> int:
    rep = analyze(args.run_dir, zeta=args.zeta, beta=args.beta, tau=args.tau,
                  strategy=args.strategy, subsample_count=args.subsample_count,
                  seed=args.seed, min_window=args.min_window, eps=args.eps)
    text = rep.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    if args.csv_row:
        items = rep.as_items()
        with open(args.csv_row, "w") as fh:
            fh.write(",".join(items) + "\n")
            fh.write(",".join(io.format_value(v) for v in items.values()) + "\n")
    return EXIT_OK if rep.ok else EXIT_ESTIMATION


def cmd_sweep(args) -> int:
    base = RunSetup(dataset=args.dataset, m_train=args.m_train, m_test=args.m_test,
                    classes=args.classes, dim=args.dim, separation=args.separation,
                    width=args.width, depth=args.depth, lr=args.lr, batch=args.batch,
                    momentum=args.momentum, wd=args.wd, stop_loss=args.stop_loss,
                    max_iters=args.max_iters, stride=args.stride, sgn_coords=args.sgn_coords)
    values = [float(v) for v in args.values.split(",")]
    seeds = [args.seed + i for i in range(args.seeds)]
    rows, corr = sweep(base, args.axis, values, seeds, jobs=args.jobs, runs_dir=args.runs_dir)
    text = format_sweep_csv(rows, corr)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.get("status") == "ok" for r in rows) else EXIT_ESTIMATION


def _add_train_flags(p, single_run: bool) -> None:
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--wd", type=float, default=0.0)
    p.add_argument("--stop-loss", type=float, default=0.01)
    p.add_argument("--max-iters", type=int, default=20_000)
    p.add_argument("--dataset", choices=("gaussian_blobs", "two_rings"), default="gaussian_blobs")
    p.add_argument("--separation", type=float, default=RunSetup.separation)
    p.add_argument("--m-train", type=int, default=200)
    p.add_argument("--m-test", type=int, default=1000)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--sgn-coords", type=int, default=256)
    if not single_run:
        p.add_argument("--classes", type=int, default=RunSetup.classes)
        p.add_argument("--dim", type=int, default=RunSetup.dim)
        p.add_argument("--width", type=int, default=RunSetup.width)
        p.add_argument("--depth", type=int, default=RunSetup.depth)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="fbmbound", parents=[common],
                                     description="fBm trajectory generalization bound toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fbm", parents=[common], help="sample a d-dimensional fBm path")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--method", choices=METHODS, default="davies_harte")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fbm)

    p = sub.add_parser("hurst", parents=[common], help="estimate H from a log")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--strategy", choices=("per_coordinate_mean", "subsample"), default="per_coordinate_mean")
    p.add_argument("--subsample-count", type=int)
    p.add_argument("--min-window", type=int)
    p.add_argument("--dump-fit")
    p.set_defaults(func=cmd_hurst)

    p = sub.add_parser("boxdim", parents=[common], help="box-counting dimension of a point log")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--scales", type=int, default=12)
    p.add_argument("--project-dim", type=int)
    p.add_argument("--dump-scales")
    p.set_defaults(func=cmd_boxdim)

    p = sub.add_parser("diam", parents=[common], help="enclosing-ball diameter of a point log")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.set_defaults(func=cmd_diam)

    p = sub.add_parser("bound", parents=[common], help="evaluate the generalization bound")
    p.add_argument("--diam", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--risk", type=float, default=0.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("indicators", parents=[common], help="tail, spectral and norm indicators")
    p.add_argument("--sgn-in")
    p.add_argument("--weights-in")
    p.add_argument("--k1", type=int)
    p.add_argument("--tail-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("sde", parents=[common], help="integrate the fBm-driven SDE")
    p.add_argument("--drift", choices=("zero", "linear", "double_well"), default="zero")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--w0", type=float)
    p.add_argument("--method", choices=METHODS, default="davies_harte")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("train", parents=[common], help="train the toy MLP and write a run directory")
    p.add_argument("--layers", default="2,64,64,2")
    _add_train_flags(p, single_run=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze", parents=[common], help="bound and indicators for a run directory")
    p.add_argument("run_dir")
    p.add_argument("--zeta", type=float)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--strategy", choices=("per_coordinate_mean", "subsample"), default="per_coordinate_mean")
    p.add_argument("--subsample-count", type=int)
    p.add_argument("--min-window", type=int)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--out")
    p.add_argument("--csv-row")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", parents=[common], help="train+analyze over a hyperparameter grid")
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at --seed")
    _add_train_flags(p, single_run=False)
    p.add_argument("--out")
    p.add_argument("--runs-dir")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FormatError as exc:
        log.error("format error: %s", exc)
        return EXIT_FORMAT
    except TrainingDivergence as exc:
        log.error("training diverged: %s", exc)
        return EXIT_DIVERGENCE
    except (EstimationError, NumericalError, IntegrationError) as exc:
        log.error("estimation failed: %s", exc)
        return EXIT_ESTIMATION
    except (DomainError, FbmBoundError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
