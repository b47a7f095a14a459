"""Command-line interface.

Every subcommand writes its outputs atomically and a run manifest
(``<output>.manifest.json`` unless ``--manifest`` is given) holding the
resolved parameters, seed, input hashes and tool version.  Nothing
time- or host-dependent is recorded, so identical flags give identical
files.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .anomaly import anomaly_scores, label_top_fraction
from .background import heat_image, pgm_bytes, read_pgm, separate
from .bench import BENCH_STEP_SCALE, format_table, run_bench
from .bounds import deviation_bound, sample_moments
from .core import FitConfig, default_block_count, fit, reconstruct, transform
from .datagen import lowrank_with_outliers
from .errors import InvalidFraction, NumericalError, ParseError, ValidationError
from .io import (
    atomic_write_bytes,
    dumps_json,
    load_model,
    read_csv_matrix,
    save_model,
    sha256_file,
    write_csv,
    write_json,
)
from .metrics import precision_recall_f1

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

L_HEURISTIC = (
    "Blocks: the median ignores corrupted blocks only while fewer than half of them hold an "
    "outlier, so choose L > (2 + eta) * (expected outlier count); L >= 3 x outliers is a safe "
    "rule. Default when omitted: max(3, 3 * ceil(sqrt(N))) capped at N / 10."
)


def _manifest(subcommand, params, inputs):
    return {
        "format": "mompca-manifest",
        "format_version": 1,
        "tool": "mompca",
        "version": __version__,
        "subcommand": subcommand,
        "seed": params.get("seed"),
        "params": params,
        "inputs": {str(p): sha256_file(p) for p in inputs},
    }


def _write_manifest(args, primary, subcommand, params, inputs):
    path = args.manifest or f"{primary}.manifest.json"
    write_json(path, _manifest(subcommand, params, inputs))


def _fit_config(args, n):
    L = args.L if args.L is not None else default_block_count(n)
    if args.L is None:
        print(f"using L={L} blocks. {L_HEURISTIC}", file=sys.stderr)
    return FitConfig(d=args.d, n_blocks=L, eta=args.eta, step_scale=args.step_scale, tol=args.tol,
                     max_iter=args.max_iter, seed=args.seed, center=not args.no_center, init=args.init)


def _config_params(cfg):
    return {"d": cfg.d, "L": cfg.n_blocks, "eta": cfg.eta, "step_scale": cfg.step_scale,
            "tol": cfg.tol, "max_iter": cfg.max_iter, "seed": cfg.seed, "center": cfg.center, "init": cfg.init}


def _summary(model):
    rep = model.report
    state = "converged" if rep.converged else "stopped at max_iter"
    return (f"{state} after {rep.iterations_run} iterations; MoM objective "
            f"{rep.objective_trace[0]:.6g} -> {rep.best_objective:.6g} (best at iteration "
            f"{rep.best_iteration}); eta={rep.eta:.6g}")


def cmd_fit(args):
    X, _ = read_csv_matrix(args.input)
    cfg = _fit_config(args, X.shape[0])
    model = fit(X, cfg)
    save_model(model, args.model_out)
    report = {"config": _config_params(cfg), "report": model.report.summary(),
              "objective_trace": list(model.report.objective_trace),
              "median_block_trace": list(model.report.median_block_trace)}
    report_path = args.report_out or f"{args.model_out}.report.json"
    write_json(report_path, report)
    print(_summary(model))
    _write_manifest(args, args.model_out, "fit", {**_config_params(cfg), "input": args.input,
                                                  "model_out": args.model_out,
                                                  "report_out": report_path}, [args.input])


def cmd_transform(args):
    X, _ = read_csv_matrix(args.input)
    model = load_model(args.model)
    scores = transform(model, X)
    write_csv(args.out, scores.tolist(), [f"score_{j + 1}" for j in range(scores.shape[1])])
    if args.reconstruct_out:
        R = reconstruct(model, X)
        write_csv(args.reconstruct_out, R.tolist())
    _write_manifest(args, args.out, "transform", {"input": args.input, "model": args.model,
                                                  "out": args.out,
                                                  "reconstruct_out": args.reconstruct_out},
                    [args.input, args.model])


def cmd_anomaly(args):
    if not 0 < args.fraction < 1:
        raise InvalidFraction(f"--fraction must lie in (0, 1), got {args.fraction}")
    X, _ = read_csv_matrix(args.input)
    inputs = [args.input]
    if args.model:
        model = load_model(args.model)
        params = {"model": args.model}
        inputs.append(args.model)
    else:
        if args.d is None:
            raise ValidationError("either --model or --d (fit parameters) is required")
        cfg = _fit_config(args, X.shape[0])
        model = fit(X, cfg)
        params = _config_params(cfg)
        print(_summary(model))
    expected = args.fraction * X.shape[0]
    print(f"note: with about {expected:.0f} expected outliers the block condition asks for "
          f"L > 2 * {expected:.0f}; it is not enforced", file=sys.stderr)
    scores = anomaly_scores(model, X)
    result = label_top_fraction(scores, args.fraction)
    write_csv(args.out, [[i, float(s), int(lab)] for i, (s, lab) in enumerate(zip(scores, result.labels))],
              ["index", "score", "label"])
    metrics_path = None
    if args.truth:
        truth, _ = read_csv_matrix(args.truth)
        truth = truth.ravel()
        prf = precision_recall_f1(result.labels, truth)
        metrics_path = args.metrics_out or f"{args.out}.metrics.json"
        write_json(metrics_path, {"metrics": prf.to_dict(), "threshold": result.threshold,
                                  "fraction": args.fraction, "n_flagged": int(result.labels.sum())})
        inputs.append(args.truth)
        print(f"precision={prf.precision:.4f} recall={prf.recall:.4f} f1={prf.f1:.4f}")
    _write_manifest(args, args.out, "anomaly", {**params, "input": args.input, "fraction": args.fraction,
                                                "truth": args.truth, "out": args.out,
                                                "metrics_out": metrics_path}, inputs)


def cmd_bench(args):
    rows = run_bench(args.n, args.p, args.r, d=args.d, n_blocks=args.L, seed=args.seed,
                     repeats=args.repeats, corrupt=not args.no_outliers, center=args.center,
                     step_scale=args.step_scale, eta=args.eta, force=args.force)
    records = [row.as_record() for row in rows]
    header = list(records[0])
    write_csv(args.out, [[rec[k] for k in header] for rec in records], header)
    text = format_table(rows) + "\n"
    if args.text_out:
        atomic_write_bytes(args.text_out, text.encode())
    print(text, end="")
    _write_manifest(args, args.out, "bench", {
        "n": list(args.n), "p": args.p, "r": args.r, "d": args.d, "L": args.L, "seed": args.seed,
        "repeats": args.repeats, "outliers": not args.no_outliers, "center": args.center,
        "step_scale": args.step_scale, "eta": args.eta, "out": args.out, "text_out": args.text_out,
    }, [])


def cmd_datagen(args):
    ds = lowrank_with_outliers(args.n, args.p, args.r, args.seed, corrupt=not args.no_outliers)
    out = Path(args.out_dir)
    write_csv(out / "X.csv", ds.X.tolist())
    write_csv(out / "X0.csv", ds.X0.tolist())
    write_csv(out / "labels.csv", [[int(v)] for v in ds.labels], ["outlier"])
    _write_manifest(args, out / "X.csv", "datagen", {"n": args.n, "p": args.p, "r": args.r,
                                                     "seed": args.seed, "outliers": not args.no_outliers,
                                                     "out_dir": args.out_dir}, [])


def cmd_background(args):
    paths = sorted(Path(args.frames).glob("*.pgm"))
    if len(paths) < 2:
        raise ValidationError(f"{args.frames}: need at least two .pgm frames")
    frames = np.stack([read_pgm(p) for p in paths])
    n_pixels = frames.shape[1] * frames.shape[2]
    cfg = FitConfig(d=args.d, n_blocks=args.L, eta=args.eta, step_scale=args.step_scale, tol=args.tol,
                    max_iter=args.max_iter, seed=args.seed, center=not args.no_center, init=args.init)
    cfg.validate(n_pixels, frames.shape[0])
    background, object_map, model = separate(frames, cfg)
    print(_summary(model))
    out = Path(args.out)
    for j, frame in enumerate(background):
        atomic_write_bytes(out / f"background_{j:06d}.pgm",
                           pgm_bytes(np.rint(frame * 255.0).astype(np.uint8)))
    atomic_write_bytes(out / "object_map.pgm", pgm_bytes(heat_image(object_map)))
    write_csv(out / "object_map.csv", object_map.tolist())
    _write_manifest(args, out / "object_map.csv", "background",
                    {**_config_params(cfg), "frames": [p.name for p in paths], "out": args.out},
                    paths)


def cmd_bounds(args):
    if args.sample:
        X, _ = read_csv_matrix(args.sample)
        mask = None
        if args.truth:
            labels, _ = read_csv_matrix(args.truth)
            mask = labels.ravel() == 0
        mu2, mu4 = sample_moments(X, mask)
        inputs = [args.sample] + ([args.truth] if args.truth else [])
    else:
        if args.mu2 is None or args.mu4 is None:
            raise ValidationError("give --mu2 and --mu4, or --sample")
        mu2, mu4 = args.mu2, args.mu4
        inputs = []
    n_inliers = args.n_inliers if args.n_inliers is not None else args.N - args.n_outliers
    report = deviation_bound(args.p, args.d, mu2, mu4, args.N, args.L, args.n_outliers, n_inliers,
                             args.eta_slack, check=not args.force)
    for note in report.notes:
        print(f"warning: {note}", file=sys.stderr)
    write_json(args.out, report.to_dict())
    print(dumps_json(report.to_dict()), end="")
    _write_manifest(args, args.out, "bounds", {
        "p": args.p, "d": args.d, "N": args.N, "L": args.L, "n_outliers": args.n_outliers,
        "n_inliers": n_inliers, "eta_slack": args.eta_slack, "mu2": mu2, "mu4": mu4,
        "sample": args.sample, "truth": args.truth, "force": args.force, "out": args.out, "seed": None,
    }, inputs)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    p.add_argument("--threads", type=int, default=None, help="cap BLAS threads (default: all cores)")


def _add_fit_params(p, required_d=True, L_default=None, L_help=L_HEURISTIC):
    p.add_argument("--d", type=int, required=required_d, help="subspace dimension")
    p.add_argument("--L", type=int, default=L_default, help=L_help)
    p.add_argument("--eta", type=float, default=None, help="step size (default: step_scale / lambda_1 "
                   "of the median block's scatter at the initial basis)")
    p.add_argument("--step-scale", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--no-center", action="store_true", help="skip feature-wise median centering")
    p.add_argument("--init", choices=["multistart", "scatter"], default="multistart",
                   help="starting basis: best of full-scatter and per-block eigenvectors (default), "
                        "or full-scatter eigenvectors only")


def build_parser():
    parser = argparse.ArgumentParser(prog="mompca", description="Median-of-Means PCA toolkit")
    parser.add_argument("--version", action="version", version=f"mompca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to a CSV of observations")
    p.add_argument("--input", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")
    _add_fit_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="project observations with a saved model")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="scores CSV (N x d)")
    p.add_argument("--reconstruct-out", help="optional reconstruction CSV (N x p)")
    _add_common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("anomaly", help="flag the largest-residual fraction of observations")
    p.add_argument("--input", required=True)
    p.add_argument("--model", help="saved model; otherwise fit with --d/--L")
    p.add_argument("--fraction", type=float, required=True, help="known outlier proportion o in (0, 1)")
    p.add_argument("--truth", help="CSV of 0/1 labels (1 = outlier) to score against")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics-out")
    _add_fit_params(p, required_d=False)
    _add_common(p)
    p.set_defaults(func=cmd_anomaly)

    p = sub.add_parser("bench", help="low-rank recovery benchmark with planted outlier rows")
    p.add_argument("--n", type=int, nargs="+", default=[2000])
    p.add_argument("--p", type=int, default=500)
    p.add_argument("--r", type=int, default=10)
    p.add_argument("--d", type=int, default=None, help="fitted dimension (default r)")
    p.add_argument("--L", type=int, default=None, help="blocks (default 3 * floor(sqrt(n)))")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--no-outliers", action="store_true")
    p.add_argument("--center", action="store_true", help="median-center before fitting")
    p.add_argument("--step-scale", type=float, default=BENCH_STEP_SCALE)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--force", action="store_true", help="run even if L <= 2 * outliers")
    p.add_argument("--out", required=True, help="summary CSV")
    p.add_argument("--text-out")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("datagen", help="dump a synthetic low-rank dataset to CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--no-outliers", action="store_true")
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("background", help="separate static background from moving objects",
                       description="Pixels are observations, frames are features. "
                                   "The highway-video setting used L=40 and d=5.")
    p.add_argument("--frames", required=True, help="directory of binary PGM frames (e.g. %%06d.pgm)")
    p.add_argument("--out", required=True)
    _add_fit_params(p, L_default=40, L_help="blocks (default 40)")
    p.set_defaults(d=5)
    _add_common(p)
    p.set_defaults(func=cmd_background)

    p = sub.add_parser("bounds", help="evaluate the Rademacher and deviation bounds")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n-outliers", type=int, default=0)
    p.add_argument("--n-inliers", type=int, default=None, help="default N - n_outliers")
    p.add_argument("--eta-slack", type=float, default=1.0)
    p.add_argument("--mu2", type=float)
    p.add_argument("--mu4", type=float)
    p.add_argument("--sample", help="CSV to estimate mu2/mu4 from")
    p.add_argument("--truth", help="0/1 labels; moments use rows labelled 0")
    p.add_argument("--force", action="store_true", help="warn instead of failing on violated assumptions")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=args.threads):
                args.func(args)
        else:
            args.func(args)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
