"""Command-line front end.

Subcommands: ``forecast`` (predict future samples), ``complete`` (general
masked completion with any of the three models), ``analyze`` (recovery and
prediction diagnostics), ``synth`` (seeded synthetic series), and ``bench``
(the desk acceptance suite).

Exit codes: 0 success, 2 usage error, 3 solver did not converge (outputs and
report are still written), 4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tctnn",
        description="Multidimensional time series forecasting by temporal-convolution "
        "tensor completion.",
    )
    parser.add_argument(
        "--threads", type=int, default=0,
        help="cap solver-internal BLAS threads (0 = library default)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p, with_model=False):
        if with_model:
            p.add_argument("--model", choices=("tnn", "tctnn", "tcmnn"), default="tctnn")
        p.add_argument("--kernel", default="auto",
                       help="convolution kernel size, or 'auto' for half the time length")
        p.add_argument("--max-iters", type=int, default=500)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--inverse", choices=("scaled-adjoint", "first-slice"),
                       default="scaled-adjoint")

    p = sub.add_parser("forecast", help="predict the next H samples of a series")
    p.add_argument("--input", required=True, help="history series (.tnsr or order-2 .csv)")
    p.add_argument("--horizon", type=int, required=True)
    add_solver_flags(p)
    p.add_argument("--output", required=True, help="predicted samples (tensor file)")
    p.add_argument("--completed", help="optionally also write the full completed series")
    p.add_argument("--report", required=True, help="solve report (JSON)")
    p.add_argument("--truth", help="held-out truth for forecast-region metrics")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("complete", help="complete a masked tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True, help="0/1 indicator tensor file")
    add_solver_flags(p, with_model=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("analyze", help="recovery/prediction diagnostics for a series")
    p.add_argument("--input", required=True)
    p.add_argument("--kernel", default="auto")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--horizon", type=int, help="analyze under a prediction mask")
    group.add_argument("--mask", help="analyze under an explicit mask file")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a seeded synthetic series")
    p.add_argument("--kind", choices=("periodic", "smooth", "lowrank"), required=True)
    p.add_argument("--shape", required=True, help="comma-separated extents, e.g. 48,4,3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=int, default=4, help="period (periodic kind)")
    p.add_argument("--harmonics", type=int, help="harmonic count (periodic kind)")
    p.add_argument("--sigma", type=float, default=0.05, help="step scale (smooth kind)")
    p.add_argument("--rank", type=int, default=2, help="tubal rank (lowrank kind)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="run the desk acceptance suite")
    p.add_argument("--suite", choices=("desk",), default="desk")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def _load_input(path: str):
    import numpy as np

    from .tensor_core import TensorFormatError, load_tensor

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) != 3 or rows[0][0] != "dims":
            raise TensorFormatError(f"{path}: CSV needs a 'dims,t,n' header row")
        try:
            t, n = int(rows[0][1]), int(rows[0][2])
        except ValueError as exc:
            raise TensorFormatError(f"{path}: bad dims header {rows[0]!r}") from exc
        body = [r for r in rows[1:] if r]
        if len(body) != t or any(len(r) != n for r in body):
            raise TensorFormatError(f"{path}: expected {t} rows of {n} values")
        return np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    return load_tensor(path)


def _save_output(a, path: str) -> None:
    from .tensor_core import save_tensor

    path = Path(path)
    if path.suffix.lower() == ".csv":
        if a.ndim != 2:
            raise ValueError("CSV output supports order-2 tensors only")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dims", a.shape[0], a.shape[1]])
            writer.writerows(a.tolist())
        return
    save_tensor(a, path)


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _solver_config(args):
    from .solver import AdmmConfig

    kernel = args.kernel
    if kernel != "auto":
        kernel = int(kernel)
    return AdmmConfig(
        max_iters=args.max_iters,
        rel_tol=args.tol,
        kernel_k=kernel,
        inverse_mode=args.inverse,
    )


def cmd_forecast(args) -> int:
    from .metrics import metrics
    from .solver import forecast

    history = _load_input(args.input)
    result = forecast(history, args.horizon, _solver_config(args))
    _save_output(result.prediction, args.output)
    if args.completed:
        _save_output(result.completed, args.completed)
    payload = result.report.to_dict()
    payload["horizon"] = args.horizon
    if args.truth:
        truth = _load_input(args.truth)
        region = truth[-args.horizon:] if truth.shape[0] > args.horizon else truth
        payload["metrics"] = metrics(result.prediction, region, region="forecast-only").to_dict()
    _write_json(payload, args.report)
    return EXIT_OK if result.report.converged else EXIT_NONCONVERGED


def cmd_complete(args) -> int:
    import numpy as np

    from .sampling import SamplingMask
    from .solver import solve_tcmnn, solve_tctnn, solve_tnn

    observed = _load_input(args.input)
    mask = SamplingMask(_load_input(args.mask))
    cfg = _solver_config(args)
    solve = {"tnn": solve_tnn, "tctnn": solve_tctnn, "tcmnn": solve_tcmnn}[args.model]
    squeeze = False
    if args.model == "tnn" and observed.ndim == 2:
        # order-2 input: treat the matrix as a tensor with one trailing mode
        observed = observed[..., None]
        mask = SamplingMask(mask.indicator[..., None])
        squeeze = True
    completed, report = solve(observed, mask, cfg)
    if squeeze:
        completed = np.ascontiguousarray(completed[..., 0])
    _save_output(completed, args.output)
    _write_json(report.to_dict(), args.report)
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_analyze(args) -> int:
    from .sampling import SamplingMask, min_sampling_ratio, prediction_mask
    from .temporal_conv import default_kernel_size
    from .theory import incoherence_mu, max_exact_horizon, recovery_threshold

    series = _load_input(args.input)
    t = series.shape[0]
    k = default_kernel_size(t) if args.kernel == "auto" else int(args.kernel)

    if args.mask:
        mask = SamplingMask(_load_input(args.mask))
    elif args.horizon is not None:
        mask = prediction_mask(t, args.horizon, series.shape[1:])
    else:
        mask = None
    rho = min_sampling_ratio(mask) if mask is not None else 1.0

    direct = series if series.ndim >= 3 else series[..., None]
    rep = incoherence_mu(direct)
    horizon = max_exact_horizon(series, k)
    payload = {
        "schema": 1,
        "rho": rho,
        "mu": rep.mu,
        "r": rep.tubal_rank,
        "r_s": rep.multi_rank_sum,
        "rhs": recovery_threshold(rep.mu, rep.tubal_rank, rep.multi_rank_sum),
        "k": k,
        "h_max": horizon.h_max,
        "conv_domain": {
            "mu": horizon.mu_T,
            "r": horizon.r_T,
            "r_s": horizon.rs_T,
            "horizon_bound": horizon.bound,
        },
    }
    _write_json(payload, args.report)
    json.dump(payload, sys.stdout, indent=2)
    print()
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import synth

    try:
        shape = tuple(int(v) for v in args.shape.split(","))
    except ValueError as exc:
        raise ValueError(f"bad shape {args.shape!r}: expected comma-separated integers") from exc
    params = {}
    if args.kind == "periodic":
        params = {"tau": args.tau, "harmonics": args.harmonics}
    elif args.kind == "smooth":
        params = {"sigma": args.sigma}
    elif args.kind == "lowrank":
        params = {"rank": args.rank}
    series = synth(args.kind, shape, args.seed, **params)
    _save_output(series, args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_desk_suite

    passed = run_desk_suite(report_path=args.report)
    return EXIT_OK if passed else 1


def _thread_limit(n: int):
    if n and n > 0:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    return contextlib.nullcontext()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # includes TensorFormatError/TensorSizeError and bad parameter values
        from .tensor_core import TensorFormatError

        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, TensorFormatError) else EXIT_USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
