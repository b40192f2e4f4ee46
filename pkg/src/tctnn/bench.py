"""Desk-scale acceptance suite.

Ten self-contained checks cover the algebra oracles, the prox, the sampling
fixtures, the low-rankness bounds, exact recovery and exact prediction at desk
scale, the convergence profile, the tensor-vs-matrix ablation ordering, and
the kernel-size heuristic. Every check is deterministic (fixed seeds) and
carries its tolerance inline; ``run_desk_suite`` prints one line per check and
writes a JSON report.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np

from .metrics import metrics
from .sampling import SamplingMask, bernoulli_mask, min_sampling_ratio, prediction_mask
from .solver import AdmmConfig, forecast, solve_tcmnn, solve_tctnn, solve_tnn
from .synth import synth_banded, synth_incoherent_lowrank, synth_periodic, synth_smooth
from .temporal_conv import (
    conv_sampling_mask,
    conv_tensor,
    default_kernel_size,
    periodicity_bound,
    rank_r_error,
    smoothness_bound,
)
from .tensor_core import bcirc, bfold, bunfold, frobenius_norm
from .theory import deterministic_recovery_check
from .tsvd import (
    _face_singular_values,
    reconstruct,
    spectral_norm,
    t_product,
    t_svd,
    t_svt,
    tnn,
)

# Hand-encoded 4x4x3 sampling fixture with known sub-tensor tallies: the third
# horizontal sub-tensor holds 10 of 12 sampled entries and the second lateral
# sub-tensor holds 9 of 12.
_FIXTURE_MISSING = ((2, 1, 0), (2, 3, 1), (0, 1, 1), (3, 1, 2))


def sampling_fixture_mask() -> SamplingMask:
    ind = np.ones((4, 4, 3))
    for pos in _FIXTURE_MISSING:
        ind[pos] = 0.0
    return SamplingMask(ind, meta={"kind": "fixture"})


def _rel(a, b) -> float:
    return frobenius_norm(a - b) / max(frobenius_norm(b), np.finfo(np.float64).tiny)


def _criterion_tsvd_oracle() -> dict:
    rng = np.random.Generator(np.random.PCG64(101))
    worst_tp = worst_rec = 0.0
    start = time.perf_counter()
    for i in range(200):
        order = 3 + (i % 2)
        while True:
            dims = tuple(int(rng.integers(1, 9)) for _ in range(order))
            if int(np.prod(dims)) <= 10_000:
                break
        a = rng.standard_normal(dims)
        inner = int(rng.integers(1, 6))
        b = rng.standard_normal((dims[1], inner) + dims[2:])
        oracle = bfold(bcirc(a) @ bunfold(b), (dims[0], inner) + dims[2:])
        worst_tp = max(worst_tp, _rel(t_product(a, b), oracle))
        factors = t_svd(a, skinny=True)
        worst_rec = max(worst_rec, _rel(reconstruct(factors), a))
    elapsed = time.perf_counter() - start
    return {
        "passed": worst_tp <= 1e-10 and worst_rec <= 1e-10 and elapsed <= 30.0,
        "details": {"worst_tproduct_rel": worst_tp, "worst_reconstruction_rel": worst_rec,
                    "seconds": elapsed, "budget_seconds": 30.0},
    }


def _criterion_prox() -> dict:
    rng = np.random.Generator(np.random.PCG64(202))
    shapes = [(3, 3, 2), (4, 2, 3), (2, 4, 2, 2), (5, 3, 2)]
    beaten = True
    worst_sigma = 0.0
    worst_margin = math.inf
    for trial in range(20):
        a = rng.standard_normal(shapes[trial % len(shapes)])
        tau = float(rng.uniform(0.05, 0.9)) * spectral_norm(a)
        out = t_svt(a, tau)
        s_in = _face_singular_values(a)
        s_out = _face_singular_values(out)
        worst_sigma = max(worst_sigma, float(np.abs(s_out - np.maximum(s_in - tau, 0.0)).max()))

        def objective(y):
            return tau * tnn(y) + 0.5 * frobenius_norm(y - a) ** 2

        base = objective(out)
        radius = 0.1 * frobenius_norm(a)
        for _ in range(1000):
            delta = rng.standard_normal(a.shape)
            delta *= rng.uniform(0.0, radius) / max(frobenius_norm(delta), 1e-300)
            margin = objective(out + delta) - base
            worst_margin = min(worst_margin, margin)
            if margin < -1e-12:
                beaten = False
    return {
        "passed": beaten and worst_sigma <= 1e-9,
        "details": {"worst_sigma_abs_err": worst_sigma, "worst_competitor_margin": worst_margin,
                    "pairs": 20, "competitors_per_pair": 1000},
    }


def _criterion_sampling_fixtures() -> dict:
    fix = sampling_fixture_mask()
    third_horizontal = fix.horizontal_count(2)
    second_lateral = fix.lateral_count(1)

    pm = prediction_mask(4, 1, (3, 2))
    rho = min_sampling_ratio(pm)
    rho_conv = min_sampling_ratio(conv_sampling_mask(pm, 4))
    return {
        "passed": third_horizontal == 10 and second_lateral == 9
        and rho == 0.0 and rho_conv == 0.75,
        "details": {"third_horizontal": third_horizontal, "second_lateral": second_lateral,
                    "rho_prediction": rho, "rho_conv": rho_conv},
    }


def _criterion_bounds() -> dict:
    rng = np.random.Generator(np.random.PCG64(303))
    smooth_ok = periodic_ok = exact_ok = True
    worst_ratio = 0.0
    for i in range(100):
        t = int(rng.choice((12, 16, 20, 24)))
        feat = (int(rng.integers(2, 5)), int(rng.integers(1, 4)))
        series = synth_smooth((t,) + feat, sigma=float(rng.uniform(0.01, 0.1)), seed=1000 + i)
        k = default_kernel_size(t)
        conv = conv_tensor(series, k)
        for r in range(1, 6):
            err = rank_r_error(conv, r)
            bound = smoothness_bound(series, k, r)
            smooth_ok &= err <= bound
            if bound > 0:
                worst_ratio = max(worst_ratio, err / bound)

    floor_hits = 0
    for i in range(100):
        t = int(rng.choice((16, 24, 32)))
        tau = int(rng.choice((2, 4, 8)))
        feat = (int(rng.integers(2, 5)), int(rng.integers(1, 4)))
        series = synth_periodic((t,) + feat, tau=tau, seed=2000 + i)
        exact = i % 2 == 0
        if not exact:
            series = series + 1e-3 * rng.standard_normal(series.shape)
        k = default_kernel_size(t)
        conv = conv_tensor(series, k)
        err = rank_r_error(conv, tau)
        bound = periodicity_bound(series, k, tau)
        floor = 1e-10 * frobenius_norm(conv)
        periodic_ok &= err <= bound + floor
        if exact:
            exact_ok &= err <= floor
            floor_hits += 1
    return {
        "passed": smooth_ok and periodic_ok and exact_ok,
        "details": {"smooth_ok": smooth_ok, "periodic_ok": periodic_ok,
                    "exact_periodic_ok": exact_ok, "exact_instances": floor_hits,
                    "worst_smooth_error_over_bound": worst_ratio},
    }


def _criterion_exact_recovery() -> dict:
    start = time.perf_counter()
    worst = 0.0
    all_pass = True
    searched = []
    for i in range(20):
        rank = 1 + (i % 2)
        truth = synth_incoherent_lowrank((8, 8, 3), rank=rank, seed=400 + i)
        found = None
        for p in (0.95, 0.97, 0.99, 0.999, 1.0):
            for s in range(50):
                mask = bernoulli_mask((8, 8, 3), p, seed=10_000 * i + s)
                if deterministic_recovery_check(mask, truth).satisfied:
                    found = (p, mask)
                    break
            if found:
                break
        if found is None:
            all_pass = False
            continue
        p, mask = found
        solution, _ = solve_tnn(truth * mask.indicator, mask)
        err = _rel(solution, truth)
        worst = max(worst, err)
        searched.append({"rank": rank, "p": p,
                         "missing": int(mask.indicator.size - mask.total_count),
                         "recovery_rel_err": err})
        all_pass &= err <= 1e-6
    elapsed = time.perf_counter() - start
    return {
        "passed": all_pass and elapsed <= 120.0,
        "details": {"worst_recovery_rel_err": worst, "seconds": elapsed,
                    "budget_seconds": 120.0, "instances": searched},
    }


def _criterion_tnn_zero_forecast() -> dict:
    series = synth_periodic((16, 3, 2), tau=4, seed=77)
    mask = prediction_mask(16, 3, (3, 2))
    observed = series * mask.indicator
    solution, _ = solve_tnn(observed, mask)
    forecast_norm = frobenius_norm(solution[13:])
    limit = 1e-6 * frobenius_norm(observed)
    return {
        "passed": forecast_norm <= limit,
        "details": {"forecast_norm": forecast_norm, "limit": limit},
    }


def _criterion_exact_prediction() -> dict:
    results = {}
    ok = True
    worst_seconds = 0.0
    truth = synth_periodic((48, 4, 3), tau=4, seed=11)
    for h in (2, 4):
        start = time.perf_counter()
        res = forecast(truth[: 48 - h], h, AdmmConfig(kernel_k=24))
        seconds = time.perf_counter() - start
        worst_seconds = max(worst_seconds, seconds)
        rmse = metrics(res.prediction, truth[48 - h:], region="forecast-only").rmse
        results[f"periodic_h{h}_rmse"] = rmse
        ok &= rmse <= 1e-3 and seconds <= 60.0

    constant = np.full((48, 4, 3), 2.5)
    for h in (4, 8):
        start = time.perf_counter()
        res = forecast(constant[: 48 - h], h, AdmmConfig(kernel_k=24))
        seconds = time.perf_counter() - start
        worst_seconds = max(worst_seconds, seconds)
        rmse = metrics(res.prediction, constant[48 - h:], region="forecast-only").rmse
        results[f"constant_h{h}_rmse"] = rmse
        ok &= rmse <= 1e-6 and seconds <= 60.0
    results["worst_solve_seconds"] = worst_seconds
    return {"passed": ok, "details": results}


def _criterion_convergence_curve() -> dict:
    rng = np.random.Generator(np.random.PCG64(42))
    series = rng.random((50, 50, 50))
    mask = prediction_mask(50, 5, (50, 50))
    _, report = solve_tctnn(series * mask.indicator, mask)
    rel = np.asarray(report.rel_changes)
    tail_ok = bool((rel[150:] <= 1e-6).all()) if rel.size > 150 else True
    passed = (
        report.converged
        and report.iterations <= 500
        and rel[-1] <= 1e-8
        and tail_ok
    )
    return {
        "passed": bool(passed),
        "details": {"iterations": report.iterations, "final_rel_change": float(rel[-1]),
                    "converged": report.converged, "tail_below_1e6_after_150": tail_ok},
    }


def _ablation_suite(seed: int) -> np.ndarray:
    return synth_banded((48, 4, 3), seed=seed, taus=(4, 6, 8), noise=0.03)


def _criterion_ablation_ordering() -> dict:
    h = 5
    tctnn_rmse, tcmnn_rmse = [], []
    for seed in range(10):
        truth = _ablation_suite(seed)
        observed = truth.copy()
        observed[48 - h:] = 0.0
        mask = prediction_mask(48, h, (4, 3))
        xt, _ = solve_tctnn(observed, mask)
        xm, _ = solve_tcmnn(observed, mask)
        tctnn_rmse.append(metrics(xt[48 - h:], truth[48 - h:]).rmse)
        tcmnn_rmse.append(metrics(xm[48 - h:], truth[48 - h:]).rmse)
    med_t = float(np.median(tctnn_rmse))
    med_m = float(np.median(tcmnn_rmse))
    return {
        "passed": med_t < med_m,
        "details": {"median_tctnn_rmse": med_t, "median_tcmnn_rmse": med_m,
                    "tctnn_rmse": tctnn_rmse, "tcmnn_rmse": tcmnn_rmse},
    }


def _criterion_kernel_heuristic() -> dict:
    h = 5
    kernels = (6, 12, 24, 36, 48)
    medians = {}
    for k in kernels:
        errs = []
        for seed in range(10):
            truth = _ablation_suite(seed)
            observed = truth.copy()
            observed[48 - h:] = 0.0
            mask = prediction_mask(48, h, (4, 3))
            x, _ = solve_tctnn(observed, mask, AdmmConfig(kernel_k=k))
            errs.append(metrics(x[48 - h:], truth[48 - h:]).rmse)
        medians[k] = float(np.median(errs))
    best = min(medians.values())
    ratio = medians[24] / best
    return {
        "passed": ratio <= 1.1,
        "details": {"medians_by_kernel": {str(k): v for k, v in medians.items()},
                    "half_over_best_ratio": ratio},
    }


CRITERIA = (
    (1, "tsvd-oracle-equivalence", _criterion_tsvd_oracle),
    (2, "prox-correctness", _criterion_prox),
    (3, "sampling-fixtures", _criterion_sampling_fixtures),
    (4, "lowrankness-bounds", _criterion_bounds),
    (5, "deterministic-exact-recovery", _criterion_exact_recovery),
    (6, "tnn-zero-forecast", _criterion_tnn_zero_forecast),
    (7, "tctnn-exact-prediction", _criterion_exact_prediction),
    (8, "convergence-curve", _criterion_convergence_curve),
    (9, "ablation-ordering", _criterion_ablation_ordering),
    (10, "kernel-heuristic", _criterion_kernel_heuristic),
)


def _run_one(num: int, name: str, fn) -> dict:
    start = time.perf_counter()
    out = fn()
    out["passed"] = bool(out["passed"])
    out.update(criterion=num, name=name, seconds=time.perf_counter() - start)
    return out


def run_criterion(number: int) -> dict:
    for num, name, fn in CRITERIA:
        if num == number:
            return _run_one(num, name, fn)
    raise ValueError(f"no criterion {number}")


def run_desk_suite(report_path=None, echo=print) -> bool:
    results = []
    for num, name, fn in CRITERIA:
        out = _run_one(num, name, fn)
        results.append(out)
        if echo:
            status = "PASS" if out["passed"] else "FAIL"
            echo(f"criterion {num:02d} {name}: {status} ({out['seconds']:.1f}s)")
    passed = all(r["passed"] for r in results)
    if report_path:
        payload = {"schema": 1, "suite": "desk", "passed": passed, "results": results}
        with open(report_path, "w") as fh:
            json.dump(payload, fh, indent=2, default=float)
            fh.write("\n")
    if echo:
        echo(f"desk suite: {'PASS' if passed else 'FAIL'}")
    return passed


__all__ = ["CRITERIA", "run_criterion", "run_desk_suite", "sampling_fixture_mask"]
