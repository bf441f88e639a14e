"""Command-line interface: experiment runs, generic series summation, matrix functions."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import matio
from .errors import DivsumError, InvalidInputError
from .experiments import EXPERIMENT_IDS, ExperimentSpec, run_experiment, write_records
from .functional import (
    LimitSchedule,
    QuadratureSpec,
    AbelianWeights,
    abel_eval,
    abelian_means_eval,
    approach_infinity,
    approach_one,
    approach_zero,
    lambert_eval,
    mittag_leffler_sum,
    strong_borel_sum,
    take_limit,
    weak_borel_eval,
)
from .matfunc import (
    cesaro_weights as matfunc_cesaro_weights,
    conventional_weights,
    euler_weights,
    exp_coeffs,
    neumann_coeffs,
    pade_with_summation,
    schur_parlett_with_summation,
)
from .sequential import NorlundWeights, SumReport, cesaro_sum, cesaro_weights, euler_sum, norlund_transform
from .series import (
    MatrixSeries,
    coeff_power_terms,
    dirichlet_mobius_terms,
    hadamard_power_terms,
    neumann_terms,
    square_wave_fourier_terms,
    sum_terms,
    tail_series,
)
from .linalg import spectral_norm


def _load_coeff_file(path: str) -> list[complex]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [complex(float(p[0]), float(p[1])) for p in data]


def _load_weights_file(path: str) -> list[np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [matio.matrix_from_json_dict(obj) for obj in data]


def _build_series(tag: str, x: np.ndarray) -> MatrixSeries:
    if tag == "neumann":
        return neumann_terms(x)
    if tag == "fourier-square":
        return square_wave_fourier_terms(x)
    if tag == "dirichlet-mobius":
        return dirichlet_mobius_terms(x)
    if tag == "hadamard":
        return hadamard_power_terms(x)
    if tag.startswith("power-coeffs:"):
        return coeff_power_terms(x, _load_coeff_file(tag.split(":", 1)[1]))
    raise InvalidInputError(f"unknown series tag {tag!r}")


def _report_to_json(report: SumReport) -> str:
    return json.dumps(
        {
            "method": report.method,
            "terms_used": report.terms_used,
            "converged": report.converged,
            "last_increment_norm": report.last_increment_norm,
            "value": matio.matrix_to_json_dict(report.value),
        }
    )


def _limit_schedule(args, default: LimitSchedule) -> LimitSchedule:
    if args.limit_points:
        return LimitSchedule(points=[float(v) for v in args.limit_points], stagnation_tol=args.tol)
    return default


def _dispatch_sum(args) -> SumReport:
    x = matio.load_matrix(args.matrix)
    series = _build_series(args.series, x)
    n = args.terms
    tol = args.tol
    method = args.method
    quad = QuadratureSpec(upper=args.quad_T, tail_tol=args.quad_tol)

    if method.startswith("cesaro:"):
        order = int(method.split(":", 1)[1])
        if order == 0:
            value = sum_terms(series, n, kernel=args.kernel)
            return SumReport(value=value, terms_used=n + 1, converged=True, last_increment_norm=0.0, method="cesaro:0")
        if order == 1:
            return cesaro_sum(series, n, tol)
        w = cesaro_weights(order, series.dim)
        value = norlund_transform(series, w, n)
        half = norlund_transform(series, w, n // 2)
        gap = spectral_norm(value - half)
        return SumReport(
            value=value,
            terms_used=n,
            converged=bool(gap <= tol * (1.0 + spectral_norm(value))),
            last_increment_norm=gap,
            method=method,
        )
    if method.startswith("norlund:"):
        mats = _load_weights_file(method.split(":", 1)[1])
        if n >= len(mats):
            raise InvalidInputError(f"weights file provides {len(mats)} matrices; need n+1 = {n + 1}")
        w = NorlundWeights(weight_at=lambda k: mats[k], dim=mats[0].shape[0])
        value = norlund_transform(series, w, n)
        half = norlund_transform(series, w, n // 2)
        gap = spectral_norm(value - half)
        return SumReport(
            value=value,
            terms_used=n,
            converged=bool(gap <= tol * (1.0 + spectral_norm(value))),
            last_increment_norm=gap,
            method="norlund",
        )
    if method.startswith("euler:"):
        rho = float(method.split(":", 1)[1])
        return euler_sum(series, rho, n, tol, kernel=args.kernel)
    if method == "abel":
        schedule = _limit_schedule(args, approach_one(stagnation_tol=tol))
        return take_limit(lambda xv: abel_eval(series, xv, tol), schedule, method="abel")
    if method.startswith("abelian:"):
        mats = _load_weights_file(method.split(":", 1)[1])
        w = AbelianWeights(P_at=lambda k: mats[min(k, len(mats) - 1)], dim=mats[0].shape[0])
        schedule = _limit_schedule(args, approach_zero(0, 10, stagnation_tol=tol))
        return take_limit(lambda xv: abelian_means_eval(series, w, xv, tol), schedule, method="abelian")
    if method == "lambert":
        schedule = _limit_schedule(args, approach_one(stagnation_tol=tol))
        if series.start_index == 0:
            # The kernel is indexed from 1; sum the tail and restore A_0.
            head = series.term_at(0)
            tail = tail_series(series)
            return take_limit(lambda xv: head + lambert_eval(tail, xv, tol), schedule, method="lambert")
        return take_limit(lambda xv: lambert_eval(series, xv, tol), schedule, method="lambert")
    if method == "wborel":
        schedule = _limit_schedule(args, approach_infinity(stagnation_tol=tol))
        return take_limit(lambda xv: weak_borel_eval(series, xv, tol), schedule, method="wborel")
    if method == "sborel":
        return strong_borel_sum(series, quad)
    if method.startswith("mittag:"):
        alpha = float(method.split(":", 1)[1])
        return mittag_leffler_sum(series, alpha, quad)
    raise InvalidInputError(f"unknown method tag {method!r}")


def _dispatch_matfunc(args) -> np.ndarray:
    x = matio.load_matrix(args.matrix)
    if args.coeffs == "exp":
        a = exp_coeffs
    elif args.coeffs == "neumann":
        a = neumann_coeffs
    elif args.coeffs.startswith("file:"):
        seq = _load_coeff_file(args.coeffs.split(":", 1)[1])
        a = lambda k: seq[k]
    else:
        raise InvalidInputError(f"unknown coefficient tag {args.coeffs!r}")

    if args.weights == "conventional":
        c = conventional_weights()
    elif args.weights == "cesaro":
        c = matfunc_cesaro_weights()
    elif args.weights.startswith("euler:"):
        c = euler_weights(float(args.weights.split(":", 1)[1]))
    else:
        raise InvalidInputError(f"unknown weights tag {args.weights!r}")

    algo = args.algo
    if algo.startswith("pade:"):
        _, m_s, n_s = algo.split(":")
        return pade_with_summation(x, int(m_s), int(n_s), a, c)
    if algo.startswith("parlett:"):
        n = int(algo.split(":", 1)[1])
        return schur_parlett_with_summation(x, n, a, c, delta=args.delta)
    raise InvalidInputError(f"unknown algorithm tag {algo!r}")


def _add_experiment_parser(sub, name: str) -> None:
    p = sub.add_parser(name, help=f"run the {name} experiment")
    p.add_argument("--dim", type=int, default=0)
    p.add_argument("--terms", type=int, default=0)
    p.add_argument("--rho", type=float, default=100.0)
    p.add_argument("--matrices", type=int, default=0)
    p.add_argument("--alpha-grid", type=float, nargs="*", default=None)
    p.add_argument("--deltas", type=float, nargs="*", default=None)
    p.add_argument("--m-lo", type=int, default=4)
    p.add_argument("--m-hi", type=int, default=12)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte reproducibility)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divsum", description="Sum matrix series, divergent ones included.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENT_IDS:
        _add_experiment_parser(sub, name)

    ps = sub.add_parser("sum", help="sum one series with one method")
    ps.add_argument("--series", required=True)
    ps.add_argument("--method", required=True)
    ps.add_argument("--matrix", required=True)
    ps.add_argument("--terms", type=int, default=100)
    ps.add_argument("--kernel", default="recursive")
    ps.add_argument("--tol", type=float, default=1e-8)
    ps.add_argument("--limit-points", type=float, nargs="*", default=None)
    ps.add_argument("--quad-T", type=float, default=40.0)
    ps.add_argument("--quad-tol", type=float, default=1e-9)
    ps.add_argument("--out", type=str, default=None)

    pm = sub.add_parser("matfunc", help="evaluate a matrix function through a summation method")
    _add_matfunc_args(pm)
    return parser


def _add_matfunc_args(pm) -> None:
    pm.add_argument("--algo", required=True, help="pade:<m>:<n> or parlett:<n>")
    pm.add_argument("--weights", default="conventional", help="conventional | cesaro | euler:<rho>")
    pm.add_argument("--coeffs", default="exp", help="exp | neumann | file:<path>")
    pm.add_argument("--matrix", required=True)
    pm.add_argument("--delta", type=float, default=None)
    pm.add_argument("--out", type=str, default=None)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in EXPERIMENT_IDS:
            spec = ExperimentSpec(
                experiment=args.command,
                dim=args.dim,
                terms=args.terms,
                rho=args.rho,
                seed=args.seed,
                matrices=args.matrices,
                alpha_grid=tuple(args.alpha_grid) if args.alpha_grid else (),
                delta_grid=tuple(args.deltas) if args.deltas else (),
                m_lo=args.m_lo,
                m_hi=args.m_hi,
                out=args.out,
                fmt=args.format,
                record_timing=args.timing,
            )
            text = write_records(spec, run_experiment(spec))
            if not args.out:
                sys.stdout.write(text)
            return 0
        if args.command == "sum":
            report = _dispatch_sum(args)
            text = _report_to_json(report)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
            else:
                sys.stdout.write(text + "\n")
            return 0
        if args.command == "matfunc":
            value = _dispatch_matfunc(args)
            text = json.dumps(matio.matrix_to_json_dict(value))
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
            else:
                sys.stdout.write(text + "\n")
            return 0
    except (DivsumError, OverflowError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 2  # pragma: no cover


def matfunc_main(argv=None) -> int:
    """Standalone entry point exposing only the matrix-function command."""
    parser = argparse.ArgumentParser(prog="matfunc", description="Matrix functions through summation methods.")
    _add_matfunc_args(parser)
    args = parser.parse_args(argv)
    try:
        value = _dispatch_matfunc(args)
    except (DivsumError, OverflowError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    text = json.dumps(matio.matrix_to_json_dict(value))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
