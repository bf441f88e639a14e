"""Desk-scale experiment harness: matrix generators, five experiment families, CSV/JSON output.

Runs are reproducible: a counter-based generator (Philox) seeded from the spec
drives every draw, records are emitted in a fixed order, and wall-clock timing
is written as 0 unless explicitly requested, so default outputs are
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DivergentIntegralError, InvalidInputError, NumericalFailureError
from .floatsum import TermStream, compensated_sum, recursive_sum
from .functional import QuadratureSpec, borel_type_integral
from .linalg import (
    as_cmatrix,
    hadamard_closed_form,
    identity,
    jordan_block,
    mat_exp,
    mat_sin,
    neumann_closed_form,
    spectral_norm,
)
from .matfunc import euler_weights, neumann_coeffs, schur_parlett_with_summation
from .schur import schur
from .series import get_sieve

#: Column layout per experiment id; never reordered.
CSV_SCHEMAS: dict[str, tuple[str, ...]] = {
    "gibbs": ("structure", "t", "norm_fourier", "norm_cesaro", "norm_sign", "err_fourier", "err_cesaro", "time_s"),
    "neumann": ("matrix_index", "method", "forward_error", "backward_error", "time_s"),
    "euler": ("alpha", "method", "mean_log10_forward_error", "time_s"),
    "lambert": ("delta", "m", "x", "value_norm", "time_s"),
    "floatsum": ("sweep", "size", "kernel", "forward_error", "time_s"),
}

EXPERIMENT_IDS = tuple(CSV_SCHEMAS)


@dataclass
class ExperimentSpec:
    """Parameters of one reproducible experiment run."""

    experiment: str
    dim: int = 0
    terms: int = 0
    rho: float = 100.0
    seed: int = 12345
    matrices: int = 0
    alpha_grid: tuple[float, ...] = ()
    delta_grid: tuple[float, ...] = ()
    m_lo: int = 4
    m_hi: int = 12
    out: str | None = None
    fmt: str = "csv"
    record_timing: bool = False

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))


def _clock(spec: ExperimentSpec, started: float) -> float:
    return time.perf_counter() - started if spec.record_timing else 0.0


def _finite_or_inf(v: float) -> float:
    if math.isnan(v):
        raise NumericalFailureError("experiment produced NaN; divergence must be encoded as inf")
    return v


def records_to_csv(experiment: str, records: list[dict]) -> str:
    header = CSV_SCHEMAS[experiment]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        row = []
        for col in header:
            v = rec[col]
            row.append(repr(v) if isinstance(v, float) else str(v))
        writer.writerow(row)
    return buf.getvalue()


def records_to_json(experiment: str, records: list[dict]) -> str:
    header = CSV_SCHEMAS[experiment]
    payload = [{col: rec[col] for col in header} for rec in records]
    return json.dumps({"experiment": experiment, "records": payload}, allow_nan=False, default=_json_inf)


def _json_inf(v):  # pragma: no cover - only exercised via records_to_json
    raise TypeError(f"not JSON serializable: {v!r}")


def write_records(spec: ExperimentSpec, records: list[dict]) -> str:
    """Render records in the spec's format; infinities become the string 'inf' in CSV."""
    if spec.fmt == "json":
        safe = [
            {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in rec.items()} for rec in records
        ]
        text = records_to_json(spec.experiment, safe)
    else:
        text = records_to_csv(spec.experiment, records)
    if spec.out:
        Path(spec.out).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------------------
# Matrix generators


def gen_bidiagonal(d: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Upper bidiagonal: diagonal magnitudes U(0, 0.9) negated with probability alpha,
    superdiagonal U(0, 1)."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError("alpha must lie in [0, 1]")
    mags = rng.uniform(0.0, 0.9, size=d)
    signs = np.where(rng.uniform(size=d) < alpha, -1.0, 1.0)
    upper = rng.uniform(0.0, 1.0, size=d - 1) if d > 1 else np.array([])
    x = np.diag(mags * signs).astype(np.complex128)
    if d > 1:
        x += np.diag(upper, k=1)
    return x


def gen_with_spectrum(
    eigs,
    structure: str,
    rng: np.random.Generator,
    jordan_sizes: tuple[int, ...] | None = None,
) -> tuple[np.ndarray, float]:
    """Matrix with the prescribed spectrum; returns it with the similarity's condition number.

    ``structure``: ``orthogonal`` (real orthogonal similarity), ``tridiagonal``
    (random nonsingular tridiagonal similarity, redrawn up to 10 times), or
    ``jordan`` (block diagonal of Jordan blocks; one eigenvalue per block).
    """
    vals = np.asarray(eigs, dtype=np.complex128)
    if structure == "orthogonal":
        d = vals.size
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        return as_cmatrix(q @ np.diag(vals) @ q.T), 1.0
    if structure == "tridiagonal":
        d = vals.size
        for _ in range(10):
            t = np.diag(rng.uniform(0.5, 1.5, size=d))
            if d > 1:
                t = t + np.diag(rng.uniform(-0.5, 0.5, size=d - 1), k=1)
                t = t + np.diag(rng.uniform(-0.5, 0.5, size=d - 1), k=-1)
            svals = np.linalg.svd(t, compute_uv=False)
            if svals[-1] > 1e-8 * svals[0]:
                x = np.linalg.solve(t.T, (t @ np.diag(vals)).T).T
                return as_cmatrix(x), float(svals[0] / svals[-1])
        raise NumericalFailureError("could not draw a nonsingular tridiagonal similarity in 10 tries")
    if structure == "jordan":
        if jordan_sizes is None:
            raise InvalidInputError("jordan structure needs block sizes")
        if len(jordan_sizes) != vals.size:
            raise InvalidInputError("need exactly one eigenvalue per Jordan block")
        blocks = [jordan_block(lam, s) for lam, s in zip(vals, jordan_sizes)]
        return scipy.linalg.block_diag(*blocks).astype(np.complex128), 1.0
    raise InvalidInputError(f"unknown structure {structure!r}")


# ---------------------------------------------------------------------------
# Experiment: Fourier partial sums vs their averaged counterpart


def _square_wave_sums(x: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-term square-wave Fourier sum F_m and the mean of its first m partial sums."""
    d = x.shape[0]
    s = np.zeros((d, d), dtype=np.complex128)
    acc = np.zeros((d, d), dtype=np.complex128)
    for k in range(m):
        if k >= 1 and k % 2 == 1:
            s = s + (4.0 / (math.pi * k)) * mat_sin(k * x)
        acc = acc + s
    f_m = s
    if m % 2 == 1:
        f_m = s + (4.0 / (math.pi * m)) * mat_sin(m * x)
    return f_m, acc / m


def run_gibbs(spec: ExperimentSpec) -> list[dict]:
    """Square-wave Fourier sums on three spectral structures over a t-grid."""
    d = spec.dim or 50
    m = spec.terms or 100
    block = 5
    if d % block:
        raise InvalidInputError(f"gibbs experiment needs dim divisible by {block}")
    rng = spec.rng()
    lam = rng.uniform(0.2, 1.0, size=d) * np.where(rng.uniform(size=d) < 0.5, -1.0, 1.0)
    lam_blocks = rng.uniform(0.2, 1.0, size=d // block) * np.where(rng.uniform(size=d // block) < 0.5, -1.0, 1.0)

    # The similarities are built once so that sign(X(t)) shares them exactly;
    # for t > 0 the eigenvalue signs do not depend on t.
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    base_orth = as_cmatrix(q @ np.diag(lam) @ q.T)
    sign_orth = as_cmatrix(q @ np.diag(np.sign(lam)) @ q.T)

    t_mat = np.diag(rng.uniform(0.5, 1.5, size=d))
    t_mat = t_mat + np.diag(rng.uniform(-0.5, 0.5, size=d - 1), k=1)
    t_mat = t_mat + np.diag(rng.uniform(-0.5, 0.5, size=d - 1), k=-1)
    svals = np.linalg.svd(t_mat, compute_uv=False)
    if svals[-1] <= 1e-8 * svals[0]:
        raise NumericalFailureError("tridiagonal similarity draw was singular")
    base_tri = as_cmatrix(np.linalg.solve(t_mat.T, (t_mat @ np.diag(lam)).T).T)
    sign_tri = as_cmatrix(np.linalg.solve(t_mat.T, (t_mat @ np.diag(np.sign(lam))).T).T)

    sign_jordan = scipy.linalg.block_diag(
        *[np.sign(l) * np.eye(block) for l in lam_blocks]
    ).astype(np.complex128)

    # Arguments t*lam stay inside (-pi/2, pi/2); the grid resolves the
    # oscillation scale pi/m of the m-term partial sums.
    t_grid = [round(0.02 * i, 10) for i in range(1, 71)]
    records: list[dict] = []
    started = time.perf_counter()

    for structure, base, sign in (
        ("orthogonal", base_orth, sign_orth),
        ("tridiagonal", base_tri, sign_tri),
        ("jordan", None, sign_jordan),
    ):
        for t in t_grid:
            if structure == "jordan":
                x_t = scipy.linalg.block_diag(
                    *[jordan_block(t * l, block) for l in lam_blocks]
                ).astype(np.complex128)
            else:
                x_t = t * base
            f_m, mean_m = _square_wave_sums(x_t, m)
            records.append(
                {
                    "structure": structure,
                    "t": float(t),
                    "norm_fourier": _finite_or_inf(spectral_norm(f_m)),
                    "norm_cesaro": _finite_or_inf(spectral_norm(mean_m)),
                    "norm_sign": _finite_or_inf(spectral_norm(sign)),
                    "err_fourier": _finite_or_inf(spectral_norm(f_m - sign)),
                    "err_cesaro": _finite_or_inf(spectral_norm(mean_m - sign)),
                    "time_s": _clock(spec, started),
                }
            )
    return records


# ---------------------------------------------------------------------------
# Experiment: extending the geometric series beyond the unit disc


def _euler_transformed_geometric_terms(x: np.ndarray, rho: float, count: int) -> list[np.ndarray]:
    """Transformed terms (1+rho)^(-k-1) (rho I + X)^k, built by one product per term."""
    d = x.shape[0]
    step = (rho * identity(d) + x) / (1.0 + rho)
    term = identity(d) / (1.0 + rho)
    out = []
    for _ in range(count):
        out.append(term)
        term = term @ step
    return out


def run_neumann_extension(spec: ExperimentSpec) -> list[dict]:
    """Forward/backward errors of Euler (two evaluation paths) and the Borel integral."""
    d = spec.dim or 50
    count = spec.matrices or 10
    n_terms = spec.terms or 1000
    rho = spec.rho
    rng = spec.rng()
    quad = QuadratureSpec(upper=40.0, tail_tol=1e-10)
    records: list[dict] = []
    eye = identity(d)

    def run_one(index: int, x: np.ndarray) -> None:
        i_minus = eye - x
        started = time.perf_counter()
        s_inv = np.linalg.solve(i_minus, eye)
        records.append(
            {
                "matrix_index": index,
                "method": "inv",
                "forward_error": 0.0,
                "backward_error": _finite_or_inf(spectral_norm(s_inv @ i_minus - eye)),
                "time_s": _clock(spec, started),
            }
        )

        started = time.perf_counter()
        terms = _euler_transformed_geometric_terms(x, rho, n_terms + 1)
        s_euler = compensated_sum(TermStream.from_list(terms))
        tail = spectral_norm(terms[-1])
        diverged = not tail <= 1e-8 * (1.0 + spectral_norm(s_euler))
        records.append(
            {
                "matrix_index": index,
                "method": "euler-kahan",
                "forward_error": math.inf if diverged else _finite_or_inf(spectral_norm(s_euler - s_inv)),
                "backward_error": math.inf if diverged else _finite_or_inf(spectral_norm(s_euler @ i_minus - eye)),
                "time_s": _clock(spec, started),
            }
        )

        started = time.perf_counter()
        try:
            s_parlett = schur_parlett_with_summation(x, n_terms, neumann_coeffs, euler_weights(rho))
            fwd = _finite_or_inf(spectral_norm(s_parlett - s_inv))
            bwd = _finite_or_inf(spectral_norm(s_parlett @ i_minus - eye))
            if diverged:
                fwd = bwd = math.inf
        except (DivergentIntegralError, NumericalFailureError, OverflowError):
            fwd = bwd = math.inf
        records.append(
            {
                "matrix_index": index,
                "method": "euler-parlett",
                "forward_error": fwd,
                "backward_error": bwd,
                "time_s": _clock(spec, started),
            }
        )

        started = time.perf_counter()
        try:
            report = borel_type_integral(lambda xx: mat_exp(xx * x), quad, "sborel", d)
            if report.converged:
                fwd = _finite_or_inf(spectral_norm(report.value - s_inv))
                bwd = _finite_or_inf(spectral_norm(report.value @ i_minus - eye))
            else:
                fwd = bwd = math.inf
        except (DivergentIntegralError, OverflowError):
            fwd = bwd = math.inf
        records.append(
            {
                "matrix_index": index,
                "method": "sborel",
                "forward_error": fwd,
                "backward_error": bwd,
                "time_s": _clock(spec, started),
            }
        )

    for idx in range(count):
        # Eigenvalues keep Re < 1 and sit well inside |z + rho| < 1 + rho, with
        # moduli routinely above 1 so the plain geometric series diverges.
        # Moduli stay below 1.9: the blocked evaluation tabulates n-th powers,
        # which must remain representable.
        eigs = rng.uniform(-1.5, -0.7, size=d) + 1j * rng.uniform(-1.0, 1.0, size=d)
        qmat, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        x = qmat @ np.diag(eigs) @ qmat.conj().T
        run_one(idx, as_cmatrix(x))

    # Control: an eigenvalue pinned at 1 defeats both methods.
    eigs = rng.uniform(-1.5, -0.7, size=d) + 1j * rng.uniform(-1.0, 1.0, size=d)
    eigs[0] = 1.0
    qmat, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    x = as_cmatrix(qmat @ np.diag(eigs) @ qmat.conj().T)
    i_minus = eye - x
    started = time.perf_counter()
    terms = _euler_transformed_geometric_terms(x, rho, n_terms + 1)
    s_euler = compensated_sum(TermStream.from_list(terms))
    tail = spectral_norm(terms[-1])
    diverged = not tail <= 1e-8 * (1.0 + spectral_norm(s_euler))
    records.append(
        {
            "matrix_index": count,
            "method": "euler-kahan",
            "forward_error": math.inf if diverged else spectral_norm(s_euler - np.linalg.solve(i_minus, eye)),
            "backward_error": math.inf if diverged else spectral_norm(s_euler @ i_minus - eye),
            "time_s": _clock(spec, started),
        }
    )
    started = time.perf_counter()
    try:
        report = borel_type_integral(lambda xx: mat_exp(xx * x), quad, "sborel", d)
        fwd = math.inf if not report.converged else spectral_norm(report.value @ i_minus - eye)
        bwd = fwd
    except (DivergentIntegralError, OverflowError):
        fwd = bwd = math.inf
    records.append(
        {
            "matrix_index": count,
            "method": "sborel",
            "forward_error": fwd,
            "backward_error": bwd,
            "time_s": _clock(spec, started),
        }
    )
    return records


# ---------------------------------------------------------------------------
# Experiment: truncation accuracy of Euler transforms on bidiagonal spectra


def run_euler_accuracy(spec: ExperimentSpec) -> list[dict]:
    """Mean log10 forward error against the back-substitution closed form."""
    d = spec.dim or 100
    n_terms = spec.terms or 100
    trials = spec.matrices or 20
    alphas = spec.alpha_grid or tuple(round(0.1 * i, 10) for i in range(11))
    rhos = (1.0, 0.5, 0.25)
    rng = spec.rng()
    eye = identity(d)
    records: list[dict] = []
    started = time.perf_counter()
    for alpha in alphas:
        logs: dict[str, list[float]] = {"taylor": []}
        for rho in rhos:
            logs[f"euler:{rho}"] = []
        for _ in range(trials):
            x = gen_bidiagonal(d, alpha, rng)
            exact = scipy.linalg.solve_triangular(eye - x, eye)
            terms = []
            p = eye.copy()
            for _ in range(n_terms + 1):
                terms.append(p)
                p = p @ x
            s_taylor = compensated_sum(TermStream.from_list(terms))
            logs["taylor"].append(math.log10(max(spectral_norm(s_taylor - exact), 1e-300)))
            for rho in rhos:
                tr = _euler_transformed_geometric_terms(x, rho, n_terms + 1)
                s_rho = compensated_sum(TermStream.from_list(tr))
                logs[f"euler:{rho}"].append(math.log10(max(spectral_norm(s_rho - exact), 1e-300)))
        for method in ("taylor", "euler:1.0", "euler:0.5", "euler:0.25"):
            records.append(
                {
                    "alpha": float(alpha),
                    "method": method,
                    "mean_log10_forward_error": float(np.mean(logs[method])),
                    "time_s": _clock(spec, started),
                }
            )
    return records


# ---------------------------------------------------------------------------
# Experiment: Moebius-weighted Dirichlet series under the Lambert kernel


def _lambert_weights(ns: np.ndarray, x: float) -> np.ndarray:
    lx = math.log1p(x - 1.0)
    klx = ns * lx
    return (1.0 - x) * ns * np.exp(klx) / (-np.expm1(klx))


def run_dirichlet_lambert(spec: ExperimentSpec) -> list[dict]:
    """Lambert-kernel norms of mu(n) n^(-X) sums as the kernel parameter walks to 1."""
    d = spec.dim or 10
    n_terms = spec.terms or 10_000
    deltas = spec.delta_grid or tuple(2.0**-e for e in range(2, 8))
    ms = list(range(spec.m_lo, spec.m_hi + 1))
    rng = spec.rng()
    sieve = get_sieve(max(100_000, n_terms))
    records: list[dict] = []
    started = time.perf_counter()

    # Scalar control: coefficients mu(n)/n, truncation 1e5.
    ns = np.arange(1, 100_001, dtype=np.float64)
    mu = sieve.values(100_000).astype(np.float64)
    scalar_m = 12
    x = 1.0 - 2.0**-scalar_m
    w = _lambert_weights(ns, x)
    value = float(np.sum(w * mu / ns))
    records.append(
        {
            "delta": "scalar",
            "m": scalar_m,
            "x": x,
            "value_norm": _finite_or_inf(abs(value)),
            "time_s": _clock(spec, started),
        }
    )

    mu_small = sieve.values(n_terms)
    nz = np.nonzero(mu_small)[0] + 1  # indices n with mu(n) != 0
    for delta in deltas:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        w0 = g @ g.conj().T + 1j * 0.5 * (b + b.conj().T)
        w0 = w0 / spectral_norm(w0)
        x_mat = identity(d) + delta * w0

        form = schur(x_mat)
        q, r, qh = form.q, form.r, form.q.conj().T
        stack = np.empty((nz.size, d, d), dtype=np.complex128)
        for i, n in enumerate(nz):
            if n == 1:
                stack[i] = identity(d)
            else:
                stack[i] = q @ mat_exp(-math.log(float(n)) * r) @ qh
        mu_nz = mu_small[nz - 1].astype(np.float64)

        for m in ms:
            xval = 1.0 - 2.0**-m
            weights = _lambert_weights(nz.astype(np.float64), xval) * mu_nz
            s = np.tensordot(weights, stack, axes=1)
            records.append(
                {
                    "delta": repr(float(delta)),
                    "m": m,
                    "x": xval,
                    "value_norm": _finite_or_inf(spectral_norm(s)),
                    "time_s": _clock(spec, started),
                }
            )
    return records


# ---------------------------------------------------------------------------
# Experiment: recursive vs compensated kernels against closed forms


def run_floatsum_bench(spec: ExperimentSpec) -> list[dict]:
    """Forward errors of the two kernels over a dimension sweep and a length sweep."""
    rng = spec.rng()
    records: list[dict] = []
    started = time.perf_counter()

    dims = (1, 25, 50, 100, 200) if spec.dim == 0 else (spec.dim,)
    n_fixed = spec.terms or 1000
    for d in dims:
        x = rng.uniform(0.0, 1.0, size=(d, d)).astype(np.complex128)
        radius = max(abs(np.linalg.eigvals(x)).max(), 1e-6)
        x = 0.5 * x / radius
        exact = neumann_closed_form(x, n_fixed)
        terms = []
        p = identity(d)
        for _ in range(n_fixed):
            terms.append(p)
            p = p @ x
        stream = TermStream.from_list(terms)
        for kernel, fn in (("recursive", recursive_sum), ("kahan", compensated_sum)):
            err = float(np.linalg.norm(fn(stream) - exact))
            records.append(
                {
                    "sweep": "dim",
                    "size": d,
                    "kernel": kernel,
                    "forward_error": _finite_or_inf(err),
                    "time_s": _clock(spec, started),
                }
            )

    d_fixed = 100
    lengths = (100, 500, 1000, 2500, 5000)
    x = rng.uniform(0.0, 1.0, size=(d_fixed, d_fixed)).astype(np.complex128)
    terms = []
    p = np.ones((d_fixed, d_fixed), dtype=np.complex128)
    for _ in range(max(lengths)):
        terms.append(p)
        p = p * x
    for n in lengths:
        exact = hadamard_closed_form(x, n)
        stream = TermStream.from_list(terms[:n])
        for kernel, fn in (("recursive", recursive_sum), ("kahan", compensated_sum)):
            err = float(np.linalg.norm(fn(stream) - exact))
            records.append(
                {
                    "sweep": "terms",
                    "size": n,
                    "kernel": kernel,
                    "forward_error": _finite_or_inf(err),
                    "time_s": _clock(spec, started),
                }
            )
    return records


RUNNERS = {
    "gibbs": run_gibbs,
    "neumann": run_neumann_extension,
    "euler": run_euler_accuracy,
    "lambert": run_dirichlet_lambert,
    "floatsum": run_floatsum_bench,
}


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    if spec.experiment not in RUNNERS:
        raise InvalidInputError(f"unknown experiment {spec.experiment!r}; choose from {sorted(RUNNERS)}")
    return RUNNERS[spec.experiment](spec)
