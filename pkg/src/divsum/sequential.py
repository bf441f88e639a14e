"""Sequential summation: Norlund means with matrix weights, Cesaro, Euler transforms.

Includes the numerical diagnostic for the three regularity conditions of a
sequential weight table (bounded row norms, vanishing columns, rows summing to
the identity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.special

from .errors import InvalidInputError, InvalidWeightsError
from .floatsum import TermStream, compensated_sum, parse_kernel, recursive_sum
from .linalg import as_cmatrix, identity, is_positive_definite, spectral_norm
from .series import MatrixSeries


@dataclass(frozen=True)
class SumReport:
    """Computed sum plus bookkeeping on how it was reached."""

    value: np.ndarray
    terms_used: int
    converged: bool
    last_increment_norm: float
    method: str


@dataclass(frozen=True)
class NorlundWeights:
    """Positive definite weight sequence P_0, P_1, ... for reversed-weight averaging."""

    weight_at: Callable[[int], np.ndarray]
    dim: int


@dataclass(frozen=True)
class SeqWeights:
    """Triangular weight table C_{n,k} (zero for k > n), scalar or matrix valued."""

    tag: str
    dim: int = 1
    c_at: Callable[[int, int], complex] | None = None
    C_at: Callable[[int, int], np.ndarray] | None = None

    def weight_matrix(self, n: int, k: int, dim: int) -> np.ndarray:
        if k > n:
            return np.zeros((dim, dim), dtype=np.complex128)
        if self.c_at is not None:
            return complex(self.c_at(n, k)) * identity(dim)
        assert self.C_at is not None
        return self.C_at(n, k)


@dataclass(frozen=True)
class RegularityDiagnostics:
    """Windowed numeric evidence for the three regularity conditions (advisory)."""

    row_sums_bounded: bool
    row_sum_max: float
    columns_vanish: bool
    column_tail_max: float
    row_sum_to_identity: bool
    identity_deficit: float


def prefix_sums_from_zero(series: MatrixSeries, n: int) -> list[np.ndarray]:
    """S_0..S_n with S_k = sum of terms up to index k (empty prefixes are zero)."""
    d = series.dim
    s = np.zeros((d, d), dtype=np.complex128)
    out = []
    it = series.iter_terms()
    for k in range(n + 1):
        if k >= series.start_index:
            s = s + next(it)
        out.append(s)
    return out


def norlund_transform(series: MatrixSeries, w: NorlundWeights, n: int) -> np.ndarray:
    """n-th reversed-weight mean (P_0+...+P_n)^(-1) (P_n S_0 + ... + P_0 S_n)."""
    if w.dim != series.dim:
        raise InvalidInputError(f"weight dim {w.dim} != series dim {series.dim}")
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    weights = []
    for k in range(n + 1):
        p = as_cmatrix(w.weight_at(k), name=f"P_{k}")
        if not is_positive_definite(p):
            raise InvalidWeightsError(f"weight P_{k} is not positive definite")
        weights.append(p)
    sums = prefix_sums_from_zero(series, n)
    total = weights[0].copy()
    for p in weights[1:]:
        total = total + p
    numer = weights[n] @ sums[0]
    for k in range(1, n + 1):
        numer = numer + weights[n - k] @ sums[k]
    return np.linalg.solve(total, numer)


def norlund_condition_check(w: NorlundWeights, big_k: int) -> tuple[list[float], bool]:
    """Monitored decay sequence r_k = ||(P_0+...+P_k)^(-1)|| * ||P_k||.

    Returns the sequence for k = 0..big_k and a warning flag raised when the
    tail is not heading to zero.  Admissible weight families decay at least
    like 1/k (ratio ~0.5 per doubling), so the flag trips when
    r_K > 0.75 r_{K/2}; stalled sequences such as geometric weights
    (r_k -> 1/2) exceed that while 1/k and faster decay stay under it.
    """
    if big_k < 1:
        raise InvalidInputError("need at least two points")
    ratios = []
    total = None
    for k in range(big_k + 1):
        p = as_cmatrix(w.weight_at(k), name=f"P_{k}")
        total = p.copy() if total is None else total + p
        smin = float(np.linalg.svd(total, compute_uv=False)[-1])
        inv_norm = math.inf if smin == 0.0 else 1.0 / smin
        ratios.append(inv_norm * spectral_norm(p))
    flagged = ratios[big_k] > 0.75 * ratios[big_k // 2]
    return ratios, flagged


def cesaro_weights(j: int, dim: int) -> NorlundWeights:
    """Order-j averaging weights P_k = binom(k+j-1, j-1) I.

    j = 0 degenerates to conventional summation (only P_0 nonzero); use the
    higher-level dispatch, not ``norlund_transform``, for that case.
    """
    if j < 0:
        raise InvalidInputError("order must be nonnegative")

    def weight_at(k: int) -> np.ndarray:
        if j == 0:
            c = 1.0 if k == 0 else 0.0
        else:
            c = float(math.comb(k + j - 1, j - 1))
        return c * identity(dim)

    return NorlundWeights(weight_at=weight_at, dim=dim)


def cesaro_sum(series: MatrixSeries, n: int, tol: float) -> SumReport:
    """Mean of the first n partial sums, with a two-scale stagnation check.

    The mean at n is compared against the means at floor(n/2) and
    floor(n/2) + 1; requiring both guards against period-two oscillations that
    a single halved checkpoint cannot see.
    """
    if n < 2:
        raise InvalidInputError("need n >= 2 partial sums to average")
    d = series.dim
    s = np.zeros((d, d), dtype=np.complex128)
    acc = np.zeros((d, d), dtype=np.complex128)
    half = n // 2
    mean_half = None
    mean_half1 = None
    it = series.iter_terms()
    for k in range(n):
        if k >= series.start_index:
            s = s + next(it)
        acc = acc + s
        if k + 1 == half:
            mean_half = acc / half
        if k + 1 == half + 1:
            mean_half1 = acc / (half + 1)
    mean = acc / n
    scale = tol * (1.0 + spectral_norm(mean))
    d1 = spectral_norm(mean - mean_half)
    d2 = spectral_norm(mean - mean_half1)
    return SumReport(
        value=mean,
        terms_used=n,
        converged=bool(d1 <= scale and d2 <= scale),
        last_increment_norm=max(d1, d2),
        method="cesaro",
    )


# ---------------------------------------------------------------------------
# Euler transforms


def _is_scalar_multiple_of_identity(p: np.ndarray) -> float | None:
    d = p.shape[0]
    diag = np.diag(p)
    if np.all(p == diag[0] * np.eye(d)) and diag[0].imag == 0.0:
        return float(diag[0].real)
    return None


def euler_row_coefficients(rho: float, n: int) -> np.ndarray:
    """Transform weights binom(n,k) rho^(n-k) (1+rho)^(-n-1), k = 0..n, in log space."""
    if rho <= 0:
        raise InvalidWeightsError("Euler parameter must be positive")
    k = np.arange(n + 1)
    logs = (
        math.lgamma(n + 1)
        - scipy.special.gammaln(k + 1)
        - scipy.special.gammaln(n - k + 1)
        + (n - k) * math.log(rho)
        - (n + 1) * math.log1p(rho)
    )
    return np.exp(logs)


def _materialize_terms(series: MatrixSeries, n: int) -> list[np.ndarray]:
    """A_0..A_n, substituting zeros below the series start index."""
    d = series.dim
    zero = np.zeros((d, d), dtype=np.complex128)
    out = [zero] * min(series.start_index, n + 1)
    it = series.iter_terms()
    while len(out) <= n:
        out.append(next(it))
    return out


def _euler_transforms_upto(terms: list[np.ndarray], p, n: int, dim: int) -> list[np.ndarray]:
    """E_0..E_n via accumulated binomial averaging.

    Each pass replaces the working stack v_k by (P v_k + v_{k+1}) (I+P)^(-1),
    which keeps every intermediate a weighted average of neighbouring entries;
    the direct weight-row evaluation loses digits catastrophically once terms
    grow, while this recurrence stays accurate term by term.
    """
    if np.isscalar(p):
        rho = float(p)
        if rho <= 0:
            raise InvalidWeightsError("Euler parameter must be positive")
        v = np.stack(terms[: n + 1])
        scale = 1.0 / (1.0 + rho)
        out = [scale * v[0]]
        for _ in range(n):
            v = scale * (rho * v[:-1] + v[1:])
            out.append(scale * v[0])
        return out
    pm = as_cmatrix(p, name="P")
    if pm.shape[0] != dim:
        raise InvalidInputError("Euler parameter dimension mismatch")
    if not is_positive_definite(pm):
        raise InvalidWeightsError("Euler parameter must be positive definite")
    rho = _is_scalar_multiple_of_identity(pm)
    if rho is not None:
        return _euler_transforms_upto(terms, rho, n, dim)
    lu = scipy.linalg.lu_factor(identity(dim) + pm)

    def solve_batch(w: np.ndarray) -> np.ndarray:
        flat = w.transpose(1, 0, 2).reshape(dim, -1)
        solved = scipy.linalg.lu_solve(lu, flat)
        return solved.reshape(dim, -1, dim).transpose(1, 0, 2)

    v = np.stack(terms[: n + 1])
    out = [scipy.linalg.lu_solve(lu, v[0])]
    for _ in range(n):
        v = solve_batch(np.einsum("ij,kjl->kil", pm, v[:-1]) + v[1:])
        out.append(scipy.linalg.lu_solve(lu, v[0]))
    return out


def euler_transform_term(series: MatrixSeries, p, n: int) -> np.ndarray:
    """n-th Euler-transformed term sum_k binom(n,k) (I+P)^(-n-1) P^(n-k) A_k."""
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    terms = _materialize_terms(series, n)
    return _euler_transforms_upto(terms, p, n, series.dim)[n]


def euler_sum(series: MatrixSeries, p, n: int, tol: float, kernel: str = "recursive") -> SumReport:
    """Partial sum of the Euler-transformed terms E_0..E_n with the chosen kernel."""
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    terms = _materialize_terms(series, n)
    transformed = _euler_transforms_upto(terms, p, n, series.dim)
    stream = TermStream.from_list(transformed)
    if kernel == "recursive":
        value = recursive_sum(stream)
    elif kernel == "kahan":
        value = compensated_sum(stream)
    else:
        value = parse_kernel(kernel)(stream)
    last = spectral_norm(transformed[-1])
    return SumReport(
        value=value,
        terms_used=n + 1,
        converged=bool(last <= tol * (1.0 + spectral_norm(value))),
        last_increment_norm=last,
        method="euler",
    )


# ---------------------------------------------------------------------------
# Weight-table constructors and the regularity diagnostic


def conventional_seq_weights() -> SeqWeights:
    return SeqWeights(tag="conventional", c_at=lambda n, k: 1.0 if k == n else 0.0)


def cesaro_seq_weights() -> SeqWeights:
    """Rows of the partial-sum average: c_{n,k} = 1/n for k <= n-1 (row 0 is conventional)."""

    def c_at(n: int, k: int) -> complex:
        if n == 0:
            return 1.0 if k == 0 else 0.0
        return 1.0 / n if k <= n - 1 else 0.0

    return SeqWeights(tag="cesaro", c_at=c_at)


def euler_seq_weights(rho: float) -> SeqWeights:
    """Partial-sum weights binom(n+1,k+1) rho^(n-k) (1+rho)^(-n-1)."""
    if rho <= 0:
        raise InvalidWeightsError("Euler parameter must be positive")

    def c_at(n: int, k: int) -> complex:
        if k > n:
            return 0.0
        lg = (
            math.lgamma(n + 2)
            - math.lgamma(k + 2)
            - math.lgamma(n - k + 1)
            + (n - k) * math.log(rho)
            - (n + 1) * math.log1p(rho)
        )
        return math.exp(lg)

    return SeqWeights(tag=f"euler:{rho}", c_at=c_at)


def euler_seq_weights_matrix(p) -> SeqWeights:
    """Matrix-valued partial-sum weights binom(n+1,k+1) P^(n-k) (I+P)^(-n-1)."""
    pm = as_cmatrix(p, name="P")
    if not is_positive_definite(pm):
        raise InvalidWeightsError("Euler parameter must be positive definite")
    d = pm.shape[0]
    eye = identity(d)

    def C_at(n: int, k: int) -> np.ndarray:
        if k > n:
            return np.zeros((d, d), dtype=np.complex128)
        coef = math.comb(n + 1, k + 1)
        power = np.linalg.matrix_power(pm, n - k)
        denom = np.linalg.matrix_power(eye + pm, n + 1)
        return coef * np.linalg.solve(denom, power)

    return SeqWeights(tag="euler-matrix", dim=d, C_at=C_at)


def norlund_seq_weights(w: NorlundWeights) -> SeqWeights:
    """Weight table of a reversed-weight mean: C_{n,k} = (P_0+...+P_n)^(-1) P_{n-k}."""

    def C_at(n: int, k: int) -> np.ndarray:
        if k > n:
            return np.zeros((w.dim, w.dim), dtype=np.complex128)
        total = w.weight_at(0).astype(np.complex128)
        for i in range(1, n + 1):
            total = total + w.weight_at(i)
        return np.linalg.solve(total, as_cmatrix(w.weight_at(n - k)))

    return SeqWeights(tag="norlund", dim=w.dim, C_at=C_at)


def check_regularity_conditions(w: SeqWeights, n_max: int, k_max: int) -> RegularityDiagnostics:
    """Windowed check of the three regularity conditions of a weight table.

    Purely advisory: finite windows cannot prove limits, so the booleans encode
    decay heuristics (second-half maxima against first-half maxima for row
    sums; a 0.9 shrinking factor for columns and the identity deficit).
    """
    if n_max < 2 or k_max < 0:
        raise InvalidInputError("window too small")
    dim = w.dim

    def row_norm_sum(n: int) -> float:
        return sum(spectral_norm(w.weight_matrix(n, k, dim)) for k in range(min(n, k_max) + 1))

    row_sums = [row_norm_sum(n) for n in range(n_max + 1)]
    row_sum_max = max(row_sums)
    first_half_max = max(row_sums[: n_max // 2 + 1])
    second_half_max = max(row_sums[n_max // 2 :])
    bounded = second_half_max <= 1.05 * first_half_max + 1e-12

    half = n_max // 2
    column_span = min(k_max, n_max // 4)
    tails = []
    vanish = True
    for k in range(column_span + 1):
        tail = spectral_norm(w.weight_matrix(n_max, k, dim))
        head = spectral_norm(w.weight_matrix(half, k, dim))
        tails.append(tail)
        if tail > max(0.9 * head, 1e-12):
            vanish = False
    column_tail_max = max(tails) if tails else 0.0

    def identity_deficit(n: int) -> float:
        total = np.zeros((dim, dim), dtype=np.complex128)
        for k in range(min(n, k_max) + 1):
            total = total + w.weight_matrix(n, k, dim)
        return spectral_norm(total - identity(dim))

    deficit_last = identity_deficit(n_max)
    deficit_half = identity_deficit(half)
    to_identity = deficit_last <= max(0.9 * deficit_half, 1e-10)

    return RegularityDiagnostics(
        row_sums_bounded=bool(bounded),
        row_sum_max=float(row_sum_max),
        columns_vanish=bool(vanish),
        column_tail_max=float(column_tail_max),
        row_sum_to_identity=bool(to_identity),
        identity_deficit=float(deficit_last),
    )
