"""Power-series summation through rational approximants and triangular block recurrences.

A scalar sequential weight table c_{n,k} turns a truncated power series
sum_k a_k X^k into the damped polynomial sum_j h_j X^j with
h_j = a_j * (c_{n,j} + ... + c_{n,n}); the identity
sum_j h_j x^j = sum_k c_{n,k} (a_0 + ... + a_k x^k) holds exactly as
polynomials and is enforced by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.special

from .errors import DegeneratePadeError, InvalidInputError, PoleError
from .floatsum import horner_matrix_poly
from .linalg import as_cmatrix, identity, spectral_norm
from .schur import reorder_schur, schur, sylvester_solve

CoeffOracle = Callable[[int], complex]


@dataclass(frozen=True)
class ScalarSeqWeights:
    """Scalar weight table c_{n,k}, zero above the diagonal k > n."""

    tag: str
    c_at: Callable[[int, int], complex]
    #: Set for Euler tables; enables the numerically stable block evaluation.
    euler_rho: float | None = None
    #: Optional vectorized whole-row constructor (needed for very long rows).
    row_fn: Callable[[int], np.ndarray] | None = None

    def row(self, n: int) -> np.ndarray:
        if self.row_fn is not None:
            return self.row_fn(n)
        return np.array([complex(self.c_at(n, k)) for k in range(n + 1)], dtype=np.complex128)


def conventional_weights() -> ScalarSeqWeights:
    def row_fn(n: int) -> np.ndarray:
        row = np.zeros(n + 1, dtype=np.complex128)
        row[n] = 1.0
        return row

    return ScalarSeqWeights(tag="conventional", c_at=lambda n, k: 1.0 if k == n else 0.0, row_fn=row_fn)


def cesaro_weights() -> ScalarSeqWeights:
    """Partial-sum averaging rows: c_{n,k} = 1/n for k <= n-1 (row 0 conventional)."""

    def c_at(n: int, k: int) -> complex:
        if n == 0:
            return 1.0 if k == 0 else 0.0
        return 1.0 / n if k <= n - 1 else 0.0

    def row_fn(n: int) -> np.ndarray:
        if n == 0:
            return np.ones(1, dtype=np.complex128)
        row = np.full(n + 1, 1.0 / n, dtype=np.complex128)
        row[n] = 0.0
        return row

    return ScalarSeqWeights(tag="cesaro", c_at=c_at, row_fn=row_fn)


def euler_weights(rho: float) -> ScalarSeqWeights:
    """Euler partial-sum rows binom(n+1,k+1) rho^(n-k) (1+rho)^(-n-1)."""
    if rho <= 0:
        raise InvalidInputError("Euler parameter must be positive")

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

    def row_fn(n: int) -> np.ndarray:
        k = np.arange(n + 1, dtype=np.float64)
        logs = (
            math.lgamma(n + 2)
            - scipy.special.gammaln(k + 2)
            - scipy.special.gammaln(n - k + 1)
            + (n - k) * math.log(rho)
            - (n + 1) * math.log1p(rho)
        )
        return np.exp(logs).astype(np.complex128)

    return ScalarSeqWeights(tag=f"euler:{rho}", c_at=c_at, euler_rho=float(rho), row_fn=row_fn)


def weights_b(c: ScalarSeqWeights, n: int) -> np.ndarray:
    """Suffix sums b_{n,j} = c_{n,j} + ... + c_{n,n} for j = 0..n."""
    if n < 0:
        raise InvalidInputError("row index must be nonnegative")
    row = c.row(n)
    return np.cumsum(row[::-1])[::-1]


def transformed_coeffs(a: CoeffOracle | Sequence[complex], c: ScalarSeqWeights, n: int) -> np.ndarray:
    """Damped polynomial coefficients h_j = a_j b_{n,j}, j = 0..n."""
    b = weights_b(c, n)
    if isinstance(a, np.ndarray):
        if a.size < n + 1:
            raise InvalidInputError(f"need {n + 1} coefficients, got {a.size}")
        return a[: n + 1].astype(np.complex128) * b
    if a is neumann_coeffs:
        return b.copy()
    oracle = _as_oracle(a)
    return np.array([complex(oracle(j)) * b[j] for j in range(n + 1)], dtype=np.complex128)


def _as_oracle(a) -> CoeffOracle:
    if callable(a):
        return a
    seq = [complex(v) for v in a]
    return lambda k: seq[k]


def exp_coeffs(k: int) -> complex:
    return math.exp(-math.lgamma(k + 1))


def neumann_coeffs(k: int) -> complex:
    return 1.0


# ---------------------------------------------------------------------------
# Rational approximation


@dataclass(frozen=True)
class PadeApproximant:
    """Numerator/denominator coefficients of a [m/n] rational approximant; gamma_0 = 1."""

    beta: np.ndarray
    gamma: np.ndarray
    m: int
    n: int


def _solve_partial_pivot(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting and an explicit singularity gate."""
    m = a.astype(np.complex128).copy()
    b = rhs.astype(np.complex128).copy()
    size = m.shape[0]
    pivot_floor = 1e-12 * float(np.max(np.abs(m), initial=0.0))
    for col in range(size):
        pivot_row = col + int(np.argmax(np.abs(m[col:, col])))
        pivot = m[pivot_row, col]
        if abs(pivot) <= pivot_floor:
            raise DegeneratePadeError(f"coefficient system singular at column {col} (pivot {abs(pivot):.3e})")
        if pivot_row != col:
            m[[col, pivot_row]] = m[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        for row in range(col + 1, size):
            factor = m[row, col] / pivot
            m[row, col:] -= factor * m[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(size, dtype=np.complex128)
    for row in range(size - 1, -1, -1):
        x[row] = (b[row] - m[row, row + 1 :] @ x[row + 1 :]) / m[row, row]
    return x


def pade_approximant(m: int, n: int, a: CoeffOracle | Sequence[complex], c: ScalarSeqWeights) -> PadeApproximant:
    """Coefficients of the [m/n] approximant of the weighted truncation of order m+n.

    Solves beta_k = h_k + sum_{j<k} h_j gamma_{k-j} for k = 0..m+n with
    beta_k = 0 above the numerator order and gamma_0 = 1.
    """
    if m < 0 or n < 0:
        raise InvalidInputError("orders must be nonnegative")
    total = m + n
    h = transformed_coeffs(a, c, total)
    if n == 0:
        return PadeApproximant(beta=h.copy(), gamma=np.array([1.0 + 0j]), m=m, n=n)
    size = total + 1
    sys = np.zeros((size, size), dtype=np.complex128)
    rhs = np.zeros(size, dtype=np.complex128)
    # Unknown layout: beta_0..beta_m, gamma_1..gamma_n.
    for k in range(size):
        if k <= m:
            sys[k, k] = 1.0
        for g in range(max(1, k - total), min(n, k) + 1):
            sys[k, m + g] -= h[k - g]
        rhs[k] = h[k]
    sol = _solve_partial_pivot(sys, rhs)
    beta = sol[: m + 1]
    gamma = np.concatenate([np.array([1.0 + 0j]), sol[m + 1 :]])
    return PadeApproximant(beta=beta, gamma=gamma, m=m, n=n)


def pade_with_summation(
    x,
    m: int,
    n: int,
    a: CoeffOracle | Sequence[complex],
    c: ScalarSeqWeights,
) -> np.ndarray:
    """Evaluate the weighted [m/n] approximant at X: P(X) Q(X)^(-1) via a right solve."""
    xm = as_cmatrix(x, name="X")
    approx = pade_approximant(m, n, a, c)
    p = horner_matrix_poly(approx.beta, xm)
    q = horner_matrix_poly(approx.gamma, xm)
    svals = np.linalg.svd(q, compute_uv=False)
    if svals[-1] <= 1e-14 * max(svals[0], 1.0):
        raise PoleError(f"denominator is singular at X (smallest singular value {svals[-1]:.3e})")
    return np.linalg.solve(q.T, p.T).T


# ---------------------------------------------------------------------------
# Eigenvalue clustering and the block recurrence


@dataclass(frozen=True)
class BlockPattern:
    """Connected-component clustering of a spectrum at chaining distance delta."""

    sizes: tuple[int, ...]
    eigenvalues: tuple[tuple[complex, ...], ...]
    separation: float
    assignment: tuple[int, ...]


def eigen_cluster(eigs: Sequence[complex], delta: float) -> BlockPattern:
    """Group eigenvalues into connected components of the distance-<=delta graph.

    Chaining is transitive, so within-cluster neighbours sit within delta of
    each other while distinct clusters are separated by more than delta.
    Clusters are numbered by first appearance.
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    vals = [complex(v) for v in eigs]
    d = len(vals)
    parent = list(range(d))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            if abs(vals[i] - vals[j]) <= delta:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    label_of_root: dict[int, int] = {}
    assignment = []
    for i in range(d):
        r = find(i)
        if r not in label_of_root:
            label_of_root[r] = len(label_of_root)
        assignment.append(label_of_root[r])
    nclusters = len(label_of_root)
    member_lists: list[list[complex]] = [[] for _ in range(nclusters)]
    for i, lab in enumerate(assignment):
        member_lists[lab].append(vals[i])
    return BlockPattern(
        sizes=tuple(len(g) for g in member_lists),
        eigenvalues=tuple(tuple(g) for g in member_lists),
        separation=float(delta),
        assignment=tuple(assignment),
    )


def default_cluster_delta(x: np.ndarray) -> float:
    """Blocking threshold 0.1 ||X|| / d, floored away from zero."""
    d = x.shape[0]
    return max(0.1 * spectral_norm(x) / max(d, 1), 1e-12)


def _euler_stable_poly(r_block: np.ndarray, a: CoeffOracle, n: int, rho: float) -> np.ndarray:
    """sum_j h_j R^j for Euler weights, via accumulated binomial averaging.

    The damped polynomial equals the sum of the first n+1 Euler-transformed
    terms of sum_k a_k R^k; evaluating it that way keeps every intermediate a
    convex-like average and avoids the catastrophic cancellation the plain
    damped-coefficient recursion suffers once ||R|| exceeds 1.
    """
    s = r_block.shape[0]
    stack = np.empty((n + 1, s, s), dtype=np.complex128)
    p = identity(s)
    for k in range(n + 1):
        stack[k] = complex(a(k)) * p
        if k < n:
            p = p @ r_block
    if not np.all(np.isfinite(stack.view(np.float64))):
        raise OverflowError(
            "tabulated block powers overflowed; reduce the truncation order or the spectral radius"
        )
    scale = 1.0 / (1.0 + rho)
    acc = scale * stack[0]
    v = stack
    for _ in range(n):
        v = scale * (rho * v[:-1] + v[1:])
        acc = acc + scale * v[0]
    return acc


def weighted_power_sum(x, h: np.ndarray) -> np.ndarray:
    """Evaluate sum_j h_j X^j for a (possibly very long) coefficient vector.

    Uses baby-step/giant-step splitting: X^0..X^(s-1) are tabulated once and
    each giant Horner step consumes s coefficients at the cost of one matrix
    product, so million-term damped truncations stay tractable.
    """
    xm = as_cmatrix(x, name="X")
    coeffs = np.asarray(h, dtype=np.complex128)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise InvalidInputError("need a nonempty coefficient vector")
    length = coeffs.size
    d = xm.shape[0]
    s = min(max(int(math.isqrt(length - 1)) + 1, 1), 4096)
    stack = np.empty((s, d, d), dtype=np.complex128)
    stack[0] = identity(d)
    for i in range(1, s):
        stack[i] = stack[i - 1] @ xm
    giant = stack[s - 1] @ xm if length > s else None
    nsteps = (length + s - 1) // s

    def chunk_value(g: int) -> np.ndarray:
        lo, hi = g * s, min((g + 1) * s, length)
        return np.tensordot(coeffs[lo:hi], stack[: hi - lo], axes=1)

    acc = chunk_value(nsteps - 1)
    for g in range(nsteps - 2, -1, -1):
        acc = acc @ giant + chunk_value(g)
    return acc


def sequential_poly_sum(x, a: CoeffOracle | Sequence[complex], c: ScalarSeqWeights, n: int) -> np.ndarray:
    """Weighted truncation sum_k c_{n,k} S_k(X) evaluated as the damped polynomial."""
    xm = as_cmatrix(x, name="X")
    if c.euler_rho is not None:
        return _euler_stable_poly(xm, _as_oracle(a), n, c.euler_rho)
    return weighted_power_sum(xm, transformed_coeffs(a, c, n))


def schur_parlett_with_summation(
    x,
    n: int,
    a: CoeffOracle | Sequence[complex],
    c: ScalarSeqWeights,
    delta: float | None = None,
) -> np.ndarray:
    """Triangularize, cluster, evaluate damped truncations on diagonal blocks,
    then fill superdiagonal blocks by the commutator recurrence.

    Euler weight tables route the diagonal blocks through the stable averaged
    evaluation; other tables use the damped-coefficient Horner loop.
    """
    xm = as_cmatrix(x, name="X")
    oracle = _as_oracle(a)
    sf = schur(xm)
    if delta is None:
        delta = default_cluster_delta(xm)
    pattern = eigen_cluster(np.diag(sf.r), delta)
    reordered, labels = reorder_schur(sf, dict(enumerate(pattern.assignment)))
    r = reordered.r
    q = reordered.q

    bounds = [0]
    for i in range(1, len(labels)):
        if labels[i] != labels[i - 1]:
            bounds.append(i)
    bounds.append(len(labels))
    spans = list(zip(bounds[:-1], bounds[1:]))
    nblocks = len(spans)

    h = None
    if c.euler_rho is None:
        h = transformed_coeffs(oracle, c, n)

    blocks: dict[tuple[int, int], np.ndarray] = {}
    for bi, (lo, hi) in enumerate(spans):
        r_ii = r[lo:hi, lo:hi]
        if c.euler_rho is not None:
            blocks[(bi, bi)] = _euler_stable_poly(r_ii, oracle, n, c.euler_rho)
        else:
            blocks[(bi, bi)] = horner_matrix_poly(h, r_ii)

    for level in range(1, nblocks):
        for bi in range(nblocks - level):
            bj = bi + level
            ilo, ihi = spans[bi]
            jlo, jhi = spans[bj]
            r_ij = r[ilo:ihi, jlo:jhi]
            rhs = blocks[(bi, bi)] @ r_ij - r_ij @ blocks[(bj, bj)]
            for bk in range(bi + 1, bj):
                klo, khi = spans[bk]
                rhs = rhs + blocks[(bi, bk)] @ r[klo:khi, jlo:jhi]
                rhs = rhs - r[ilo:ihi, klo:khi] @ blocks[(bk, bj)]
            blocks[(bi, bj)] = sylvester_solve(r[ilo:ihi, ilo:ihi], r[jlo:jhi, jlo:jhi], rhs)

    f = np.zeros_like(r)
    for (bi, bj), val in blocks.items():
        ilo, ihi = spans[bi]
        jlo, jhi = spans[bj]
        f[ilo:ihi, jlo:jhi] = val
    return q @ f @ q.conj().T
