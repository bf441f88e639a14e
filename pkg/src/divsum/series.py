"""Matrix series as lazy term oracles, plus the concrete families used throughout.

A series is a pure map k -> A_k together with a start index.  ``term_at`` is
deterministic (same k, same bits).  Families with multiplicative structure also
provide a sequential iterator that produces terms by running products; the
iterator is deterministic as well, though its k-th output may differ from
``term_at(k)`` in the last bits because the two recurrences round differently.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import InvalidInputError, SieveRangeError
from .floatsum import TermStream, compensated_sum, parse_kernel, recursive_sum
from .linalg import as_cmatrix, identity, mat_exp, mat_pow_nat, mat_sin, ones_matrix
from .schur import schur

#: Default upper bound of the Moebius sieve.
DEFAULT_SIEVE_BOUND = 10**6


@dataclass(frozen=True)
class MatrixSeries:
    """Lazy matrix series: dimension, start index, and a pure term oracle."""

    dim: int
    term_at: Callable[[int], np.ndarray]
    start_index: int = 0
    family: str = "custom"
    _iter_factory: Callable[[], Iterator[np.ndarray]] | None = None

    def iter_terms(self) -> Iterator[np.ndarray]:
        """Yield A_k for k = start_index, start_index + 1, ... indefinitely."""
        if self._iter_factory is not None:
            return self._iter_factory()
        return (self.term_at(k) for k in _count_from(self.start_index))


def _count_from(k0: int) -> Iterator[int]:
    k = k0
    while True:
        yield k
        k += 1


@dataclass(frozen=True)
class PartialSums:
    """Prefix sums S_start..S_n of a series, tagged with the kernel that built them."""

    values: list
    start_index: int
    kernel_tag: str


def memoized(series: MatrixSeries) -> MatrixSeries:
    """Wrap a series so each term is computed once; first computation is serialized."""
    cache: dict[int, np.ndarray] = {}
    lock = threading.Lock()

    def term_at(k: int) -> np.ndarray:
        hit = cache.get(k)
        if hit is not None:
            return hit
        with lock:
            hit = cache.get(k)
            if hit is None:
                hit = series.term_at(k)
                cache[k] = hit
            return hit

    return MatrixSeries(
        dim=series.dim,
        term_at=term_at,
        start_index=series.start_index,
        family=series.family,
    )


def partial_sums(series: MatrixSeries, n: int, kernel: str = "recursive") -> PartialSums:
    """Prefix sums S_k for k = start_index..n, computed with the chosen kernel.

    ``recursive`` and ``kahan`` stream (each prefix state is exactly the kernel
    applied to that prefix); block-style kernels recompute each prefix.
    """
    s0 = series.start_index
    if n < s0:
        raise InvalidInputError(f"n must be at least the start index {s0}")
    terms = []
    it = series.iter_terms()
    for _ in range(s0, n + 1):
        terms.append(next(it))
    values: list[np.ndarray] = []
    if kernel == "recursive":
        s = np.array(terms[0], dtype=np.complex128, copy=True)
        values.append(s)
        for t in terms[1:]:
            s = s + t
            values.append(s)
    elif kernel == "kahan":
        s = np.zeros((series.dim, series.dim), dtype=np.complex128)
        c = np.zeros_like(s)
        for t in terms:
            y = t - c
            tt = s + y
            c = (tt - s) - y
            s = tt
            values.append(s)
    else:
        kfun = parse_kernel(kernel)
        for hi in range(1, len(terms) + 1):
            values.append(kfun(TermStream.from_list(terms[:hi])))
    return PartialSums(values=values, start_index=s0, kernel_tag=kernel)


# ---------------------------------------------------------------------------
# Series families


def neumann_terms(x) -> MatrixSeries:
    """Geometric series A_k = X^k, start index 0."""
    m = as_cmatrix(x, name="X")

    def term_at(k: int) -> np.ndarray:
        return mat_pow_nat(m, k)

    def iterate() -> Iterator[np.ndarray]:
        a = identity(m.shape[0])
        while True:
            yield a
            a = a @ m

    return MatrixSeries(dim=m.shape[0], term_at=term_at, start_index=0, family="neumann", _iter_factory=iterate)


def square_wave_fourier_terms(x) -> MatrixSeries:
    """Sine series of the unit square wave: term k is (2/(pi k))(1-(-1)^k) sin(kX).

    Even-index terms are exactly the zero matrix.
    """
    m = as_cmatrix(x, name="X")
    d = m.shape[0]
    zero = np.zeros((d, d), dtype=np.complex128)

    def term_at(k: int) -> np.ndarray:
        if k < 1:
            raise InvalidInputError("square-wave series starts at k = 1")
        if k % 2 == 0:
            return zero.copy()
        return (4.0 / (math.pi * k)) * mat_sin(k * m)

    return MatrixSeries(dim=d, term_at=term_at, start_index=1, family="fourier-square")


class MobiusSieve:
    """Moebius function values precomputed by a linear sieve up to a bound."""

    def __init__(self, bound: int):
        if bound < 1:
            raise InvalidInputError("sieve bound must be positive")
        self.bound = bound
        mu = np.zeros(bound + 1, dtype=np.int8)
        mu[1] = 1
        primes: list[int] = []
        smallest: np.ndarray = np.zeros(bound + 1, dtype=np.int64)
        for i in range(2, bound + 1):
            if smallest[i] == 0:
                smallest[i] = i
                primes.append(i)
                mu[i] = -1
            for p in primes:
                ip = i * p
                if p > smallest[i] or ip > bound:
                    break
                smallest[ip] = p
                mu[ip] = 0 if i % p == 0 else -mu[i]
        self._mu = mu

    def mobius(self, n: int) -> int:
        if n < 1:
            raise InvalidInputError("Moebius function is defined for n >= 1")
        if n > self.bound:
            raise SieveRangeError(f"n={n} exceeds sieve bound {self.bound}")
        return int(self._mu[n])

    def values(self, upto: int) -> np.ndarray:
        """mu(1..upto) as an int8 array."""
        if upto > self.bound:
            raise SieveRangeError(f"{upto} exceeds sieve bound {self.bound}")
        return self._mu[1 : upto + 1].copy()


_sieve_lock = threading.Lock()
_sieve_cache: dict[int, MobiusSieve] = {}


def get_sieve(bound: int = DEFAULT_SIEVE_BOUND) -> MobiusSieve:
    with _sieve_lock:
        hit = _sieve_cache.get(bound)
        if hit is None:
            hit = MobiusSieve(bound)
            _sieve_cache[bound] = hit
        return hit


def mobius(n: int, bound: int = DEFAULT_SIEVE_BOUND) -> int:
    """mu(n) from the cached sieve."""
    return get_sieve(bound).mobius(n)


def dirichlet_mobius_terms(x, sieve_bound: int = DEFAULT_SIEVE_BOUND) -> MatrixSeries:
    """Dirichlet series terms mu(n) n^(-X), start index 1.

    A single Schur factorization of X is reused for every index:
    n^(-X) = Q exp(-log(n) R) Q*.  Indices with mu(n) = 0 return the zero
    matrix without computing an exponential.
    """
    m = as_cmatrix(x, name="X")
    d = m.shape[0]
    sieve = get_sieve(sieve_bound)
    form = schur(m)
    q, r = form.q, form.r
    qh = q.conj().T
    zero = np.zeros((d, d), dtype=np.complex128)

    def term_at(n: int) -> np.ndarray:
        if n < 1:
            raise InvalidInputError("Dirichlet series starts at n = 1")
        mu = sieve.mobius(n)
        if mu == 0:
            return zero.copy()
        if n == 1:
            return identity(d)
        powered = q @ mat_exp(-math.log(n) * r) @ qh
        return mu * powered

    return MatrixSeries(dim=d, term_at=term_at, start_index=1, family="dirichlet-mobius")


def hadamard_power_terms(x) -> MatrixSeries:
    """Entrywise powers A_k = X o...o X (k factors); A_0 is the all-ones matrix."""
    m = as_cmatrix(x, name="X")
    d = m.shape[0]

    def term_at(k: int) -> np.ndarray:
        if k < 0:
            raise InvalidInputError("index must be nonnegative")
        return m**k

    def iterate() -> Iterator[np.ndarray]:
        a = ones_matrix(d)
        while True:
            yield a
            a = a * m

    return MatrixSeries(dim=d, term_at=term_at, start_index=0, family="hadamard", _iter_factory=iterate)


def coeff_power_terms(x, a: Callable[[int], complex] | Sequence[complex]) -> MatrixSeries:
    """Power series terms a_k X^k for a scalar coefficient oracle."""
    m = as_cmatrix(x, name="X")
    coeff = _as_coeff_oracle(a)

    def term_at(k: int) -> np.ndarray:
        return coeff(k) * mat_pow_nat(m, k)

    def iterate() -> Iterator[np.ndarray]:
        p = identity(m.shape[0])
        k = 0
        while True:
            yield coeff(k) * p
            p = p @ m
            k += 1

    return MatrixSeries(dim=m.shape[0], term_at=term_at, start_index=0, family="power-coeffs", _iter_factory=iterate)


def _as_coeff_oracle(a) -> Callable[[int], complex]:
    if callable(a):
        return lambda k: complex(a(k))
    seq = [complex(v) for v in a]

    def from_seq(k: int) -> complex:
        if k < 0 or k >= len(seq):
            raise InvalidInputError(f"coefficient index {k} outside stored range")
        return seq[k]

    return from_seq


def scalar_series(values: Sequence[complex] | Callable[[int], complex], start_index: int = 0) -> MatrixSeries:
    """1x1 series from a scalar oracle or finite list (zero beyond a list's end)."""
    if callable(values):
        oracle = values

        def term_at(k: int) -> np.ndarray:
            return np.array([[complex(oracle(k))]], dtype=np.complex128)

    else:
        seq = [complex(v) for v in values]

        def term_at(k: int) -> np.ndarray:
            v = seq[k - start_index] if 0 <= k - start_index < len(seq) else 0.0
            return np.array([[v]], dtype=np.complex128)

    return MatrixSeries(dim=1, term_at=term_at, start_index=start_index, family="scalar")


def tail_series(series: MatrixSeries) -> MatrixSeries:
    """The k >= 1 part of a series starting at 0.

    Kernels indexed from 1 (the Lambert weights, for instance) apply to this
    tail; the dropped A_0 is added back by the caller.
    """
    if series.start_index != 0:
        raise InvalidInputError("tail_series expects a series starting at k = 0")

    def iterate() -> Iterator[np.ndarray]:
        it = series.iter_terms()
        next(it)
        return it

    return MatrixSeries(
        dim=series.dim,
        term_at=series.term_at,
        start_index=1,
        family=f"{series.family}-tail",
        _iter_factory=iterate,
    )


def sum_terms(series: MatrixSeries, n: int, kernel: str = "recursive") -> np.ndarray:
    """Plain truncated sum of A_start..A_n with the chosen kernel."""
    s0 = series.start_index
    if n < s0:
        raise InvalidInputError(f"n must be at least the start index {s0}")
    it = series.iter_terms()
    terms = [next(it) for _ in range(s0, n + 1)]
    stream = TermStream.from_list(terms)
    if kernel == "recursive":
        return recursive_sum(stream)
    if kernel == "kahan":
        return compensated_sum(stream)
    return parse_kernel(kernel)(stream)
