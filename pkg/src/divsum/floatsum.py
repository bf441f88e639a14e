"""Floating-point summation kernels and their a priori error budgets.

The compensated loop keeps its four rounding steps as four separate array
operations; nothing here may be fused or reassociated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError
from .linalg import UNIT_ROUNDOFF, as_cmatrix, spectral_norm


@dataclass(frozen=True)
class TermStream:
    """Finite indexed family of same-shaped matrices."""

    count: int
    at: Callable[[int], np.ndarray]

    @staticmethod
    def from_list(terms: Sequence[np.ndarray]) -> "TermStream":
        mats = [np.asarray(t, dtype=np.complex128) for t in terms]
        if not mats:
            raise InvalidInputError("term stream must be nonempty")
        shape = mats[0].shape
        for t in mats:
            if t.shape != shape:
                raise InvalidInputError("term stream has mismatched shapes")
        return TermStream(count=len(mats), at=mats.__getitem__)

    def norm_sum(self) -> float:
        return float(sum(spectral_norm(self.at(k)) for k in range(self.count)))


@dataclass(frozen=True)
class ErrorBudget:
    """First-order forward bound ``coefficient * u * sum_k ||A_k||``."""

    kernel: str
    coefficient: float
    norm_sum: float

    @property
    def bound(self) -> float:
        return self.coefficient * UNIT_ROUNDOFF * self.norm_sum


def recursive_sum(t: TermStream) -> np.ndarray:
    """Left-to-right accumulation in index order."""
    if t.count < 1:
        raise InvalidInputError("cannot sum an empty stream")
    s = np.array(t.at(0), dtype=np.complex128, copy=True)
    for k in range(1, t.count):
        s = s + t.at(k)
    return s


def block_sum(t: TermStream, b: int) -> np.ndarray:
    """Recursive sums of size-b blocks, then a recursive sum of the block sums.

    A final short block is summed as-is, which matches zero-padding it to
    length b.
    """
    if b < 1:
        raise InvalidInputError("block size must be positive")
    nblocks = (t.count + b - 1) // b
    partials = []
    for i in range(nblocks):
        lo, hi = i * b, min((i + 1) * b, t.count)
        s = np.array(t.at(lo), dtype=np.complex128, copy=True)
        for k in range(lo + 1, hi):
            s = s + t.at(k)
        partials.append(s)
    return recursive_sum(TermStream.from_list(partials))


def compensated_sum(t: TermStream) -> np.ndarray:
    """Kahan summation with an entrywise running correction matrix."""
    if t.count < 1:
        raise InvalidInputError("cannot sum an empty stream")
    first = np.asarray(t.at(0))
    s = np.zeros(first.shape, dtype=np.complex128)
    c = np.zeros(first.shape, dtype=np.complex128)
    for k in range(t.count):
        y = t.at(k) - c
        tt = s + y
        c = (tt - s) - y
        s = tt
    return s


Kernel = Callable[[TermStream], np.ndarray]


def mixed_block_sum(t: TermStream, b: int, fast: Kernel, accurate: Kernel) -> np.ndarray:
    """Fast kernel inside size-b blocks, accurate kernel across the block sums."""
    if b < 1:
        raise InvalidInputError("block size must be positive")
    nblocks = (t.count + b - 1) // b
    partials = []
    for i in range(nblocks):
        lo, hi = i * b, min((i + 1) * b, t.count)
        chunk = [t.at(k) for k in range(lo, hi)]
        partials.append(fast(TermStream.from_list(chunk)))
    return accurate(TermStream.from_list(partials))


def horner_matrix_poly(coeffs: Sequence[complex], x) -> np.ndarray:
    """Evaluate sum_k a_k X^k with the running-power loop (P <- P X; S <- S + a_k P)."""
    m = as_cmatrix(x, name="X")
    a = [complex(v) for v in coeffs]
    if not a:
        raise InvalidInputError("need at least one coefficient")
    d = m.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    if len(a) == 1:
        return a[0] * eye
    p = m.copy()
    s = a[0] * eye + a[1] * m
    for k in range(2, len(a)):
        p = p @ m
        s = s + a[k] * p
    return s


def error_budget(kernel: str, n: int, norm_sum: float, b: int | None = None) -> ErrorBudget:
    """A priori bound coefficient for summing A_0..A_n with the named kernel.

    Coefficients: ``recursive`` n, ``block`` b + (n+1)/b - 2, ``kahan`` 2, and
    ``mixed:<fast>:<accurate>`` composes the two per-stage coefficients (the
    cross term is second order and folded in scaled by u).
    """
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    if kernel == "recursive":
        coeff = float(n)
    elif kernel == "block":
        if b is None or b < 1:
            raise InvalidInputError("block budget needs a block size")
        coeff = float(b + (n + 1) / b - 2)
    elif kernel in ("kahan", "compensated"):
        coeff = 2.0
    elif kernel.startswith("mixed:"):
        parts = kernel.split(":")
        if len(parts) != 3:
            raise InvalidInputError("mixed budget tag must be mixed:<fast>:<accurate>")
        if b is None or b < 1:
            raise InvalidInputError("mixed budget needs a block size")
        cf = error_budget(parts[1], max(b - 1, 0), 1.0, b=b).coefficient
        ca = error_budget(parts[2], max((n + 1 + b - 1) // b - 1, 0), 1.0, b=b).coefficient
        coeff = cf + ca + cf * ca * UNIT_ROUNDOFF
    else:
        raise InvalidInputError(f"unknown kernel tag {kernel!r}")
    return ErrorBudget(kernel=kernel, coefficient=coeff, norm_sum=norm_sum)


def parse_kernel(tag: str) -> Kernel:
    """Resolve a CLI kernel tag: recursive | block:<b> | kahan | mixed:<b>:<fast>:<accurate>."""
    parts = tag.split(":")
    name = parts[0]
    if name == "recursive" and len(parts) == 1:
        return recursive_sum
    if name == "kahan" and len(parts) == 1:
        return compensated_sum
    if name == "block" and len(parts) == 2:
        b = int(parts[1])
        return lambda t: block_sum(t, b)
    if name == "mixed" and len(parts) == 4:
        b = int(parts[1])
        fast = parse_kernel(parts[2])
        accurate = parse_kernel(parts[3])
        return lambda t: mixed_block_sum(t, b, fast, accurate)
    raise InvalidInputError(f"unknown kernel tag {tag!r}")
