"""Dense complex matrix kernels: norms, order checks, exp/sin, powers, closed forms.

Everything here works on plain ``numpy`` arrays of dtype complex128.  Matrices
are always square; ``as_cmatrix`` is the single validation gate used by the
rest of the package.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError, SingularOracleError

#: Unit roundoff of IEEE double precision.
UNIT_ROUNDOFF = 2.0**-52

# Diagonal [6/6] rational coefficients for the exponential, exact integers
# divided once: b_j = (12-j)! 6! / (12! (6-j)! j!).
_EXP_PADE_COEFFS = tuple(
    math.factorial(12 - j) * math.factorial(6) / (math.factorial(12) * math.factorial(6 - j) * math.factorial(j))
    for j in range(7)
)

# Scaling threshold for the exponential: halve until the 1-norm is below this.
_EXP_SCALE_THRESHOLD = 0.5


def as_cmatrix(a, *, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a square complex128 array.

    Raises InvalidInputError on non-square shapes or non-finite entries.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return m


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def ones_matrix(d: int) -> np.ndarray:
    """The all-ones matrix."""
    return np.ones((d, d), dtype=np.complex128)


def spectral_norm(a) -> float:
    """Largest singular value."""
    m = as_cmatrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _hermitian_within(p: np.ndarray, tol: float) -> bool:
    return float(np.max(np.abs(p - p.conj().T), initial=0.0)) <= tol


def default_hermitian_tol(p: np.ndarray) -> float:
    """Default tolerance for symmetry/definiteness tests: 1e-10 * ||P||."""
    return 1e-10 * max(spectral_norm(p), 1.0)


def is_positive_definite(p, tol: float | None = None) -> bool:
    """True iff ``p`` is Hermitian within ``tol`` and its least eigenvalue exceeds ``tol``."""
    m = as_cmatrix(p, name="P")
    if tol is None:
        tol = default_hermitian_tol(m)
    if not _hermitian_within(m, tol):
        return False
    h = 0.5 * (m + m.conj().T)
    eigs = np.linalg.eigvalsh(h)
    return bool(eigs[0] > tol)


def loewner_less(a, b, tol: float | None = None) -> bool:
    """True iff ``b - a`` is positive semidefinite within ``tol``.

    Both arguments must be Hermitian (within ``tol``) and share a dimension.
    """
    ma = as_cmatrix(a, name="A")
    mb = as_cmatrix(b, name="B")
    if ma.shape != mb.shape:
        raise InvalidInputError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    if tol is None:
        tol = max(default_hermitian_tol(ma), default_hermitian_tol(mb))
    if not (_hermitian_within(ma, tol) and _hermitian_within(mb, tol)):
        raise InvalidInputError("loewner_less requires Hermitian arguments")
    diff = 0.5 * ((mb - ma) + (mb - ma).conj().T)
    eigs = np.linalg.eigvalsh(diff)
    return bool(eigs[0] >= -tol)


def mat_exp(a) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring over a [6/6] diagonal rational kernel."""
    m = as_cmatrix(a)
    d = m.shape[0]
    norm1 = float(np.max(np.sum(np.abs(m), axis=0), initial=0.0))
    s = 0
    if norm1 > _EXP_SCALE_THRESHOLD:
        s = int(math.ceil(math.log2(norm1 / _EXP_SCALE_THRESHOLD)))
    ms = m / (2.0**s)
    b = _EXP_PADE_COEFFS
    eye = identity(d)
    m2 = ms @ ms
    m4 = m2 @ m2
    m6 = m4 @ m2
    even = b[0] * eye + b[2] * m2 + b[4] * m4 + b[6] * m6
    odd = ms @ (b[1] * eye + b[3] * m2 + b[5] * m4)
    try:
        e = np.linalg.solve(even - odd, even + odd)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise OverflowError(f"exponential kernel solve failed at 1-norm {norm1}") from exc
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            if not np.all(np.isfinite(e.view(np.float64))):
                break
            e = e @ e
    if not np.all(np.isfinite(e.view(np.float64))):
        raise OverflowError(f"matrix exponential overflowed at 1-norm {norm1}")
    return e


def mat_sin(a) -> np.ndarray:
    """Matrix sine via (exp(iA) - exp(-iA)) / 2i; real inputs get an exactly real result."""
    m = as_cmatrix(a)
    plus = mat_exp(1j * m)
    minus = mat_exp(-1j * m)
    s = (plus - minus) / 2j
    if np.all(m.imag == 0.0):
        s = s.real.astype(np.complex128)
    return s


def mat_pow_nat(a, k: int) -> np.ndarray:
    """Nonnegative integer power by repeated squaring; ``k = 0`` gives the identity."""
    m = as_cmatrix(a)
    if k < 0:
        raise InvalidInputError("exponent must be nonnegative")
    result = identity(m.shape[0])
    base = m
    e = int(k)
    while e > 0:
        if e & 1:
            result = result @ base
        e >>= 1
        if e:
            base = base @ base
    return result


def dirichlet_pow(n: int, x) -> np.ndarray:
    """n**X := exp(log(n) X) for integer n >= 1; n = 1 returns the identity exactly."""
    m = as_cmatrix(x, name="X")
    if n < 1:
        raise InvalidInputError(f"dirichlet_pow requires n >= 1, got {n}")
    if n == 1:
        return identity(m.shape[0])
    return mat_exp(math.log(n) * m)


def jordan_block(lam, d: int) -> np.ndarray:
    """Upper bidiagonal block: ``lam`` on the diagonal, ones on the superdiagonal."""
    if d < 1:
        raise InvalidInputError("block size must be positive")
    j = np.eye(d, k=1, dtype=np.complex128)
    j += complex(lam) * np.eye(d, dtype=np.complex128)
    return j


def jordan_function_oracle(f_derivs, d: int) -> np.ndarray:
    """Value of an analytic function on a d-by-d Jordan block.

    ``f_derivs`` lists f(lam), f'(lam), ..., f^(d-1)(lam); the result is the
    upper-triangular Toeplitz matrix with entry (i, i+j) = f^(j)(lam) / j!.
    """
    vals = [complex(v) for v in f_derivs]
    if len(vals) == 0:
        raise InvalidInputError("need at least f(lambda)")
    if len(vals) != d:
        raise InvalidInputError(f"need exactly {d} derivative values, got {len(vals)}")
    out = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        out += (vals[j] / math.factorial(j)) * np.eye(d, k=j, dtype=np.complex128)
    return out


def neumann_closed_form(x, n: int) -> np.ndarray:
    """Exact n-term geometric partial sum (I - X^n)(I - X)^(-1); n = 0 gives zero."""
    m = as_cmatrix(x, name="X")
    d = m.shape[0]
    if n < 0:
        raise InvalidInputError("term count must be nonnegative")
    if n == 0:
        return np.zeros((d, d), dtype=np.complex128)
    eye = identity(d)
    rhs = eye - mat_pow_nat(m, n)
    try:
        return np.linalg.solve(eye - m, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularOracleError("I - X is singular; closed form undefined") from exc


def hadamard_closed_form(x, n: int) -> np.ndarray:
    """Entrywise geometric partial sum (1 - x_ij^n) / (1 - x_ij), with value n at x_ij = 1."""
    m = as_cmatrix(x, name="X")
    if n < 0:
        raise InvalidInputError("term count must be nonnegative")
    at_one = m == 1.0
    denom = np.where(at_one, 1.0, 1.0 - m)
    numer = np.where(at_one, 0.0, 1.0 - m**n)
    out = numer / denom
    return np.where(at_one, complex(n), out)
