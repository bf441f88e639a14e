"""Functional summation: damped evaluations, exponential-integral transforms, limits.

Every method here evaluates a damped version of the series at a parameter x
and takes a numeric limit along a caller-supplied schedule; the integral
variants replace the limit with an adaptive quadrature over [0, T].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergentIntegralError, InvalidInputError, NotSummableError
from .linalg import as_cmatrix, is_positive_definite, loewner_less, mat_exp, spectral_norm
from .sequential import SumReport
from .series import MatrixSeries

#: Default cap on streamed terms for the damped-series evaluators.
DEFAULT_TERM_BUDGET = 1_000_000


def _fnorm(a: np.ndarray) -> float:
    """Frobenius norm; the per-term stopping rules use it because it is an
    upper bound on the spectral norm and an order of magnitude cheaper."""
    return float(np.linalg.norm(a))

#: Default cap on inner-series terms for the integral transforms.
BOREL_TERM_BUDGET = 100_000


@dataclass(frozen=True)
class AbelianWeights:
    """Strictly Loewner-increasing, unbounded positive definite dampers P_0, P_1, ..."""

    P_at: Callable[[int], np.ndarray]
    dim: int


@dataclass(frozen=True)
class LimitSchedule:
    """Strictly monotone abscissae walking toward the limit point."""

    points: list[float]
    stagnation_tol: float = 1e-6

    def __post_init__(self):
        if len(self.points) < 3:
            raise InvalidInputError("limit schedule needs at least 3 points")
        diffs = np.diff(self.points)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise InvalidInputError("limit schedule must be strictly monotone")


def approach_one(m_lo: int = 4, m_hi: int = 14, stagnation_tol: float = 1e-6) -> LimitSchedule:
    """Geometric approach to 1 from below: x_m = 1 - 2^(-m)."""
    return LimitSchedule(points=[1.0 - 2.0**-m for m in range(m_lo, m_hi + 1)], stagnation_tol=stagnation_tol)


def approach_infinity(m_lo: int = 0, m_hi: int = 10, stagnation_tol: float = 1e-6) -> LimitSchedule:
    """Geometric growth to infinity: x_m = 2^m."""
    return LimitSchedule(points=[2.0**m for m in range(m_lo, m_hi + 1)], stagnation_tol=stagnation_tol)


def approach_zero(m_lo: int = 4, m_hi: int = 14, stagnation_tol: float = 1e-6) -> LimitSchedule:
    """Geometric decay to 0 from above: x_m = 2^(-m)."""
    return LimitSchedule(points=[2.0**-m for m in range(m_lo, m_hi + 1)], stagnation_tol=stagnation_tol)


@dataclass(frozen=True)
class QuadratureSpec:
    """Panelled Gauss rule on [0, T] with a tail tolerance."""

    panel_order: int = 12
    upper: float = 40.0
    tail_tol: float = 1e-9
    inner_budget: int = BOREL_TERM_BUDGET

    def __post_init__(self):
        if self.upper <= 0:
            raise InvalidInputError("truncation bound must be positive")
        if self.panel_order < 2:
            raise InvalidInputError("panel order must be at least 2")


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if x <= 0:
        raise InvalidInputError("log_gamma requires a positive argument")
    return math.lgamma(x)


def _damped_sum(
    series: MatrixSeries,
    weight_at: Callable[[int], float],
    tol: float,
    budget: int,
    what: str,
    force_terms: int | None = None,
) -> np.ndarray:
    """Sum w_k A_k with a decay-aware stop: three consecutive small, non-increasing terms.

    ``force_terms`` disables the stopping rule and sums exactly that many terms
    (counted from the start index); useful for sparse series whose zero terms
    would trip the consecutive-smallness test.
    """
    d = series.dim
    acc = np.zeros((d, d), dtype=np.complex128)
    small_run = 0
    decay_ref = math.inf  # last nonzero term norm; exact zeros never reset the run
    it = series.iter_terms()
    k = series.start_index
    taken = 0
    limit = force_terms if force_terms is not None else budget
    while taken < limit:
        a_k = next(it)
        w = weight_at(k)
        term = w * a_k
        acc = acc + term
        tnorm = _fnorm(term)
        if force_terms is None:
            if tnorm <= tol * (1.0 + _fnorm(acc)) and tnorm <= decay_ref:
                small_run += 1
                if small_run >= 3:
                    return acc
            else:
                small_run = 0
        if tnorm > 0.0:
            decay_ref = tnorm
        k += 1
        taken += 1
    if force_terms is not None:
        return acc
    raise NotSummableError(f"{what}: no sustained decay within {budget} terms")


def abel_eval(
    series: MatrixSeries,
    x: float,
    tol: float,
    *,
    term_budget: int = DEFAULT_TERM_BUDGET,
    force_terms: int | None = None,
) -> np.ndarray:
    """Power-damped sum sum_k A_k x^k for 0 < x < 1."""
    if not 0.0 < x < 1.0:
        raise InvalidInputError("abel_eval requires 0 < x < 1")
    lx = math.log1p(x - 1.0)
    return _damped_sum(series, lambda k: math.exp(k * lx), tol, term_budget, "abel", force_terms)


def abelian_means_eval(
    series: MatrixSeries,
    w: AbelianWeights,
    x: float,
    tol: float,
    *,
    term_budget: int = 10_000,
) -> np.ndarray:
    """Exponentially damped sum sum_k A_k exp(-P_k x) for x > 0."""
    if x <= 0:
        raise InvalidInputError("abelian means need x > 0")
    if w.dim != series.dim:
        raise InvalidInputError("damper dimension mismatch")
    d = series.dim
    acc = np.zeros((d, d), dtype=np.complex128)
    small_run = 0
    decay_ref = math.inf
    it = series.iter_terms()
    k = series.start_index
    for _ in range(term_budget):
        a_k = next(it)
        damper = mat_exp(-x * as_cmatrix(w.P_at(k), name=f"P_{k}"))
        term = a_k @ damper
        acc = acc + term
        tnorm = _fnorm(term)
        if tnorm <= tol * (1.0 + _fnorm(acc)) and tnorm <= decay_ref:
            small_run += 1
            if small_run >= 3:
                return acc
        else:
            small_run = 0
        if tnorm > 0.0:
            decay_ref = tnorm
        k += 1
    raise NotSummableError(f"abelian means: no sustained decay within {term_budget} terms")


def check_abelian_weights(w: AbelianWeights, upto: int) -> tuple[bool, list[float]]:
    """Window check of the damper sequence: strict Loewner growth plus norm growth trace."""
    ok = True
    norms = []
    prev = None
    for k in range(upto + 1):
        p = as_cmatrix(w.P_at(k), name=f"P_{k}")
        if not is_positive_definite(p):
            ok = False
        if prev is not None and not loewner_less(prev, p):
            ok = False
        norms.append(spectral_norm(p))
        prev = p
    if norms[-1] <= norms[0]:
        ok = False
    return ok, norms


def lambert_eval(
    series: MatrixSeries,
    x: float,
    tol: float,
    *,
    term_budget: int = DEFAULT_TERM_BUDGET,
    force_terms: int | None = None,
) -> np.ndarray:
    """Weighted sum (1-x) sum_k k x^k / (1 - x^k) A_k for 0 < x < 1.

    The kernel is evaluated through expm1 in log space, which stays accurate
    as x approaches 1.
    """
    if not 0.0 < x < 1.0:
        raise InvalidInputError("lambert_eval requires 0 < x < 1")
    if series.start_index < 1:
        raise InvalidInputError("Lambert summation needs a series starting at k = 1")
    lx = math.log1p(x - 1.0)
    one_minus_x = 1.0 - x

    def weight_at(k: int) -> float:
        klx = k * lx
        return one_minus_x * k * math.exp(klx) / (-math.expm1(klx))

    return _damped_sum(series, weight_at, tol, term_budget, "lambert", force_terms)


def weak_borel_eval(
    series: MatrixSeries,
    x: float,
    tol: float,
    *,
    term_budget: int = BOREL_TERM_BUDGET,
) -> np.ndarray:
    """Poisson-weighted partial-sum average e^(-x) sum_k S_k x^k / k! for x > 0.

    Terms are added at least until the Poisson bulk (k ~ x) has passed, then
    until three consecutive contributions are negligible.
    """
    if x <= 0:
        raise InvalidInputError("weak Borel evaluation needs x > 0")
    d = series.dim
    lxx = math.log(x)
    s = np.zeros((d, d), dtype=np.complex128)
    acc = np.zeros((d, d), dtype=np.complex128)
    small_run = 0
    it = series.iter_terms()
    for k in range(term_budget):
        if k >= series.start_index:
            s = s + next(it)
        w = math.exp(k * lxx - x - math.lgamma(k + 1))
        acc = acc + w * s
        if k >= x:
            if w * _fnorm(s) <= tol * (1.0 + _fnorm(acc)):
                small_run += 1
                if small_run >= 3:
                    return acc
            else:
                small_run = 0
    raise NotSummableError(f"weak Borel: Poisson tail still significant after {term_budget} terms")


# ---------------------------------------------------------------------------
# Integral transforms


def _power_weight(x: float, k: int, alpha: float) -> float:
    """x^(alpha k) / Gamma(1 + alpha k), evaluated in log space."""
    if k == 0:
        return 1.0
    if x == 0.0:
        return 0.0
    return math.exp(alpha * k * math.log(x) - math.lgamma(1.0 + alpha * k))


def _inner_series_value(
    series: MatrixSeries, x: float, alpha: float, q: QuadratureSpec
) -> tuple[np.ndarray, float]:
    """sum_k A_k x^(alpha k) / Gamma(1 + alpha k), truncated by sustained decay.

    Also returns the accumulated term-magnitude total: times the unit roundoff
    it bounds the evaluation's noise floor, which the outer quadrature uses to
    recognize when the true value has sunk below what summation can resolve.
    """
    d = series.dim
    acc = np.zeros((d, d), dtype=np.complex128)
    magnitude = 0.0
    small_run = 0
    decay_ref = math.inf
    it = series.iter_terms()
    k = series.start_index
    for _ in range(q.inner_budget):
        a_k = next(it)
        w = _power_weight(x, k, alpha)
        term = w * a_k
        acc = acc + term
        tnorm = _fnorm(term)
        if not math.isfinite(tnorm):
            raise DivergentIntegralError(f"inner series overflowed at x={x}, k={k}")
        magnitude += tnorm
        if tnorm <= q.tail_tol * (1.0 + _fnorm(acc)) and tnorm <= decay_ref:
            small_run += 1
            if small_run >= 3:
                return acc, magnitude
        else:
            small_run = 0
        if tnorm > 0.0:
            decay_ref = tnorm
        k += 1
    raise NotSummableError(f"inner series did not settle within {q.inner_budget} terms at x={x}")


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _GAUSS_CACHE.get(order)
    if rule is None:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        rule = (nodes, weights)
        _GAUSS_CACHE[order] = rule
    return rule


def _panel_estimate(f: Callable[[float], np.ndarray], a: float, b: float, order: int) -> np.ndarray:
    nodes, weights = _gauss_rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    acc = None
    for t, w in zip(nodes, weights):
        v = (half * w) * f(mid + half * t)
        acc = v if acc is None else acc + v
    return acc


def _adaptive_panel(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    order: int,
    abs_tol: float,
    noise_cell: list[float],
    depth: int = 0,
) -> np.ndarray:
    whole = _panel_estimate(f, a, b, order)
    size = _fnorm(whole)
    # Panels whose whole contribution is below tolerance need no refinement,
    # and refinement cannot beat the integrand's own noise floor.
    if size <= abs_tol or depth >= 10:
        return whole
    mid = 0.5 * (a + b)
    left = _panel_estimate(f, a, mid, order)
    right = _panel_estimate(f, mid, b, order)
    disagreement = _fnorm(whole - (left + right))
    floor = max(abs_tol, 64.0 * 2.0**-52 * size, 2.0 * (b - a) * noise_cell[0])
    if disagreement <= floor:
        return left + right
    half_tol = 0.5 * abs_tol
    return _adaptive_panel(f, a, mid, order, half_tol, noise_cell, depth + 1) + _adaptive_panel(
        f, mid, b, order, half_tol, noise_cell, depth + 1
    )


def borel_type_integral(
    transform: Callable[[float], np.ndarray],
    q: QuadratureSpec,
    method: str,
    dim: int,
    noise_of: Callable[[float], float] | None = None,
) -> SumReport:
    """Integrate e^(-x) * transform(x) over [0, T] with growth monitoring.

    Walks unit-width top-level panels left to right, each refined adaptively.
    Integration stops early once the weighted integrand at two consecutive
    panel ends is either negligible or buried under the transform's own
    evaluation noise (as reported by ``noise_of``, an absolute bound on the
    error of ``transform(x)``).  If the loop reaches T with the raw transform
    norm above e^(T/2), the integral is declared divergent.
    """
    evaluations = 0
    noise_cell = [0.0]

    def weighted(x: float) -> np.ndarray:
        nonlocal evaluations
        evaluations += 1
        damp = math.exp(-x)
        if noise_of is not None:
            noise_cell[0] = max(noise_cell[0], damp * noise_of(x))
        return damp * transform(x)

    upper = q.upper
    boundaries = [float(i) for i in range(int(math.floor(upper)) + 1)]
    if boundaries[-1] < upper:
        boundaries.append(upper)
    acc = np.zeros((dim, dim), dtype=np.complex128)
    quiet_ends = 0
    tail_bound = math.inf
    last_panel_norm = math.inf
    reached_end = True
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        panel_tol = q.tail_tol * (1.0 + spectral_norm(acc)) * (b - a) / upper
        piece = _adaptive_panel(weighted, a, b, q.panel_order, panel_tol, noise_cell)
        acc = acc + piece
        last_panel_norm = spectral_norm(piece)
        end_weight = spectral_norm(weighted(b))
        if not math.isfinite(end_weight):
            raise DivergentIntegralError(f"integrand not finite at x={b}")
        end_noise = math.exp(-b) * noise_of(b) if noise_of is not None else 0.0
        signal_quiet = end_weight <= q.tail_tol * (1.0 + spectral_norm(acc))
        noise_buried = end_noise > 0.0 and end_weight <= 8.0 * end_noise
        if signal_quiet or noise_buried:
            quiet_ends += 1
            if quiet_ends >= 2:
                tail_bound = 2.0 * end_weight if signal_quiet else 2.0 * (end_weight + end_noise)
                reached_end = False
                break
        else:
            quiet_ends = 0
    if reached_end:
        end_norm = math.exp(-upper) * spectral_norm(transform(upper))
        if end_norm > math.exp(upper / 2.0):
            raise DivergentIntegralError(
                f"weighted integrand norm {end_norm:.3e} at T={upper} exceeds exp(T/2); integral diverges"
            )
        tail_bound = 2.0 * end_norm
    converged = tail_bound <= q.tail_tol * (1.0 + spectral_norm(acc)) * 4.0
    return SumReport(
        value=acc,
        terms_used=evaluations,
        converged=bool(converged),
        last_increment_norm=float(min(tail_bound, last_panel_norm)),
        method=method,
    )


def mittag_leffler_sum(series: MatrixSeries, alpha: float, q: QuadratureSpec | None = None) -> SumReport:
    """Integral transform with weights x^(alpha k) / Gamma(1 + alpha k); alpha = 1 is the
    strong Borel method (same code path, so the two agree bitwise there)."""
    if alpha <= 0:
        raise InvalidInputError("alpha must be positive")
    if q is None:
        q = QuadratureSpec()
    method = "sborel" if alpha == 1.0 else f"mittag:{alpha}"

    # transform() and noise_of() are always queried at the same abscissa in
    # turn; a one-slot cache avoids evaluating the inner series twice.
    last: list = [None, None, 0.0]

    def evaluate(x: float) -> None:
        if last[0] != x:
            value, magnitude = _inner_series_value(series, x, alpha, q)
            last[0] = x
            last[1] = value
            last[2] = magnitude

    def transform(x: float) -> np.ndarray:
        evaluate(x)
        return last[1]

    def noise_of(x: float) -> float:
        evaluate(x)
        return 32.0 * 2.0**-52 * last[2]

    return borel_type_integral(transform, q, method, series.dim, noise_of=noise_of)


def strong_borel_sum(series: MatrixSeries, q: QuadratureSpec | None = None) -> SumReport:
    """Exponentially weighted integral of the term generating function."""
    return mittag_leffler_sum(series, 1.0, q)


def take_limit(evaluator: Callable[[float], np.ndarray], schedule: LimitSchedule, method: str = "limit") -> SumReport:
    """Evaluate along the schedule; converged when the last three values agree.

    Evaluator failures are re-raised with the offending abscissa attached.
    """
    values: list[np.ndarray] = []
    for x in schedule.points:
        try:
            values.append(np.asarray(evaluator(x), dtype=np.complex128))
        except Exception as exc:
            raise type(exc)(f"{exc} [at abscissa x={x}]") from exc
    final = values[-1]
    scale = schedule.stagnation_tol * (1.0 + spectral_norm(final))
    tail = values[-3:]
    gaps = [spectral_norm(tail[i] - tail[j]) for i in range(3) for j in range(i + 1, 3)]
    return SumReport(
        value=final,
        terms_used=len(values),
        converged=bool(max(gaps) <= scale),
        last_increment_norm=float(spectral_norm(values[-1] - values[-2])),
        method=method,
    )
