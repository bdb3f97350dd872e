"""Special functions and one-dimensional convex minimization.

Everything here works on plain Python floats; vectorized variants used by
the enumeration kernels live next to their scalar counterparts and share
the same formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class OptimizationError(RuntimeError):
    """A minimization could not bracket or converge within its budget."""


class SingularSystemError(ValueError):
    """A least-squares system has no unique solution."""


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)``; either end may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty interval ({self.lo}, {self.hi})")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def __contains__(self, x: float) -> bool:
        return self.lo < x < self.hi


POSITIVE_REALS = Interval(0.0, math.inf)
REAL_LINE = Interval(-math.inf, math.inf)


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------

# Lanczos approximation (g = 6.024680040776729583740234375, 13 terms) in
# ratio-of-polynomials form; relative error below 1e-15 for x > 0.
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = (
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408,
)
_LANCZOS_DEN = (
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
)


def _lanczos_sum(x: float) -> float:
    num = 0.0
    den = 0.0
    if x < 5.0:
        for a, b in zip(reversed(_LANCZOS_NUM), reversed(_LANCZOS_DEN)):
            num = num * x + a
            den = den * x + b
    else:
        for a, b in zip(_LANCZOS_NUM, _LANCZOS_DEN):
            num = num / x + a
            den = den / x + b
    return num / den


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"log_gamma requires finite x > 0, got {x}")
    if x == 1.0 or x == 2.0:
        return 0.0
    r = math.log(_lanczos_sum(x)) - _LANCZOS_G
    return r + (x - 0.5) * (math.log(x + _LANCZOS_G - 0.5) - 1.0)


# ---------------------------------------------------------------------------
# Binomial log-pmf (saddle-point / deviance form)
# ---------------------------------------------------------------------------

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_SMALL = 15


@lru_cache(maxsize=None)
def _stirling_error_small(n: int) -> float:
    # log(n!) - log(sqrt(2 pi n) (n/e)^n) through log_gamma
    return log_gamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LN_SQRT_2PI


def stirling_error(n: int) -> float:
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)`` for integer ``n >= 1``."""
    if n <= _STIRLING_SMALL:
        return _stirling_error_small(n)
    nn = float(n) * n
    if n > 500:
        return (1 / 12 - (1 / 360) / nn) / n
    if n > 80:
        return (1 / 12 - (1 / 360 - (1 / 1260) / nn) / nn) / n
    if n > 35:
        return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680) / nn) / nn) / nn) / n
    return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - (1 / 1188) / nn) / nn) / nn) / nn) / n


def binomial_deviance(x: float, mean: float) -> float:
    """``x log(x/mean) + mean - x``, stable when ``x`` is close to ``mean``."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mean) + mean - x


def _check_binomial_args(n: int, k: int, p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"success probability must lie in (0, 1), got {p}")
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")


def log_binomial_pmf(n: int, k: int, p: float) -> float:
    """Log of ``C(n, k) p^k (1-p)^(n-k)``.

    Uses the saddle-point decomposition into Stirling errors and binomial
    deviances, which avoids the cancellation of subtracting three large
    log-gamma values.
    """
    _check_binomial_args(n, k, p)
    q = 1.0 - p
    if k == 0:
        return n * math.log1p(-p)
    if k == n:
        return n * math.log(p)
    lc = (
        stirling_error(n)
        - stirling_error(k)
        - stirling_error(n - k)
        - binomial_deviance(k, n * p)
        - binomial_deviance(n - k, n * q)
    )
    lf = 2.0 * _LN_SQRT_2PI + math.log(k) + math.log1p(-k / n)
    return lc - 0.5 * lf


def _stirling_error_vec(ks: np.ndarray) -> np.ndarray:
    out = np.empty(ks.shape, dtype=np.float64)
    small = ks <= _STIRLING_SMALL
    for i in np.flatnonzero(small):
        k = int(ks[i])
        out[i] = _stirling_error_small(k) if k > 0 else 0.0
    big = ~small
    n = ks[big].astype(np.float64)
    nn = n * n
    s = np.where(
        n > 500,
        (1 / 12 - (1 / 360) / nn) / n,
        np.where(
            n > 80,
            (1 / 12 - (1 / 360 - (1 / 1260) / nn) / nn) / n,
            np.where(
                n > 35,
                (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680) / nn) / nn) / nn) / n,
                (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - (1 / 1188) / nn) / nn) / nn) / nn) / n,
            ),
        ),
    )
    out[big] = s
    return out


def _binomial_deviance_vec(x: np.ndarray, mean: float) -> np.ndarray:
    x = x.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(x / mean) + mean - x
    near = np.abs(x - mean) < 0.1 * (x + mean)
    if near.any():
        xs = x[near]
        v = (xs - mean) / (xs + mean)
        s = (xs - mean) * v
        ej = 2.0 * xs * v
        v2 = v * v
        active = np.ones(xs.shape, dtype=bool)
        j = 1
        while active.any() and j < 200:
            ej = ej * v2
            s1 = s + ej / (2 * j + 1)
            active = s1 != s
            s = s1
            j += 1
        out[near] = s
    return out


def log_binomial_pmf_vector(n: int, p: float) -> np.ndarray:
    """``log_binomial_pmf(n, k, p)`` for every ``k = 0..n`` as one array."""
    _check_binomial_args(n, 0, p)
    out = np.empty(n + 1, dtype=np.float64)
    out[0] = n * math.log1p(-p)
    out[n] = n * math.log(p)
    if n >= 2:
        k = np.arange(1, n)
        lc = (
            stirling_error(n)
            - _stirling_error_vec(k)
            - _stirling_error_vec(n - k)
            - _binomial_deviance_vec(k, n * p)
            - _binomial_deviance_vec(n - k, n * (1.0 - p))
        )
        lf = 2.0 * _LN_SQRT_2PI + np.log(k) + np.log1p(-k / n)
        out[1:n] = lc - 0.5 * lf
    return out


@lru_cache(maxsize=4096)
def binomial_pmf_vector(n: int, p: float) -> np.ndarray:
    """Read-only probability vector of ``Bin(n, p)``; cached per ``(n, p)``."""
    pmf = np.exp(log_binomial_pmf_vector(n, p))
    pmf.flags.writeable = False
    return pmf


# ---------------------------------------------------------------------------
# Standard normal
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


# Acklam's rational approximation, relative error < 1.2e-9 before refinement.
_QA = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
       1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_QB = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
       6.680131188771972e01, -1.328068155288572e01)
_QC = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
       -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_QD = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
       3.754408661907416e00)
_Q_LOW = 0.02425


def _lower_quantile(q: float) -> float:
    # q <= 0.5
    if q < _Q_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        x = (((((_QC[0] * r + _QC[1]) * r + _QC[2]) * r + _QC[3]) * r + _QC[4]) * r + _QC[5]) / (
            (((_QD[0] * r + _QD[1]) * r + _QD[2]) * r + _QD[3]) * r + 1.0
        )
    else:
        r = q - 0.5
        s = r * r
        x = (((((_QA[0] * s + _QA[1]) * s + _QA[2]) * s + _QA[3]) * s + _QA[4]) * s + _QA[5]) * r / (
            ((((_QB[0] * s + _QB[1]) * s + _QB[2]) * s + _QB[3]) * s + _QB[4]) * s + 1.0
        )
    # one Halley step on normal_cdf
    e = normal_cdf(x) - q
    u = e * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def normal_quantile(q: float) -> float:
    """Inverse of :func:`normal_cdf` on ``(0, 1)``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"normal_quantile requires 0 < q < 1, got {q}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return _lower_quantile(q)
    return -_lower_quantile(1.0 - q)


# ---------------------------------------------------------------------------
# Convex minimization
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_EXPANSION = 2.0


class _Budget:
    def __init__(self, f: Callable[[float], float], max_evals: int):
        self.f = f
        self.left = max_evals

    def __call__(self, x: float) -> float:
        if self.left <= 0:
            raise OptimizationError("evaluation budget exhausted")
        self.left -= 1
        y = self.f(x)
        if math.isnan(y):
            return math.inf
        return y


def _expand(f: _Budget, origin: float, direction: float) -> tuple[float, float]:
    """Walk ``origin + direction * 2^k`` until the function turns upward.

    Returns a finite interval that contains the minimizer.
    """
    step = 1.0
    prev_x = origin
    x = origin + direction * step
    fx = f(x)
    while True:
        step *= _EXPANSION
        nx = origin + direction * step
        if not math.isfinite(nx):
            raise OptimizationError("bracket expansion overflowed")
        fn = f(nx)
        if fn >= fx:
            lo, hi = sorted((prev_x, nx))
            return lo, hi
        prev_x = x
        x, fx = nx, fn


def _bracket(f: _Budget, domain: Interval) -> tuple[float, float]:
    lo, hi = domain.lo, domain.hi
    if domain.is_finite:
        return lo, hi
    if math.isfinite(lo):
        return _expand(f, lo, 1.0)
    if math.isfinite(hi):
        return _expand(f, hi, -1.0)
    f0, fr, fl = f(0.0), f(1.0), f(-1.0)
    if fr < f0:
        return _expand(f, 0.0, 1.0)
    if fl < f0:
        return _expand(f, 0.0, -1.0)
    return -1.0, 1.0


def minimize_convex(
    f: Callable[[float], float],
    domain: Interval = POSITIVE_REALS,
    tol: float = 1e-10,
    max_evals: int = 10_000,
) -> tuple[float, float]:
    """Minimize a strictly convex function of one variable on an open interval.

    An unbounded end is handled by doubling steps away from the other end
    until the function turns upward; inside the resulting bracket a golden
    section search shrinks toward the minimizer. Values of ``+inf`` (or
    NaN) are treated as lying beyond a pole, so a domain whose endpoint is
    a singularity is handled by shrinking away from that endpoint.

    Parameters
    ----------
    f : callable
        Objective, finite on the interior of ``domain``.
    domain : Interval
        Open search interval.
    tol : float
        Absolute tolerance on the minimizer.
    max_evals : int
        Hard cap on objective evaluations.

    Returns
    -------
    (x_min, f_min)
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    fb = _Budget(f, max_evals)
    a, b = _bracket(fb, domain)
    a = max(a, domain.lo)
    b = min(b, domain.hi)

    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fb(x1), fb(x2)
    while b - a > tol and b - a > 4e-16 * max(abs(a), abs(b)):
        if math.isinf(f1) and math.isinf(f2):
            raise OptimizationError(f"objective infinite throughout ({x1}, {x2})")
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fb(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fb(x2)
    if f1 <= f2:
        return x1, f1
    return x2, f2


# ---------------------------------------------------------------------------
# Least-squares parabola
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticFit:
    """``a x^2 + b x + c`` with the RMS residual over the fitted points."""

    a: float
    b: float
    c: float
    rmse: float

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c

    @property
    def vertex(self) -> float:
        return -self.b / (2.0 * self.a)


def fit_quadratic(points: Sequence[tuple[float, float]]) -> QuadraticFit:
    """Least-squares parabola through ``(x, y)`` points via the normal equations."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 3:
        raise SingularSystemError("need at least 3 distinct x values")
    # center and scale x so the 3x3 system stays well conditioned
    shift = x.mean()
    scale = np.abs(x - shift).max()
    u = (x - shift) / scale
    s = [float(np.sum(u**j)) for j in range(5)]
    gram = np.array([[s[4], s[3], s[2]], [s[3], s[2], s[1]], [s[2], s[1], s[0]]])
    rhs = np.array([np.sum(u * u * y), np.sum(u * y), np.sum(y)])
    au, bu, cu = np.linalg.solve(gram, rhs)
    a = au / scale**2
    b = bu / scale - 2.0 * a * shift
    c = cu - bu * shift / scale + au * shift**2 / scale**2
    resid = y - ((a * x + b) * x + c)
    return QuadraticFit(float(a), float(b), float(c), float(np.sqrt(np.mean(resid**2))))
