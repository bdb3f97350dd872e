"""Asymptotic allocation criteria.

Neyman allocation, the Pitman sample-size limits, and the large-deviation
(Bahadur) rates of the Wald test, of the MTD selection rule and of a
general mean comparison, together with their minimizers.

Functions that assume arm B is the better one (``p_A < p_B`` or
``mean_A < mean_B``) accept either order: they swap the arms internally and
report the allocation for the caller's arm A. Rates are returned as
``(rate, t_star)`` where ``t_star`` is the minimizing tilt in the oriented
frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .models import MgfModel, SuccessPair
from .numerics import (
    DomainError,
    Interval,
    POSITIVE_REALS,
    REAL_LINE,
    minimize_convex,
    normal_quantile,
)

T_TOL = 1e-10
NU_TOL = 1e-10
UNIT = Interval(0.0, 1.0)

# |p_A + p_B - 1| below this counts as a self-reflecting pair (nu* = 1/2)
_SELF_REFLECT_TOL = 1e-12


@dataclass(frozen=True)
class RateResult:
    """Minimizing allocation of a rate function and the rate attained there."""

    nu_star: float
    rate_at_min: float
    t_star: float


@dataclass(frozen=True)
class PitmanScenario:
    """Local alternatives ``p + delta/sqrt(k)`` for the Pitman comparison."""

    delta_A: float
    delta_B: float
    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.delta_A < self.delta_B:
            raise DomainError("need delta_A < delta_B")
        if not 0.0 < self.p < 1.0:
            raise DomainError("need 0 < p < 1")
        if not 0.0 < self.alpha < self.beta < 1.0:
            raise DomainError("need 0 < alpha < beta < 1")

    def pair_at(self, k: float) -> SuccessPair:
        r = math.sqrt(k)
        return SuccessPair(self.p + self.delta_A / r, self.p + self.delta_B / r)


@dataclass(frozen=True)
class MtdSpec:
    """Toxicity probabilities of two doses and the target toxicity ``p0``.

    Dose B is taken to be the true MTD (closer to ``p0``).
    """

    p_A: float
    p_B: float
    p0: float

    def __post_init__(self):
        for name in ("p_A", "p_B"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if not 0.0 < self.p0 <= 1.0:
            raise DomainError(f"p0 must lie in (0, 1], got {self.p0}")
        if not self.p_A < self.p_B:
            raise DomainError("need p_A < p_B")
        if not abs(self.p_B - self.p0) < abs(self.p_A - self.p0):
            raise DomainError("dose B must be the one closer to p0")

    @property
    def pair(self) -> SuccessPair:
        return SuccessPair(self.p_A, self.p_B)


def _check_nu(nu: float) -> None:
    if not 0.0 < nu < 1.0:
        raise DomainError(f"allocation fraction must lie in (0, 1), got {nu}")


def _log_q_plus_p_exp(p: float, x: float) -> float:
    # log(1 - p + p e^x), exactly 0 at x = 0
    if x < 700.0:
        return math.log1p(p * math.expm1(x))
    return math.log(p) + x + math.log1p(math.exp(math.log1p(-p) - math.log(p) - x))


# ---------------------------------------------------------------------------
# Neyman and Pitman
# ---------------------------------------------------------------------------

def neyman_fraction(var_A: float, var_B: float) -> float:
    sa, sb = math.sqrt(var_A), math.sqrt(var_B)
    return sa / (sa + sb)


def neyman_allocation(models: Union[SuccessPair, Sequence[MgfModel]]) -> float:
    """Fraction ``sd_A / (sd_A + sd_B)`` that minimizes the variance of the mean difference."""
    if isinstance(models, SuccessPair):
        pa, pb = models.p_A, models.p_B
        return neyman_fraction(pa * (1.0 - pa), pb * (1.0 - pb))
    a, b = models
    if not (a.variance > 0 and b.variance > 0):
        raise DomainError("variances must be positive")
    return neyman_fraction(a.variance, b.variance)


def pitman_limit(sc: PitmanScenario, nu: float) -> float:
    """Limit of ``n_k / k`` for a one-sided Wald test run at fixed fraction ``nu``."""
    _check_nu(nu)
    z = (normal_quantile(1.0 - sc.alpha) - normal_quantile(1.0 - sc.beta)) / (sc.delta_B - sc.delta_A)
    return z * z * sc.p * (1.0 - sc.p) / (nu * (1.0 - nu))


def mtd_pitman_limit(p_A: float, p_B: float, Kdev: float, alpha: float, nu: float) -> float:
    """Limit of ``n_k / k`` for MTD selection when the mean misses ``p0`` by ``Kdev/sqrt(k)``."""
    _check_nu(nu)
    if not Kdev > 0:
        raise DomainError("Kdev must be positive")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    z = normal_quantile(1.0 - alpha) / (2.0 * Kdev)
    return z * z * (p_A * (1.0 - p_A) / nu + p_B * (1.0 - p_B) / (1.0 - nu))


def mtd_neyman_allocation(spec: MtdSpec) -> float:
    """Minimizer of :func:`mtd_pitman_limit` over ``nu``."""
    return neyman_allocation(spec.pair)


# ---------------------------------------------------------------------------
# Wald test (binary responses)
# ---------------------------------------------------------------------------

def H(t: float, nu: float, pair: SuccessPair) -> float:
    """Per-observation log-MGF of ``p_hat_A - p_hat_B`` at tilt ``t``."""
    return (
        nu * _log_q_plus_p_exp(pair.p_A, t / nu)
        + (1.0 - nu) * _log_q_plus_p_exp(pair.p_B, -t / (1.0 - nu))
    )


def bahadur_rate(nu: float, pair: SuccessPair) -> tuple[float, float]:
    """``g(nu) = inf_{t>0} H(t, nu)``, the exponential decay rate of the type-II error."""
    _check_nu(nu)
    if pair.p_A == pair.p_B:
        raise DomainError("rate undefined for p_A == p_B")
    if pair.p_A > pair.p_B:
        return bahadur_rate(1.0 - nu, pair.swapped())
    t, g = minimize_convex(lambda t: H(t, nu, pair), POSITIVE_REALS, T_TOL)
    return g, t


def bahadur_allocation_closed_form(pair: SuccessPair) -> float:
    """Closed-form minimizer of ``g``."""
    pa, pb = pair.p_A, pair.p_B
    if pa == pb:
        raise DomainError("allocation undefined for p_A == p_B")
    if pa > pb:
        return 1.0 - bahadur_allocation_closed_form(pair.swapped())
    num = math.log(pb * math.log(pb / pa) / ((1.0 - pb) * math.log((1.0 - pa) / (1.0 - pb))))
    den = math.log(pb * (1.0 - pa) / (pa * (1.0 - pb)))
    return num / den


def bahadur_allocation_numeric(pair: SuccessPair, tol: float = NU_TOL) -> RateResult:
    """Minimize ``g`` over ``(0, 1)`` by nested one-dimensional searches.

    The rate is invariant under ``(p_A, p_B, nu) -> (1 - p_B, 1 - p_A, 1 - nu)``;
    the search always runs on the representative with ``p_A + p_B <= 1`` so
    the reported allocations respect that symmetry to rounding. A pair that
    is its own reflection has its minimum at exactly one half.
    """
    if pair.p_A == pair.p_B:
        raise DomainError("allocation undefined for p_A == p_B")
    if pair.p_A > pair.p_B:
        r = bahadur_allocation_numeric(pair.swapped(), tol)
        return RateResult(1.0 - r.nu_star, r.rate_at_min, r.t_star)
    s = pair.p_A + pair.p_B
    if abs(s - 1.0) <= _SELF_REFLECT_TOL:
        g, t = bahadur_rate(0.5, pair)
        return RateResult(0.5, g, t)
    if s > 1.0:
        r = bahadur_allocation_numeric(pair.reflected(), tol)
        return RateResult(1.0 - r.nu_star, r.rate_at_min, r.t_star)
    nu, _ = minimize_convex(lambda v: bahadur_rate(v, pair)[0], UNIT, tol)
    t = bahadur_rate(nu, pair)[1]
    nu, t = _polish_stationary_point(pair, nu, t)
    return RateResult(nu, H(t, nu, pair), t)


def _tilted_mean(p: float, x: float) -> float:
    # d/dx log(1 - p + p e^x)
    return 1.0 / (1.0 + math.exp(math.log1p(-p) - math.log(p) - x))


def _polish_stationary_point(pair: SuccessPair, nu: float, t: float, steps: int = 8) -> tuple[float, float]:
    """Newton refinement of ``(nu, t)`` on the gradient of ``H``.

    The value-based searches resolve a minimizer only to about the square
    root of machine precision. ``H`` is jointly convex in ``(t, nu)`` (each
    term is the perspective of a convex function), so Newton steps on the
    analytic gradient converge to the joint minimizer; a step that leaves
    the domain or fails to shrink the gradient is rejected.
    """
    pa, pb = pair.p_A, pair.p_B

    def grad_hess(nu, t):
        u, w = t / nu, -t / (1.0 - nu)
        qa, qb = _tilted_mean(pa, u), _tilted_mean(pb, w)
        va, vb = qa * (1.0 - qa), qb * (1.0 - qb)
        g_t = qa - qb
        g_nu = _log_q_plus_p_exp(pa, u) - u * qa - _log_q_plus_p_exp(pb, w) + w * qb
        h_tt = va / nu + vb / (1.0 - nu)
        h_tn = -u * va / nu - w * vb / (1.0 - nu)
        h_nn = u * u * va / nu + w * w * vb / (1.0 - nu)
        return g_t, g_nu, h_tt, h_tn, h_nn

    g_t, g_nu, h_tt, h_tn, h_nn = grad_hess(nu, t)
    size = math.hypot(g_t, g_nu)
    for _ in range(steps):
        det = h_tt * h_nn - h_tn * h_tn
        if not det > 0.0 or size == 0.0:
            break
        d_t = -(h_nn * g_t - h_tn * g_nu) / det
        d_nu = -(h_tt * g_nu - h_tn * g_t) / det
        nu2, t2 = nu + d_nu, t + d_t
        if not (0.0 < nu2 < 1.0 and t2 > 0.0):
            break
        cand = grad_hess(nu2, t2)
        new_size = math.hypot(cand[0], cand[1])
        if not new_size < size:
            break
        nu, t, size = nu2, t2, new_size
        g_t, g_nu, h_tt, h_tn, h_nn = cand
    return nu, t


# ---------------------------------------------------------------------------
# MTD selection
# ---------------------------------------------------------------------------

def _mtd_objective(t: float, nu: float, spec: MtdSpec) -> float:
    return (
        nu * _log_q_plus_p_exp(spec.p_A, t / nu)
        + (1.0 - nu) * _log_q_plus_p_exp(spec.p_B, t / (1.0 - nu))
        - 2.0 * spec.p0 * t
    )


def mtd_rate(nu: float, spec: MtdSpec) -> tuple[float, float]:
    """Decay rate ``psi(nu)`` of ``P[(p_hat_A + p_hat_B)/2 >= p0]``."""
    _check_nu(nu)
    if not (spec.p_A + spec.p_B) / 2.0 < spec.p0:
        raise DomainError("need (p_A + p_B)/2 < p0 for a large-deviation event")
    t, psi = minimize_convex(lambda t: _mtd_objective(t, nu, spec), REAL_LINE, T_TOL)
    return psi, t


def mtd_bahadur_allocation(spec: MtdSpec, tol: float = NU_TOL) -> RateResult:
    """Allocation minimizing ``psi``."""
    nu, psi = minimize_convex(lambda v: mtd_rate(v, spec)[0], UNIT, tol)
    return RateResult(nu, psi, mtd_rate(nu, spec)[1])


# ---------------------------------------------------------------------------
# General responses
# ---------------------------------------------------------------------------

def _oriented(models: Sequence[MgfModel]) -> tuple[MgfModel, MgfModel, bool]:
    a, b = models
    if a.mean == b.mean:
        raise DomainError("rate undefined for equal means")
    if a.mean > b.mean:
        return b, a, True
    return a, b, False


def _admissible_t(nu: float, a: MgfModel, b: MgfModel) -> Interval:
    # t/nu must stay below a's upper MGF limit, -t/(1-nu) above b's lower one
    hi = min(nu * a.mgf_domain.hi, -(1.0 - nu) * b.mgf_domain.lo)
    if not hi > 0.0:
        raise DomainError("no admissible t > 0 for these moment generating functions")
    return Interval(0.0, hi)


def general_rate(nu: float, models: Sequence[MgfModel]) -> tuple[float, float]:
    """``h(nu)``: decay rate of ``P(mean_A_hat >= mean_B_hat)`` when B has the larger mean."""
    _check_nu(nu)
    a, b, flipped = _oriented(models)
    if flipped:
        nu = 1.0 - nu

    def objective(t: float) -> float:
        return nu * a.log_mgf(t / nu) + (1.0 - nu) * b.log_mgf(-t / (1.0 - nu))

    t, h = minimize_convex(objective, _admissible_t(nu, a, b), T_TOL)
    return h, t


def general_bahadur_allocation(models: Sequence[MgfModel], tol: float = NU_TOL) -> RateResult:
    """Allocation of arm A minimizing ``h``."""
    a, b, flipped = _oriented(models)
    nu, h = minimize_convex(lambda v: general_rate(v, (a, b))[0], UNIT, tol)
    t = general_rate(nu, (a, b))[1]
    if flipped:
        nu = 1.0 - nu
    return RateResult(nu, h, t)


def normal_rate(nu: float, mu_A: float, var_A: float, mu_B: float, var_B: float) -> float:
    """Closed-form ``h(nu)`` for normal responses."""
    _check_nu(nu)
    return -((mu_B - mu_A) ** 2) / (2.0 * (var_A / nu + var_B / (1.0 - nu)))
