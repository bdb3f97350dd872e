"""Exact finite-sample computations by enumerating binomial outcome tables.

Every probability here is a deterministic sum over the joint distribution
of the two arm totals; Monte Carlo counterparts are provided as
independent oracles and for responses that cannot be enumerated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .asymptotic import MtdSpec, general_rate
from .models import MgfModel, SuccessPair, make_rng, sample_means, tilted
from .numerics import DomainError, binomial_pmf_vector, normal_quantile

_MC_CHUNK = 1 << 20


@dataclass(frozen=True)
class TestSpec:
    """Critical value and sidedness of the Wald test.

    One-sided rejects when ``W > K``; two-sided when ``W^2 > K^2``.
    """

    __test__ = False  # keep pytest from collecting this class

    K: float
    sided: str = "two"

    def __post_init__(self):
        if self.sided not in ("one", "two"):
            raise DomainError(f"sided must be 'one' or 'two', got {self.sided!r}")
        if self.sided == "two" and not self.K > 0:
            raise DomainError("two-sided test needs K > 0")
        if self.sided == "one" and not self.K >= 0:
            raise DomainError("one-sided test needs K >= 0")

    @property
    def two_sided(self) -> bool:
        return self.sided == "two"

    @classmethod
    def one_sided_level(cls, alpha: float) -> "TestSpec":
        return cls(normal_quantile(1.0 - alpha), "one")


@dataclass(frozen=True)
class Design:
    """Group sizes of a two-arm trial."""

    N_A: int
    N_B: int

    def __post_init__(self):
        if self.N_A < 1 or self.N_B < 1:
            raise DomainError(f"both arms need at least one subject, got {self.N_A}, {self.N_B}")

    @property
    def n(self) -> int:
        return self.N_A + self.N_B

    @property
    def nu(self) -> float:
        return self.N_A / self.n

    @classmethod
    def split(cls, n: int, N_A: int) -> "Design":
        if n < 2 or not 1 <= N_A <= n - 1:
            raise DomainError(f"need n >= 2 and 1 <= N_A <= n-1, got n={n}, N_A={N_A}")
        return cls(N_A, n - N_A)

    @classmethod
    def from_fraction(cls, n: int, nu: float) -> "Design":
        return cls.split(n, allocation_count(n, nu))


@dataclass(frozen=True)
class PowerCurve:
    """Exact power (or error probability) at each arm-A size for fixed ``n``."""

    n: int
    N_A: np.ndarray
    power: np.ndarray
    # complement of ``power`` summed directly; keeps full relative precision
    # when power rounds to 1
    complement: Optional[np.ndarray] = None

    @property
    def nu(self) -> np.ndarray:
        return self.N_A / self.n

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.N_A.tolist(), self.power.tolist()))

    def at(self, N_A: int) -> float:
        idx = np.searchsorted(self.N_A, N_A)
        if idx >= self.N_A.size or self.N_A[idx] != N_A:
            raise KeyError(N_A)
        return float(self.power[idx])


def allocation_count(n: int, nu: float) -> int:
    """Arm-A size for fraction ``nu``: ``floor(n nu + 1/2)`` clamped to ``[1, n-1]``."""
    if n < 2:
        raise DomainError("need n >= 2")
    return min(max(int(math.floor(n * nu + 0.5)), 1), n - 1)


def wald_statistic(y_A: int, N_A: int, y_B: int, N_B: int) -> float:
    """Standardized difference ``p_hat_B - p_hat_A`` with plug-in variance.

    A zero plug-in variance yields 0 for equal proportions and a signed
    infinity otherwise.
    """
    if not (0 <= y_A <= N_A and 0 <= y_B <= N_B and N_A >= 1 and N_B >= 1):
        raise DomainError("need 0 <= y <= N and N >= 1 in both arms")
    pa, pb = y_A / N_A, y_B / N_B
    var = pa * (1.0 - pa) / N_A + pb * (1.0 - pb) / N_B
    diff = pb - pa
    if var > 0.0:
        return diff / math.sqrt(var)
    if diff > 0.0:
        return math.inf
    if diff < 0.0:
        return -math.inf
    return 0.0


def _power_masses(pair: SuccessPair, design: Design, test: TestSpec) -> tuple[float, float]:
    na, nb, pa, pb, sign = design.N_A, design.N_B, pair.p_A, pair.p_B, 1.0
    # exchanging the arms negates W exactly; always enumerate in one
    # canonical orientation so swapped inputs give bit-identical sums
    if (na, pa) > (nb, pb):
        na, nb, pa, pb, sign = nb, na, pb, pa, -1.0
    return _kernels.wald_power(
        binomial_pmf_vector(na, pa), binomial_pmf_vector(nb, pb), na, nb, test.K, test.two_sided, sign
    )


def exact_power(pair: SuccessPair, design: Design, test: TestSpec) -> float:
    """Probability that the Wald test rejects, summed over all outcomes."""
    return _power_masses(pair, design, test)[0]


def exact_type2_error(pair: SuccessPair, design: Design, test: TestSpec) -> float:
    """Probability of not rejecting, summed directly (accurate when tiny)."""
    return _power_masses(pair, design, test)[1]


def outcome_table_mass(pair: SuccessPair, design: Design, test: TestSpec) -> float:
    """Rejection plus acceptance mass; equals one up to rounding."""
    r, a = _power_masses(pair, design, test)
    return r + a


def _parallel_map(fn: Callable, items: Sequence) -> list:
    workers = min(_kernels.thread_cap(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _pick(N_A: np.ndarray, values: np.ndarray, n: int, maximize: bool) -> int:
    # best value; ties go to the size nearest n/2, then to the smaller size
    best = values.max() if maximize else values.min()
    tied = N_A[values == best]
    order = sorted(tied.tolist(), key=lambda k: (abs(2 * k - n), k))
    return order[0]


def power_curve(pair: SuccessPair, n: int, test: TestSpec, N_A: Optional[Iterable[int]] = None) -> PowerCurve:
    sizes = np.arange(1, n) if N_A is None else np.array(sorted(set(N_A)), dtype=np.int64)
    if sizes.size == 0 or sizes[0] < 1 or sizes[-1] > n - 1:
        raise DomainError("arm-A sizes must lie in 1..n-1")
    masses = np.array(_parallel_map(lambda k: _power_masses(pair, Design.split(n, int(k)), test), sizes))
    return PowerCurve(n, sizes, masses[:, 0].copy(), masses[:, 1].copy())


def optimal_allocation_exact(
    pair: SuccessPair, n: int, test: TestSpec, min_arm: int = 2
) -> tuple[int, float, PowerCurve]:
    """Exhaustive search over ``N_A = min_arm..n-min_arm`` for the most powerful design.

    With a single subject in one arm that arm's plug-in variance is zero
    for every outcome, so ``|W|`` is inflated and the test rejects almost
    surely whatever the effect size. The default ``min_arm=2`` leaves those
    two designs out of the search; ``min_arm=1`` scans all of ``1..n-1``.

    Designs are ranked by their type-II error rather than by power, so the
    search stays meaningful when power rounds to one.
    """
    if not 1 <= min_arm <= n // 2:
        raise DomainError(f"min_arm must lie in 1..{n // 2}")
    curve = power_curve(pair, n, test, range(min_arm, n - min_arm + 1))
    best = _pick(curve.N_A, curve.complement, n, maximize=False)
    return best, curve.at(best), curve


def _mtd_masses(spec: MtdSpec, design: Design) -> tuple[float, float]:
    na, nb = design.N_A, design.N_B
    target = 2.0 * spec.p0 * na * nb
    # integer form of (y_A/N_A + y_B/N_B)/2 >= p0; the nudge absorbs
    # rounding when 2 p0 N_A N_B is an integer
    c = math.ceil(target - 1e-9 * max(1.0, target))
    return _kernels.mtd_probability(
        binomial_pmf_vector(na, spec.p_A), binomial_pmf_vector(nb, spec.p_B), na, nb, c
    )


def exact_mtd_error(spec: MtdSpec, design: Design) -> float:
    """``P[(p_hat_A + p_hat_B)/2 >= p0]``, the chance of wrongly picking dose A."""
    return _mtd_masses(spec, design)[0]


def optimal_mtd_allocation_exact(spec: MtdSpec, n: int) -> tuple[int, float, PowerCurve]:
    """Arm-A size minimizing the exact MTD selection error."""
    sizes = np.arange(1, n)
    errs = np.array(_parallel_map(lambda k: exact_mtd_error(spec, Design.split(n, int(k))), sizes))
    curve = PowerCurve(n, sizes, errs)
    best = _pick(sizes, errs, n, maximize=False)
    return best, curve.at(best), curve


AllocationRule = Callable[[int], float]


def balanced(n: int) -> float:
    return 0.5


def constant_rule(nu: float) -> AllocationRule:
    if not 0.0 < nu < 1.0:
        raise DomainError("allocation fraction must lie in (0, 1)")

    def rule(n: int) -> float:
        return nu

    return rule


def minimal_sample_size(
    pair: SuccessPair,
    alpha: float,
    beta: float,
    allocation_rule: AllocationRule = balanced,
    n_max: int = 10_000,
    stable_window: int = 1,
    n_min: int = 2,
) -> Optional[int]:
    """Smallest ``n`` whose one-sided level-``alpha`` Wald test has power ``>= beta``.

    Power is exact and at critical value ``z_{1-alpha}``. Because exact
    power is sawtoothed in ``n``, ``stable_window > 1`` additionally demands
    that the requirement hold for that many consecutive ``n``; the first
    ``n`` of such a run is returned. Returns ``None`` when no ``n <= n_max``
    qualifies.
    """
    if not 0.0 < alpha < beta < 1.0:
        raise DomainError("need 0 < alpha < beta < 1")
    if stable_window < 1:
        raise DomainError("stable_window must be >= 1")
    test = TestSpec.one_sided_level(alpha)
    run_start, run = None, 0
    for n in range(max(2, n_min), n_max + 1):
        design = Design.from_fraction(n, allocation_rule(n))
        if exact_power(pair, design, test) >= beta:
            if run == 0:
                run_start = n
            run += 1
            if run >= stable_window:
                return run_start
        else:
            run = 0
    return None


# ---------------------------------------------------------------------------
# Monte Carlo oracles
# ---------------------------------------------------------------------------

def _chunks(reps: int) -> Iterator[int]:
    while reps > 0:
        m = min(reps, _MC_CHUNK)
        yield m
        reps -= m


def _estimate(hits: int, reps: int) -> tuple[float, float]:
    p = hits / reps
    return p, math.sqrt(p * (1.0 - p) / reps)


def monte_carlo_selection_error(
    models: Sequence[MgfModel], design: Design, reps: int, seed: int, tilt: bool = False
) -> tuple[float, float]:
    """Simulated ``P(mean_A_hat >= mean_B_hat)`` and its standard error.

    Plain sampling cannot see probabilities far below ``1/reps``. With
    ``tilt=True`` arm A is sampled under the exponential tilt ``tau/nu`` and
    arm B under ``-tau/(1-nu)``, where ``tau`` is the minimizing tilt of the
    general rate at the design's fraction; each hit is weighted by the exact
    likelihood ratio ``exp(n h - n tau (mean_A_hat - mean_B_hat))``.
    """
    a, b = models
    # equal means are allowed so the null case can be checked against enumeration
    if b.mean < a.mean:
        raise DomainError("arm B must not have the smaller mean")
    if reps < 1:
        raise DomainError("need reps >= 1")
    rng_a, rng_b = make_rng(seed, 0), make_rng(seed, 1)
    if not tilt:
        hits = 0
        for m in _chunks(reps):
            ya = sample_means(a, rng_a, design.N_A, m)
            yb = sample_means(b, rng_b, design.N_B, m)
            hits += int(np.count_nonzero(ya >= yb))
        return _estimate(hits, reps)

    if b.mean == a.mean:
        raise DomainError("tilted sampling needs arm B to have the strictly larger mean")
    nu, n = design.nu, design.n
    h, tau = general_rate(nu, (a, b))
    ta, tb = tilted(a, tau / nu), tilted(b, -tau / (1.0 - nu))
    total = total_sq = 0.0
    for m in _chunks(reps):
        diff = sample_means(ta, rng_a, design.N_A, m) - sample_means(tb, rng_b, design.N_B, m)
        w = np.where(diff >= 0.0, np.exp(n * h - n * tau * diff), 0.0)
        total += math.fsum(w)
        total_sq += math.fsum(w * w)
    est = total / reps
    var = max(total_sq / reps - est * est, 0.0)
    return est, math.sqrt(var / reps)


def monte_carlo_power(
    pair: SuccessPair, design: Design, test: TestSpec, reps: int, seed: int
) -> tuple[float, float]:
    """Simulated Wald-test rejection rate and its standard error."""
    rng_a, rng_b = make_rng(seed, 0), make_rng(seed, 1)
    hits = 0
    for m in _chunks(reps):
        ya = rng_a.binomial(design.N_A, pair.p_A, m)
        yb = rng_b.binomial(design.N_B, pair.p_B, m)
        w = _kernels.wald_statistic_array(ya, design.N_A, yb, design.N_B)
        hit = w * w > test.K * test.K if test.two_sided else w > test.K
        hits += int(np.count_nonzero(hit))
    return _estimate(hits, reps)


def monte_carlo_mtd_error(spec: MtdSpec, design: Design, reps: int, seed: int) -> tuple[float, float]:
    """Simulated ``P[(p_hat_A + p_hat_B)/2 >= p0]`` and its standard error."""
    rng_a, rng_b = make_rng(seed, 0), make_rng(seed, 1)
    na, nb = design.N_A, design.N_B
    hits = 0
    for m in _chunks(reps):
        mean = 0.5 * (rng_a.binomial(na, spec.p_A, m) / na + rng_b.binomial(nb, spec.p_B, m) / nb)
        hits += int(np.count_nonzero(mean >= spec.p0 - 1e-12))
    return _estimate(hits, reps)
