"""Optimal allocation fractions and exact Wald-test power for two-arm trials."""

__version__ = "0.1.0"

from .numerics import (  # noqa: E402
    DomainError,
    Interval,
    OptimizationError,
    QuadraticFit,
    SingularSystemError,
    fit_quadratic,
    log_binomial_pmf,
    minimize_convex,
    normal_cdf,
    normal_quantile,
)
from .models import MgfModel, SuccessPair, make_model, parse_model, sample  # noqa: E402
from .asymptotic import (  # noqa: E402
    H,
    MtdSpec,
    PitmanScenario,
    RateResult,
    bahadur_allocation_closed_form,
    bahadur_allocation_numeric,
    bahadur_rate,
    general_bahadur_allocation,
    general_rate,
    mtd_bahadur_allocation,
    mtd_neyman_allocation,
    mtd_pitman_limit,
    mtd_rate,
    neyman_allocation,
    pitman_limit,
)
from .exact import (  # noqa: E402
    Design,
    PowerCurve,
    TestSpec,
    exact_mtd_error,
    exact_power,
    minimal_sample_size,
    monte_carlo_selection_error,
    optimal_allocation_exact,
    wald_statistic,
)
