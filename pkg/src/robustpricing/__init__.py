"""Robust pricing from a single historical price point.

Given a tail-class parameter alpha in [0, 1] (0 = regular demand, 1 =
monotone hazard rate), an incumbent price w, and the conversion rate q
observed at w (exactly or to an interval), this package computes the best
guaranteed fraction of full-information revenue: exact closed forms for a
single posted price, and LP-bracketed guarantees with explicit near-optimal
randomized price distributions.
"""

from .deterministic import (
    DeterministicSolution,
    q_hat_mhr,
    solve_deterministic,
    solve_general,
    solve_mhr,
    solve_regular,
)
from .kernel import (
    Anchor,
    DomainError,
    bridge_survival,
    bridge_virtual_value,
    gpd_inverse,
    gpd_revenue_peak,
    gpd_survival,
    lambert_w,
    reserve_bounds,
)
from .lp import (
    LpBounds,
    PriceGrid,
    build_grid,
    interval_lp,
    lower_lp,
    solve_bounds,
    upper_lp,
    wald_interval,
)
from .mechanism import (
    EvaluationReport,
    Mechanism,
    log_uniform_mechanism,
    nature_worst_case,
    revenue_ratio,
    tail_weighted_mechanism,
)
from .worstcase import PricingContext, WorstCaseDistribution, family_grid

__all__ = [
    "Anchor",
    "DeterministicSolution",
    "DomainError",
    "EvaluationReport",
    "LpBounds",
    "Mechanism",
    "PriceGrid",
    "PricingContext",
    "WorstCaseDistribution",
    "bridge_survival",
    "bridge_virtual_value",
    "build_grid",
    "family_grid",
    "gpd_inverse",
    "gpd_revenue_peak",
    "gpd_survival",
    "interval_lp",
    "lambert_w",
    "log_uniform_mechanism",
    "lower_lp",
    "nature_worst_case",
    "q_hat_mhr",
    "reserve_bounds",
    "revenue_ratio",
    "solve_bounds",
    "solve_deterministic",
    "solve_general",
    "solve_mhr",
    "solve_regular",
    "tail_weighted_mechanism",
    "upper_lp",
    "wald_interval",
]

__version__ = "0.1.0"
