"""Factor-revealing linear programs bracketing the randomized maximin ratio.

The randomized pricing problem is infinite-dimensional on both sides; after
the worst-case reduction it is approximated by finite LPs on a price grid.
The lower program maximizes a guarantee ``c`` over discrete mechanisms whose
atoms live on the grid, under one ratio constraint per worst-case cell —
its optimum is a true lower bound on the maximin ratio, and its solution is a
concrete mechanism certified at that level.  A companion upper program bounds
the ratio from above, so the pair brackets the truth; with the production grid
(N=2500, eta=1e-5, b=250) the bracket is about one percentage point wide.

Rate-interval instances use the same machinery: below-price constraints bind
at the interval's lower rate, above-price constraints at its upper rate.

Everything is built at normalized incumbent price 1; mechanisms are rescaled
on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .kernel import Anchor, DomainError, bridge_survival, gpd_inverse, gpd_survival
from .mechanism import Mechanism
from .worstcase import PricingContext

# Production default parameters: grid size, top-of-grid offset below the
# incumbent price, and the cap on how far above it the grid reaches.
DEFAULT_N = 2500
DEFAULT_ETA = 1e-5
DEFAULT_B = 250.0


@dataclass(frozen=True)
class PriceGrid:
    """Normalized price grid: a lower block on [r_lo, 1-eta], the point 1,
    and (unless collapsed) an upper block on (1, min(b, r_hi)]."""

    points: np.ndarray
    n: int
    eta: float
    b: float
    split_index: int  # index of the point equal to 1

    @property
    def max_gap(self) -> float:
        return float(np.diff(self.points).max())

    @property
    def collapsed(self) -> bool:
        """True when no admissible worst case sits above the incumbent price."""
        return self.points.size == self.split_index + 1


@dataclass(frozen=True)
class LpBounds:
    """Bracket on the maximin ratio plus the certified mechanism.

    ``certificate_cap`` is the largest oracle price the lower program
    explicitly guards against (in incumbent-price units); the nature oracle
    reproduces ``lower`` when evaluated up to that cap.  ``truncation`` bounds
    what the remaining tail could cost (zero when the range was covered).
    """

    lower: float
    upper: float | None
    mechanism: Mechanism
    grid: PriceGrid
    certificate_cap: float | None
    truncation: float


def build_grid(
    ctx: PricingContext,
    n: int = DEFAULT_N,
    eta: float = DEFAULT_ETA,
    b: float = DEFAULT_B,
) -> PriceGrid:
    """Grid of 2n+2 normalized prices (n+2 when the upper block collapses).

    Lower block: n+1 evenly spaced points from the lowest admissible oracle
    price up to 1-eta.  Upper block: n+1 evenly spaced points from 1 up to
    min(b, r_hi).  When r_hi <= 1+eta there are no worst cases above the
    incumbent price and the upper block degenerates to the single point 1.
    """
    if n < 2:
        raise DomainError(f"grid size n must be >= 2, got {n}")
    r_lo, r_hi = ctx.reserve_range()
    r_lo /= ctx.w
    r_hi /= ctx.w
    if not 0.0 < eta < 1.0 - r_lo:
        raise DomainError(f"eta must lie in (0, {1.0 - r_lo}), got {eta}")
    if b <= 1.0:
        raise DomainError(f"cap b must exceed 1 (normalized), got {b}")
    lower = r_lo + (np.arange(n + 1) / n) * (1.0 - eta - r_lo)
    top = min(b, r_hi)
    if top <= 1.0 + eta:
        points = np.concatenate([lower, [1.0]])
    else:
        upper = 1.0 + (np.arange(n + 1) / n) * (top - 1.0)
        points = np.concatenate([lower, upper])
    return PriceGrid(points=points, n=n, eta=eta, b=b, split_index=n + 1)


def _left_rows(alpha: float, q_lo: float, grid: PriceGrid, shifted: bool) -> np.ndarray:
    """Below-price ratio rows; ``shifted`` selects the upper-program variant
    (cell masses at cell tops, bridge anchored one point higher, divisor one
    point lower)."""
    a = grid.points
    n = grid.n
    k = a.size
    slope = gpd_inverse(alpha, q_lo)
    rows = np.zeros((n + 1, k))
    for i in range(n + 1):
        anchor = a[i + 1] if shifted else a[i]
        row = np.zeros(k)
        if shifted:
            row[: i + 1] = a[1 : i + 2]
        else:
            row[: i + 1] = a[: i + 1]
        if i + 1 <= n:
            tail = a[i + 1 : n + 1]
            t = np.clip((tail - anchor) / (1.0 - anchor), 0.0, None)
            row[i + 1 : n + 1] = tail * gpd_survival(alpha, slope * t)
        rows[i] = row / (a[i] if shifted else a[i + 1])
    return rows


def _right_rows(alpha: float, q_hi: float, grid: PriceGrid, shifted: bool) -> np.ndarray:
    """Above-price ratio rows (empty for collapsed grids)."""
    a = grid.points
    n = grid.n
    k = a.size
    if grid.collapsed:
        return np.zeros((0, k))
    rev = a * bridge_survival(alpha, Anchor(0.0, 1.0), Anchor(1.0, q_hi), a)
    rows = np.zeros((n - 1, k))
    for idx, i in enumerate(range(n + 1, 2 * n)):
        row = np.zeros(k)
        if shifted:
            row[:i] = rev[1 : i + 1] / rev[i]
        else:
            row[: i + 1] = rev[: i + 1] / rev[i + 1]
        rows[idx] = row
    return rows


def _tail_row(alpha: float, q_hi: float, grid: PriceGrid) -> np.ndarray:
    """Upper-program guard for worst cases beyond the last grid point."""
    a = grid.points
    k = a.size
    rev = a * bridge_survival(alpha, Anchor(0.0, 1.0), Anchor(1.0, q_hi), a)
    if alpha == 0.0:
        tail_rev = q_hi / (1.0 - q_hi)  # sup of the increasing revenue curve
    else:
        r_hi = 1.0 / (alpha * gpd_inverse(alpha, q_hi))
        tail_rev = r_hi * bridge_survival(alpha, Anchor(0.0, 1.0), Anchor(1.0, q_hi), r_hi)
    row = np.zeros(k)
    row[:-1] = rev[1:]
    row[-1] = tail_rev
    return row / rev[-1]


def _maximize_floor(rows: np.ndarray, backend: str) -> tuple[float, np.ndarray]:
    """max c s.t. rows @ p >= c per row, sum(p) <= 1, p >= 0."""
    n_rows, k = rows.shape
    a_ub = np.zeros((n_rows + 1, k + 1))
    a_ub[:n_rows, :k] = -rows
    a_ub[:n_rows, k] = 1.0
    a_ub[n_rows, :k] = 1.0
    b_ub = np.zeros(n_rows + 1)
    b_ub[n_rows] = 1.0
    objective = np.zeros(k + 1)
    objective[k] = 1.0
    sol = simplex.solve(simplex.LpModel(objective, a_ub, b_ub), backend=backend)
    if sol.status != simplex.OPTIMAL:
        raise RuntimeError(
            f"factor-revealing LP unexpectedly {sol.status}; p=0, c=0 is always feasible"
        )
    probs = np.maximum(sol.primal[:k], 0.0)
    total = probs.sum()
    if total > 1.0:
        probs /= total
    return float(sol.objective_value), probs


def _truncation_term(ctx: PricingContext, grid: PriceGrid) -> float:
    """Guarantee possibly hiding beyond the grid cap (zero if range covered)."""
    _, r_hi = ctx.reserve_range()
    cap = grid.points[-1] * ctx.w
    if grid.collapsed or cap >= r_hi:
        return 0.0
    q = ctx.q_hi
    return 1.0 / (q * (1.0 + (1.0 / q - 1.0) * grid.points[-1]))


def lower_lp(ctx: PricingContext, grid: PriceGrid, backend: str = "auto") -> LpBounds:
    """Lower program: a certified guarantee and the mechanism achieving it.

    Every feasible point is a playable mechanism whose worst-case ratio over
    the whole class is at least ``c``; the optimum is the best such guarantee
    on this grid.  Ratio constraints cover oracle prices up to the
    second-to-last grid point; that point is the certificate cap.
    """
    rows_l = _left_rows(ctx.alpha, ctx.q_lo, grid, shifted=False)
    rows_r = _right_rows(ctx.alpha, ctx.q_hi, grid, shifted=False)
    rows = np.vstack([rows_l, rows_r])
    _, probs = _maximize_floor(rows, backend)
    # Report what the returned mechanism provably achieves, not the solver's
    # objective: solver feasibility slop would otherwise leak into the bound.
    value = float((rows @ probs).min())
    mech = Mechanism(grid.points * ctx.w, probs).support()
    cap = None if grid.collapsed else float(grid.points[-2] * ctx.w)
    return LpBounds(
        lower=value,
        upper=None,
        mechanism=mech,
        grid=grid,
        certificate_cap=cap,
        truncation=_truncation_term(ctx, grid),
    )


def upper_lp(ctx: PricingContext, grid: PriceGrid, backend: str = "auto") -> float:
    """Upper program: no mechanism (grid-supported or not) can beat this."""
    rows = [_left_rows(ctx.alpha, ctx.q_lo, grid, shifted=True)]
    if not grid.collapsed:
        rows.append(_right_rows(ctx.alpha, ctx.q_hi, grid, shifted=True))
        rows.append(_tail_row(ctx.alpha, ctx.q_hi, grid)[None, :])
    value, _ = _maximize_floor(np.vstack(rows), backend)
    return value


def solve_bounds(ctx: PricingContext, grid: PriceGrid, backend: str = "auto") -> LpBounds:
    """Lower and upper program together: the full bracket plus certificate."""
    lo = lower_lp(ctx, grid, backend)
    up = upper_lp(ctx, grid, backend)
    return LpBounds(
        lower=lo.lower,
        upper=up,
        mechanism=lo.mechanism,
        grid=grid,
        certificate_cap=lo.certificate_cap,
        truncation=lo.truncation,
    )


def interval_lp(ctx: PricingContext, grid: PriceGrid, backend: str = "auto") -> LpBounds:
    """Bracket under rate-interval uncertainty (requires an interval context)."""
    if ctx.is_point:
        raise DomainError("interval_lp expects an interval context; use lower_lp")
    return solve_bounds(ctx, grid, backend)


def wald_interval(q_hat: float, samples: int) -> tuple[float, float]:
    """95% normal-approximation interval for a conversion rate estimated from
    ``samples`` buy/no-buy observations.  Errors out if the interval touches
    0 or 1, where no positive guarantee exists."""
    if not 0.0 < q_hat < 1.0:
        raise DomainError(f"q_hat must lie strictly in (0, 1), got {q_hat}")
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    half = 1.96 * math.sqrt(q_hat * (1.0 - q_hat) / samples)
    lo, hi = q_hat - half, q_hat + half
    if lo <= 0.0 or hi >= 1.0:
        raise DomainError(
            f"interval [{lo:.6g}, {hi:.6g}] touches the degenerate boundary; "
            "more samples are needed for a meaningful guarantee"
        )
    return lo, hi
