"""Optimal single posted prices and their exact guarantees.

For the two focal tail classes the maximin ratio of a deterministic price has
a closed form with three conversion-rate regimes: at high q the incumbent
price is already optimal, and below that the optimal price deflates the
incumbent.  For intermediate tail classes (alpha strictly between 0 and 1)
no closed form exists; the problem reduces to maximizing, over the posted
price, the minimum of three explicit regime curves, which we solve by a
coarse scan plus golden-section refinement (validated against the closed
forms at the endpoints, not proven globally optimal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernel import (
    ALPHA_EXP_THRESHOLD,
    Anchor,
    DomainError,
    bridge_survival,
    gpd_inverse,
    lambert_w,
)
from .worstcase import PricingContext

LOW_Q = "low"
MID_Q = "mid"
HIGH_Q = "high"

_E_TO_MINUS_INV_E = math.exp(-math.exp(-1.0))


@dataclass(frozen=True)
class DeterministicSolution:
    price: float
    ratio: float
    regime: str
    method: str  # "closed-form" or "search"


def _check_q(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise DomainError(
            f"conversion rate q must lie strictly in (0, 1), got {q} "
            "(no positive guarantee exists at the boundary)"
        )
    return float(q)


def _check_w(w: float) -> float:
    if w <= 0.0:
        raise DomainError(f"incumbent price w must be > 0, got {w}")
    return float(w)


def solve_regular(w: float, q: float) -> DeterministicSolution:
    """Optimal deterministic price against the heavy-tail (regular) class."""
    w, q = _check_w(w), _check_q(q)
    if q <= 0.25:
        ratio = 2.0 * math.sqrt(q) / (1.0 + math.sqrt(q))
        return DeterministicSolution(w * ratio, ratio, LOW_Q, "closed-form")
    if q <= 0.5:
        ratio = (3.0 - 4.0 * q) / (4.0 * (1.0 - q))
        price = w * q * (3.0 - 4.0 * q) / (1.0 - q)
        return DeterministicSolution(price, ratio, MID_Q, "closed-form")
    return DeterministicSolution(w, 1.0 - q, HIGH_Q, "closed-form")


def _beta(q: float, x: float) -> float:
    wx = lambert_w(x)
    return 1.0 - (wx + 1.0 / wx - 2.0) / math.log(1.0 / q)


@lru_cache(maxsize=1)
def q_hat_mhr() -> float:
    """Regime boundary for the exponential-tail class: the unique q with
    ``W(1/log(1/q)) * W(e/q) = 1``.  Bisection to 1e-12; lands in [0.52, 0.53].
    """

    def excess(q: float) -> float:
        return lambert_w(1.0 / math.log(1.0 / q)) * lambert_w(math.e / q) - 1.0

    lo, hi = 0.4, _E_TO_MINUS_INV_E
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12:
            break
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_mhr(w: float, q: float) -> DeterministicSolution:
    """Optimal deterministic price against the exponential-tail (mhr) class."""
    w, q = _check_w(w), _check_q(q)
    eta = math.log(1.0 / q)
    if q <= q_hat_mhr():
        ratio = _beta(q, math.e / q)
        return DeterministicSolution(w * ratio, ratio, LOW_Q, "closed-form")
    if q <= _E_TO_MINUS_INV_E:
        wl = lambert_w(1.0 / eta)
        price_frac = _beta(q, 1.0 / eta)
        ratio = price_frac * (q / math.e) * math.exp(1.0 / wl) / wl
        return DeterministicSolution(w * price_frac, ratio, MID_Q, "closed-form")
    return DeterministicSolution(w, math.e * q * eta, HIGH_Q, "closed-form")


def worst_left_anchor(alpha: float, q: float, p: float) -> float:
    """Oracle price of the binding below-price worst case for posted price p.

    Works in incumbent-price units (w = 1).  The value lies between the
    lowest admissible oracle price and p itself; at p = 1 it equals 1.
    """
    q = _check_q(q)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    g = gpd_inverse(alpha, q)
    r_lo = 1.0 / (g + 1.0)
    if not r_lo - 1e-12 <= p <= 1.0 + 1e-12:
        raise DomainError(f"p must lie in [{r_lo}, 1], got {p}")
    p = min(p, 1.0)
    if p == 1.0:
        return 1.0  # the radical collapses
    qpow = math.exp((alpha - 1.0) * math.log(q))  # q**(alpha-1) >= 1
    d = alpha * g * (1.0 - p)
    radicand_extra = 4.0 * g * (1.0 - p) * qpow
    # sqrt(d^2 + extra) - d, written to avoid cancellation for large d.
    root_minus_d = radicand_extra / (math.sqrt(d * d + radicand_extra) + d)
    return 1.0 - root_minus_d / (2.0 * qpow)


def _alpha_power(alpha: float) -> float:
    """alpha**(alpha/(alpha-1)) with its limits 1 at alpha=0 and e at alpha=1."""
    if alpha == 0.0:
        return 1.0
    if alpha >= ALPHA_EXP_THRESHOLD:
        return math.e
    return alpha ** (alpha / (alpha - 1.0))


def _regime_curves(alpha: float, q: float, p: float) -> tuple[float, float, float]:
    """The three per-regime ratio curves at posted price p (w = 1 units)."""
    hi = Anchor(1.0, q)
    if p >= 1.0:
        below = q
    else:
        mu = worst_left_anchor(alpha, q, p)
        below = bridge_survival(alpha, Anchor(mu, 1.0), hi, p) / mu
    above = (
        _alpha_power(alpha)
        * gpd_inverse(alpha, q)
        * bridge_survival(alpha, Anchor(0.0, 1.0), hi, p)
    )
    return below, 1.0, above


def _min_ratio(alpha: float, q: float, p: float) -> float:
    return p * min(_regime_curves(alpha, q, p))


def solve_general(ctx: PricingContext, tol: float = 1e-9) -> DeterministicSolution:
    """Deterministic maximin price for any alpha in [0, 1], by 1-d search.

    Maximizes ``p * min(three regime curves)`` over the admissible price
    range.  The min-of-curves objective can be non-smooth at crossings, so a
    2048-point coarse scan picks the bracket and golden-section refines it.
    """
    if not ctx.is_point:
        raise DomainError("solve_general requires a point-rate context")
    if tol <= 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    alpha, q = ctx.alpha, ctx.q
    r_lo = 1.0 / (gpd_inverse(alpha, q) + 1.0)
    ps = np.linspace(r_lo, 1.0, 2048)
    vals = np.array([_min_ratio(alpha, q, p) for p in ps])
    k = int(vals.argmax())
    lo = ps[max(k - 1, 0)]
    hi = ps[min(k + 1, ps.size - 1)]

    inv_golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - inv_golden * (b - a)
    d = a + inv_golden * (b - a)
    fc, fd = _min_ratio(alpha, q, c), _min_ratio(alpha, q, d)
    for _ in range(200):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_golden * (b - a)
            fc = _min_ratio(alpha, q, c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_golden * (b - a)
            fd = _min_ratio(alpha, q, d)
    p_star, ratio = (c, fc) if fc >= fd else (d, fd)
    if vals[k] > ratio:
        p_star, ratio = float(ps[k]), float(vals[k])

    below, flat, above = _regime_curves(alpha, q, p_star)
    curves = {LOW_Q: below, MID_Q: flat, HIGH_Q: above}
    regime = min(curves, key=curves.get)
    return DeterministicSolution(ctx.w * p_star, float(ratio), regime, "search")


def solve_deterministic(ctx: PricingContext, tol: float = 1e-9) -> DeterministicSolution:
    """Closed form for the two focal classes, 1-d search otherwise."""
    if not ctx.is_point:
        raise DomainError("deterministic solves require a point-rate context")
    if ctx.alpha == 0.0:
        return solve_regular(ctx.w, ctx.q)
    if ctx.alpha >= ALPHA_EXP_THRESHOLD:
        return solve_mhr(ctx.w, ctx.q)
    return solve_general(ctx, tol)
