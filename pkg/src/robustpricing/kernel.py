"""Closed-form kernels shared by every solver in the package.

The whole library runs on one family of survival curves: generalized Pareto
tails indexed by a shape parameter ``alpha`` in [0, 1] (``alpha = 0`` gives
the heavy 1/(1+v) tail of regular demand, ``alpha = 1`` the exponential tail
of monotone-hazard-rate demand).  This module provides that survival function,
its inverse, the two-anchor interpolation built from it, the Lambert W
function used by the exponential closed forms, and the admissible range of
oracle prices implied by one observed (price, conversion-rate) point.

Scalar arguments are floats; ``gpd_survival``, ``gpd_inverse`` and
``bridge_survival`` also broadcast over numpy arrays in their point argument.
All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this distance from 1, the closed power-form branch of the generalized
# Pareto map is numerically indistinguishable from the exponential branch
# (formula jump < 1e-8); we switch branches there rather than exactly at 1.
ALPHA_EXP_THRESHOLD = 1.0 - 1e-9


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class Anchor:
    """One (price, survival) point a survival curve is pinned to."""

    price: float
    survival: float

    def __post_init__(self) -> None:
        if self.price < 0.0:
            raise DomainError(f"anchor price must be >= 0, got {self.price}")
        if not 0.0 < self.survival <= 1.0:
            raise DomainError(
                f"anchor survival must lie in (0, 1], got {self.survival}"
            )


def gpd_survival(alpha: float, v):
    """Survival function of the unit generalized Pareto tail.

    Returns ``(1 + (1-alpha) v)**(-1/(1-alpha))`` for ``alpha < 1`` and
    ``exp(-v)`` at ``alpha = 1``; the first branch converges to the second as
    ``alpha -> 1``, so the function itself is continuous in ``alpha`` even
    though the formula switches.  ``v = +inf`` maps to 0.
    """
    alpha = _check_alpha(alpha)
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0.0):
        raise DomainError("gpd_survival requires v >= 0")
    if alpha >= ALPHA_EXP_THRESHOLD:
        out = np.exp(-v_arr)
    else:
        # exp/log1p form stays accurate for alpha near 1 and large v.
        with np.errstate(over="ignore"):
            out = np.exp(-np.log1p((1.0 - alpha) * v_arr) / (1.0 - alpha))
    out = np.where(np.isinf(v_arr), 0.0, out)
    return float(out) if np.isscalar(v) or np.ndim(v) == 0 else out


def gpd_inverse(alpha: float, y):
    """Inverse of :func:`gpd_survival` on (0, 1], with ``y = 0`` mapping to +inf."""
    alpha = _check_alpha(alpha)
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr < 0.0) | (y_arr > 1.0)):
        raise DomainError("gpd_inverse requires y in [0, 1]")
    with np.errstate(divide="ignore", over="ignore"):
        if alpha >= ALPHA_EXP_THRESHOLD:
            out = -np.log(y_arr)
        else:
            # (y**-(1-alpha) - 1)/(1-alpha) via expm1 for accuracy near y = 1.
            out = np.expm1(-(1.0 - alpha) * np.log(y_arr)) / (1.0 - alpha)
    out = np.where(y_arr == 0.0, np.inf, out)
    return float(out) if np.isscalar(y) or np.ndim(y) == 0 else out


def bridge_survival(alpha: float, lo: Anchor, hi: Anchor, v):
    """Generalized Pareto survival curve pinned to two anchors.

    This is the extremal alpha-strongly-regular tail through ``lo`` and
    ``hi``: it equals ``lo.survival`` at ``lo.price``, ``hi.survival`` at
    ``hi.price``, and extends beyond ``hi.price`` along the same tail.  It
    bounds every curve of the class from below between the anchors and from
    above beyond them (single-crossing).

    Defined for ``v >= lo.price``; the value at ``v = lo.price`` is the
    continuity closure ``lo.survival``.
    """
    alpha = _check_alpha(alpha)
    if lo.price >= hi.price:
        raise DomainError(
            f"anchors must have lo.price < hi.price, got {lo.price} >= {hi.price}"
        )
    if hi.survival > lo.survival + 1e-15:
        raise DomainError("anchor survival must be nonincreasing in price")
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < lo.price - 1e-12 * max(1.0, lo.price)):
        raise DomainError("bridge_survival requires v >= lo.price")
    ratio = min(hi.survival / lo.survival, 1.0)
    slope = gpd_inverse(alpha, ratio)  # +inf when hi.survival == 0 is impossible here
    t = np.maximum(v_arr - lo.price, 0.0) / (hi.price - lo.price)
    out = lo.survival * gpd_survival(alpha, slope * t)
    return float(out) if np.isscalar(v) or np.ndim(v) == 0 else out


def lambert_w(x: float) -> float:
    """Principal Lambert W on [0, inf): the w >= 0 with ``w * exp(w) = x``.

    Halley iteration from the starting point ``log(1 + x)``; converges to
    machine precision in a handful of steps for all nonnegative x.
    """
    x = float(x)
    if x < 0.0:
        raise DomainError(f"lambert_w requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    w = math.log1p(x)
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        # Halley step: f / (f'(w) - f * f''(w) / (2 f'(w)))
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0))
        step = f / denom
        w -= step
        if abs(step) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def reserve_bounds(alpha: float, w: float, q: float) -> tuple[float, float]:
    """Smallest and largest oracle price consistent with conversion rate q at w.

    Returns ``(r_lo, r_hi)`` with ``r_lo = w / (G + 1)`` and
    ``r_hi = w / (alpha * G)`` where ``G`` is :func:`gpd_inverse` of q.
    ``r_hi`` is +inf exactly when ``alpha = 0``.  For exponential-like classes
    with a small conversion rate, ``r_hi`` can fall below ``w``; that means no
    admissible worst case places its oracle price above the incumbent price,
    and the above-price branch of every solver is empty.
    """
    alpha = _check_alpha(alpha)
    if w <= 0.0:
        raise DomainError(f"incumbent price w must be > 0, got {w}")
    if not 0.0 < q < 1.0:
        raise DomainError(f"conversion rate q must lie strictly in (0, 1), got {q}")
    g = gpd_inverse(alpha, q)
    r_lo = w / (g + 1.0)
    r_hi = math.inf if alpha == 0.0 else w / (alpha * g)
    return r_lo, r_hi


def bridge_virtual_value(alpha: float, lo: Anchor, hi: Anchor) -> float:
    """The constant alpha-virtual value of the two-anchor bridge curve.

    Equals ``(1-alpha) * lo.price - (hi.price - lo.price) / G`` with ``G``
    the inverse tail map at the survival ratio.  A finite-difference virtual
    value of :func:`bridge_survival` reproduces this constant at any interior
    point.
    """
    alpha = _check_alpha(alpha)
    if lo.price >= hi.price:
        raise DomainError("anchors must have lo.price < hi.price")
    if hi.survival > lo.survival + 1e-15:
        raise DomainError("anchor survival must be nonincreasing in price")
    slope = gpd_inverse(alpha, min(hi.survival / lo.survival, 1.0))
    if slope == 0.0:
        return -math.inf
    return (1.0 - alpha) * lo.price - (hi.price - lo.price) / slope


def gpd_revenue_peak(alpha: float, beta: float, w: float) -> float:
    """Price maximizing the revenue curve ``v * gpd_survival(alpha, beta*(v-w))``.

    The curve is unimodal; its peak sits at
    ``max((1 - (1-alpha) beta w) / (beta alpha), w - 1/((1-alpha) beta))``
    with the alpha = 0 and alpha = 1 branches taken as limits (the peak is
    +inf when alpha = 0 and the first branch is active, i.e. the curve keeps
    increasing).
    """
    alpha = _check_alpha(alpha)
    if beta <= 0.0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if w < 0.0:
        raise DomainError(f"w must be >= 0, got {w}")
    if alpha == 0.0:
        return math.inf if 1.0 - beta * w > 0.0 else w - 1.0 / beta
    if alpha >= ALPHA_EXP_THRESHOLD:
        return 1.0 / beta
    first = (1.0 - (1.0 - alpha) * beta * w) / (beta * alpha)
    second = w - 1.0 / ((1.0 - alpha) * beta)
    return max(first, second)
