"""Discrete randomized price mechanisms and nature's exact best response.

A mechanism is a sub-probability distribution over posted prices.  Its
guaranteed fraction of oracle revenue against the whole admissible class
equals its worst ratio over the reduced one-parameter worst-case family, so
evaluating a mechanism means a one-dimensional minimization over the oracle
price r.  ``nature_worst_case`` solves that minimization: exactly on the
above-price side (where the objective is piecewise decreasing and the only
infimum candidates are atom left-limits and the cap), and by per-segment
scan plus golden-section refinement on the below-price side.

Also provides the two closed-form mechanisms used as asymptotic fixtures:
a log-uniform spread of prices below the incumbent (strong for small
conversion rates) and an incumbent atom plus revenue-level-weighted tail
(for conversion rates above one half).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import Anchor, DomainError, bridge_survival, gpd_inverse, gpd_survival
from .worstcase import LEFT, RIGHT, PricingContext, WorstCaseDistribution

# Total scan-point budget for the below-price minimization; per-segment
# resolution degrades gracefully for mechanisms with very many atoms.
_SCAN_POINTS_PER_SEGMENT = 64
_SCAN_BUDGET = 300_000
_CHUNK_ENTRIES = 2_000_000

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Mechanism:
    """Atoms (strictly increasing prices) and their probabilities.

    Probabilities may sum to less than one: unassigned mass means "never
    sell", which only lowers revenue, so sub-probability mechanisms are legal
    and are never renormalized.
    """

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if atoms.ndim != 1 or probs.shape != atoms.shape:
            raise DomainError("atoms and probs must be 1-d arrays of equal length")
        if atoms.size and np.any(atoms <= 0.0):
            raise DomainError("mechanism atoms must be positive prices")
        if atoms.size > 1 and np.any(np.diff(atoms) <= 0.0):
            raise DomainError("mechanism atoms must be strictly increasing")
        if np.any(probs < 0.0):
            raise DomainError("mechanism probabilities must be nonnegative")
        if probs.sum() > 1.0 + 1e-12:
            raise DomainError(f"probabilities sum to {probs.sum()} > 1")

    @classmethod
    def deterministic(cls, price: float) -> "Mechanism":
        return cls(np.array([float(price)]), np.array([1.0]))

    @property
    def total_prob(self) -> float:
        return float(self.probs.sum())

    def support(self) -> "Mechanism":
        """Drop zero-probability atoms (cheap evaluation, same distribution)."""
        keep = self.probs > 0.0
        return Mechanism(self.atoms[keep], self.probs[keep])


@dataclass(frozen=True)
class EvaluationReport:
    """Worst-case ratio of a mechanism, with the minimizing oracle price.

    ``tail_slack`` bounds how much ratio could still be lost to worst cases
    beyond the evaluation cap (zero when the admissible range was fully
    covered).
    """

    ratio: float
    argmin_r: float
    side: str
    tail_slack: float = 0.0


def revenue_ratio(m: Mechanism, d: WorstCaseDistribution) -> float:
    """Expected revenue of m against d, divided by d's oracle revenue."""
    if m.atoms.size == 0:
        return 0.0
    rev = float(np.sum(m.probs * m.atoms * d.survival(m.atoms)))
    return rev / d.oracle_revenue()


def _golden_min(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi]; deterministic, derivative-free."""
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


class _LeftObjective:
    """g(r) = revenue of the mechanism against the left member at r, over r.

    Interval contexts bind through their lower rate here: smaller q only
    shrinks the below-price survival bridge, so q_lo is the worst.
    """

    def __init__(self, m: Mechanism, ctx: PricingContext):
        self.w = ctx.w
        self.q = ctx.q_lo
        self.alpha = ctx.alpha
        self.slope = gpd_inverse(ctx.alpha, ctx.q_lo)
        keep = (m.probs > 0.0) & (m.atoms <= ctx.w)
        self.atoms = m.atoms[keep]
        self.weights = self.atoms * m.probs[keep]

    def batch(self, rs: np.ndarray) -> np.ndarray:
        """Vectorized g(r) for r strictly below w."""
        out = np.empty(rs.shape)
        if self.atoms.size == 0:
            out[:] = 0.0
            return out
        n = self.atoms.size
        step = max(1, _CHUNK_ENTRIES // n)
        for start in range(0, rs.size, step):
            r = rs[start : start + step, None]
            t = np.clip((self.atoms[None, :] - r) / (self.w - r), 0.0, None)
            surv = gpd_survival(self.alpha, self.slope * t)
            surv = np.where(self.atoms[None, :] <= r, 1.0, surv)
            out[start : start + step] = (surv * self.weights[None, :]).sum(axis=1)
        return out / rs

    def __call__(self, r: float) -> float:
        if r >= self.w:
            return self.at_w()
        return float(self.batch(np.array([r]))[0])

    def at_w(self) -> float:
        # Boundary member (limit of r -> w): atoms strictly below w sell
        # surely, an atom exactly at w hits the size-q atom there.
        factors = np.where(self.atoms < self.w, 1.0, self.q)
        return float((self.weights * factors).sum()) / self.w


def _left_infimum(
    m: Mechanism, ctx: PricingContext, r_lo: float, tol: float
) -> tuple[float, float]:
    """Minimize the below-price objective over [r_lo, w]; returns (value, argmin)."""
    w = ctx.w
    obj = _LeftObjective(m, ctx)
    inside = obj.atoms[(obj.atoms > r_lo) & (obj.atoms < w)]
    bounds = np.concatenate(([r_lo], inside, [w]))
    n_seg = bounds.size - 1
    per_seg = max(8, min(_SCAN_POINTS_PER_SEGMENT, _SCAN_BUDGET // max(n_seg, 1)))

    # Scan grid: per-segment uniform points; r = w itself is evaluated
    # separately below (the batch formula divides by w - r).
    grids = [
        np.linspace(bounds[k], bounds[k + 1], per_seg, endpoint=False)
        for k in range(n_seg)
    ]
    rs = np.concatenate(grids) if grids else np.array([r_lo])
    vals = obj.batch(rs)

    best_val = float(vals.min()) if vals.size else math.inf
    best_r = float(rs[int(vals.argmin())]) if vals.size else w

    # Golden refinement around the few best scan points.
    order = np.argsort(vals, kind="stable")[:8]
    for idx in sorted(int(i) for i in order):
        lo = rs[idx - 1] if idx > 0 else r_lo
        hi = rs[idx + 1] if idx + 1 < rs.size else w - 1e-12 * w
        if hi <= lo:
            continue
        x, fx = _golden_min(obj, float(lo), float(hi), xtol=max(tol, 1e-13) * w)
        if fx < best_val - 1e-15 or (fx <= best_val + tol and x < best_r):
            best_val, best_r = fx, x

    vw = obj.at_w()
    if vw < best_val - 1e-15:
        best_val, best_r = vw, w
    return best_val, best_r


def _right_infimum(
    m: Mechanism, ctx: PricingContext, cap: float, tol: float
) -> tuple[float, float]:
    """Exact infimum of the above-price objective over (w, cap].

    Between atoms the ratio strictly decreases (numerator constant,
    denominator is the increasing revenue curve), so the infimum is attained
    in the limit at atom locations from below, or at the cap.  Interval
    contexts bind through their upper rate here.
    """
    w, q, alpha = ctx.w, ctx.q_hi, ctx.alpha
    anchors = (Anchor(0.0, 1.0), Anchor(w, q))
    keep = m.probs > 0.0
    atoms, probs = m.atoms[keep], m.probs[keep]
    surv = bridge_survival(alpha, *anchors, atoms) if atoms.size else np.array([])
    weighted = atoms * probs * surv
    cum = np.concatenate(([0.0], np.cumsum(weighted)))

    def denom(r: float) -> float:
        return r * bridge_survival(alpha, *anchors, r)

    best_val, best_r = math.inf, cap
    inside = (atoms > w) & (atoms <= cap)
    for j in np.nonzero(inside)[0]:
        r = float(atoms[j])
        val = cum[j] / denom(r)  # left limit: atoms strictly below r
        if val < best_val - 1e-15 or (val <= best_val + tol and r < best_r):
            best_val, best_r = val, r
    n_below = int(np.searchsorted(atoms, cap, side="right"))
    val = cum[n_below] / denom(cap)
    if val < best_val - 1e-15 or (val <= best_val + tol and cap < best_r):
        best_val, best_r = val, cap
    return best_val, best_r


def nature_worst_case(
    m: Mechanism,
    ctx: PricingContext,
    r_cap: float | None = None,
    tol: float = 1e-9,
) -> EvaluationReport:
    """Nature's exact best response: the worst ratio over the reduced family.

    Interval contexts are supported: the below-price side is evaluated at the
    interval's lower rate and the above-price side at its upper rate, which
    is exactly nature's reduced problem under rate uncertainty.

    ``r_cap`` truncates the above-price search when the admissible oracle
    range is unbounded (or merely huge); the default is ``1e4 * w``.  The
    report's ``tail_slack`` carries the truncation bound
    ``1 / (q (1 + (1/q - 1) cap/w))`` whenever the cap bites, so callers see
    exactly how much guarantee the truncation could hide.
    """
    if tol <= 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if r_cap is not None and r_cap <= ctx.w:
        raise DomainError(f"r_cap must exceed w={ctx.w}, got {r_cap}")
    r_lo, r_hi = ctx.reserve_range()
    cap = min(r_hi, r_cap if r_cap is not None else 1e4 * ctx.w)

    candidates = [(*_left_infimum(m, ctx, r_lo, tol), LEFT)]
    if r_hi >= ctx.w:
        # The above-price family is non-empty (it degenerates to the single
        # boundary member at r = w when r_hi == w exactly).
        candidates.append((*_right_infimum(m, ctx, max(cap, ctx.w), tol), RIGHT))
    best_val = min(val for val, _, _ in candidates)
    # Ties within tol resolve to the smallest minimizing r, for determinism.
    best_r, side = min(
        (r, s) for val, r, s in candidates if val <= best_val + tol
    )

    slack = 0.0
    if cap < r_hi:
        x = cap / ctx.w
        q = ctx.q_hi
        slack = 1.0 / (q * (1.0 + (1.0 / q - 1.0) * x))
    return EvaluationReport(
        ratio=float(best_val), argmin_r=float(best_r), side=side, tail_slack=slack
    )


def log_uniform_mechanism(ctx: PricingContext, grid_n: int) -> Mechanism:
    """Price spread with density 1/(u log(1/q)) on [q w, w], discretized.

    Geometric segments of [q w, w] carry equal mass under that density; each
    segment's mass sits on its lower endpoint so the discretization can only
    understate the continuous guarantee.  Strong for small conversion rates:
    its guarantee decays like 1/log(1/q) where any single price decays like
    sqrt(q).
    """
    if not ctx.is_point:
        raise DomainError("log_uniform_mechanism requires a point-rate context")
    if grid_n < 1:
        raise DomainError(f"grid_n must be >= 1, got {grid_n}")
    q, w = ctx.q, ctx.w
    atoms = q * w * (1.0 / q) ** (np.arange(grid_n) / grid_n)
    probs = np.full(grid_n, 1.0 / grid_n)
    return Mechanism(atoms, probs)


def tail_weighted_mechanism(ctx: PricingContext, a: float, grid_n: int) -> Mechanism:
    """Incumbent-price atom plus a revenue-level-weighted tail above it.

    Puts probability ``a`` on w and spreads ``1 - a`` above w with density
    proportional to the log-derivative of the revenue curve, discretized into
    equal-mass atoms at revenue levels ``q (1/(1-q))^{k/grid_n}`` (each
    segment's mass on its lower endpoint; the first coincides with w and is
    merged into the atom there).  Built for the heavy-tail class (alpha = 0)
    with q > 1/2.  For q in (1/2, 3/4) the construction is still returned but
    no performance bound is claimed for it.
    """
    if not ctx.is_point:
        raise DomainError("tail_weighted_mechanism requires a point-rate context")
    if ctx.alpha != 0.0:
        raise DomainError("tail_weighted_mechanism is defined for alpha = 0 only")
    q, w = ctx.q, ctx.w
    if q <= 0.5:
        raise DomainError(f"tail_weighted_mechanism requires q > 1/2, got {q}")
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"atom probability a must lie in [0, 1], got {a}")
    if grid_n < 1:
        raise DomainError(f"grid_n must be >= 1, got {grid_n}")
    if a == 1.0:
        return Mechanism.deterministic(w)
    # Revenue levels are t = x/(1 + (1/q - 1) x) in [q, q/(1-q)); invert for x.
    levels = q * (1.0 / (1.0 - q)) ** (np.arange(grid_n) / grid_n)
    xs = levels / (1.0 - levels * (1.0 / q - 1.0))
    seg_mass = (1.0 - a) / grid_n
    atoms = np.concatenate(([1.0], xs[1:])) * w
    probs = np.concatenate(([a + seg_mass], np.full(grid_n - 1, seg_mass)))
    return Mechanism(atoms, probs)
