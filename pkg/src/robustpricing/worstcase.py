"""The one-parameter family of worst-case value distributions.

Against any pricing mechanism, nature's problem collapses to choosing a
single number: the oracle price ``r`` of the worst case.  Conditional on
``r``, the worst distribution is pinned down — a translated/truncated
generalized Pareto curve through the observed (w, q) point.  Members with
``r <= w`` ("left" side) are flat at 1 up to ``r``, bridge down to q at w,
and put an atom at w; members with ``r > w`` ("right" side) follow the
bridge anchored at (0, 1) and (w, q) and put an atom at ``r``.

Instances are immutable; ``survival`` accepts scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import Anchor, DomainError, bridge_survival, reserve_bounds

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class PricingContext:
    """A pricing instance: tail class, incumbent price, conversion-rate info.

    ``q_lo == q_hi`` is the point-information case (the historical conversion
    rate is known exactly); ``q_lo < q_hi`` models interval uncertainty.
    Boundary rates 0 and 1 are rejected: when the observed rate is degenerate
    no mechanism can guarantee any positive fraction of the oracle revenue.
    """

    alpha: float
    w: float
    q_lo: float
    q_hi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.w <= 0.0:
            raise DomainError(f"incumbent price w must be > 0, got {self.w}")
        for q in (self.q_lo, self.q_hi):
            if not 0.0 < q < 1.0:
                raise DomainError(
                    "conversion rate must lie strictly in (0, 1); "
                    f"got {q} (no positive guarantee exists at the boundary)"
                )
        if self.q_lo > self.q_hi:
            raise DomainError(
                f"interval must satisfy q_lo <= q_hi, got [{self.q_lo}, {self.q_hi}]"
            )

    @classmethod
    def point(cls, alpha: float, w: float, q: float) -> "PricingContext":
        return cls(alpha, w, q, q)

    @classmethod
    def interval(cls, alpha: float, w: float, q_lo: float, q_hi: float) -> "PricingContext":
        if q_lo >= q_hi:
            raise DomainError(f"interval needs q_lo < q_hi, got [{q_lo}, {q_hi}]")
        return cls(alpha, w, q_lo, q_hi)

    @property
    def is_point(self) -> bool:
        return self.q_lo == self.q_hi

    @property
    def q(self) -> float:
        if not self.is_point:
            raise DomainError("context carries an interval, not a point rate")
        return self.q_lo

    def reserve_range(self) -> tuple[float, float]:
        """(r_lo, r_hi) for a point context; interval contexts use the widest."""
        r_lo, _ = reserve_bounds(self.alpha, self.w, self.q_lo)
        _, r_hi = reserve_bounds(self.alpha, self.w, self.q_hi)
        return r_lo, r_hi


@dataclass(frozen=True)
class WorstCaseDistribution:
    """One member of the reduced family, identified by its oracle price r.

    ``side`` is inferred from r (at or below w: the flat-then-bridge "left"
    form; above w: the bridge-then-atom "right" form).  Exactly at r = w both
    forms exist — the left form is the default; pass ``side="right"`` for the
    boundary right member (admissible only when the above-price range is
    non-empty).
    """

    ctx: PricingContext
    r: float
    side: str | None = None

    def __post_init__(self) -> None:
        if not self.ctx.is_point:
            raise DomainError("worst-case members are built from point-rate contexts")
        r_lo, r_hi = self.ctx.reserve_range()
        w = self.ctx.w
        tol = 1e-12 * w
        if self.side is None:
            side = LEFT if self.r <= w + tol else RIGHT
        elif self.side in (LEFT, RIGHT):
            side = self.side
        else:
            raise DomainError(f"side must be {LEFT!r} or {RIGHT!r}, got {self.side!r}")
        if side == LEFT:
            if not r_lo - tol <= self.r <= w + tol:
                raise DomainError(
                    f"left members need r in [{r_lo}, {w}], got {self.r}"
                )
            object.__setattr__(self, "r", min(float(self.r), w))
        else:
            if not w - tol <= self.r <= r_hi * (1.0 + 1e-12):
                raise DomainError(
                    f"right members need r in [{w}, {r_hi}], got {self.r}"
                )
        object.__setattr__(self, "side", side)

    def survival(self, v):
        """Probability of selling at posted price v (atoms included at the top)."""
        ctx = self.ctx
        scalar = np.isscalar(v) or np.ndim(v) == 0
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(v_arr < 0.0):
            raise DomainError("survival requires v >= 0")
        out = np.zeros_like(v_arr)
        if self.side == LEFT:
            out[v_arr <= self.r] = 1.0
            mid = (v_arr > self.r) & (v_arr <= ctx.w)
            if np.any(mid):
                out[mid] = bridge_survival(
                    ctx.alpha,
                    Anchor(self.r, 1.0),
                    Anchor(ctx.w, ctx.q),
                    v_arr[mid],
                )
            if self.r == ctx.w:
                # Boundary member (limit of r -> w from below): flat at one
                # below w, atom of size q at w itself.
                out[v_arr == ctx.w] = ctx.q
        else:
            body = v_arr <= self.r
            if np.any(body):
                out[body] = bridge_survival(
                    ctx.alpha,
                    Anchor(0.0, 1.0),
                    Anchor(ctx.w, ctx.q),
                    v_arr[body],
                )
        return float(out[0]) if scalar else out

    def oracle_revenue(self) -> float:
        """Revenue of a seller who knows this distribution (posts r).

        Left members earn r (for the r = w boundary member this is the
        supremum of the revenue curve, approached just below w); right
        members earn r times the bridge survival at r.
        """
        if self.side == LEFT:
            return self.r
        ctx = self.ctx
        return self.r * bridge_survival(
            ctx.alpha, Anchor(0.0, 1.0), Anchor(ctx.w, ctx.q), self.r
        )


def family_grid(
    ctx: PricingContext, n: int, r_cap: float | None = None
) -> list[WorstCaseDistribution]:
    """Discretize the family: n left members on [r_lo, w], n right members above.

    The right block is geometrically spaced on (w, min(r_hi, r_cap)] because
    the objective varies on a log scale in r there.  ``r_cap`` is required
    when the class has an unbounded oracle range (alpha = 0).  If the
    admissible range has no above-price part (r_hi <= w), only the left block
    is returned.
    """
    if not ctx.is_point:
        raise DomainError("family_grid requires a point-rate context")
    if n < 2:
        raise DomainError(f"need n >= 2 grid members per side, got {n}")
    r_lo, r_hi = ctx.reserve_range()
    members = [WorstCaseDistribution(ctx, r) for r in np.linspace(r_lo, ctx.w, n)]
    cap = r_hi
    if np.isinf(r_hi):
        if r_cap is None or r_cap <= ctx.w:
            raise DomainError(
                "r_cap > w is required when the oracle-price range is unbounded"
            )
        cap = r_cap
    elif r_cap is not None:
        cap = min(cap, r_cap) if r_cap > ctx.w else cap
    if cap > ctx.w:
        ratios = (cap / ctx.w) ** (np.arange(1, n + 1) / n)
        members.extend(WorstCaseDistribution(ctx, ctx.w * t) for t in ratios)
    return members
