import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpricing.kernel import (
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
from robustpricing.worstcase import PricingContext, WorstCaseDistribution

ALPHAS = [0.0, 0.25, 0.5, 0.75, 1.0]


class TestGpdSurvival:
    def test_exponential_at_zero(self):
        assert gpd_survival(1.0, 0.0) == 1.0

    def test_regular_halves_at_one(self):
        assert gpd_survival(0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_direct_substitution(self):
        # (1 + 0.5*3)^(-2) = 0.16, cross-checked by inverting below
        assert gpd_survival(0.5, 3.0) == pytest.approx(0.16, rel=1e-12)
        assert gpd_inverse(0.5, 0.16) == pytest.approx(3.0, rel=1e-12)

    def test_infinity_maps_to_zero(self):
        assert gpd_survival(0.3, math.inf) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            gpd_survival(0.5, -0.1)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_strictly_decreasing(self, alpha):
        vs = np.linspace(0.0, 40.0, 400)
        out = gpd_survival(alpha, vs)
        assert np.all(np.diff(out) < 0.0)

    def test_branch_switch_is_seamless(self):
        # The formula changes branch just below alpha = 1; the function
        # itself is continuous and the jump stays under 1e-8.
        for v in [0.1, 1.0, 5.0, 30.0]:
            below = gpd_survival(1.0 - 2e-9, v)
            at = gpd_survival(1.0, v)
            assert abs(below - at) < 1e-8


class TestGpdInverse:
    def test_log_branch(self):
        assert gpd_inverse(1.0, 1.0) == 0.0

    def test_regular_branch(self):
        assert gpd_inverse(0.0, 0.5) == pytest.approx(1.0, rel=1e-14)

    def test_zero_maps_to_infinity(self):
        assert gpd_inverse(0.7, 0.0) == math.inf

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            gpd_inverse(0.5, 1.5)
        with pytest.raises(DomainError):
            gpd_inverse(0.5, -0.01)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_strictly_decreasing(self, alpha):
        ys = np.linspace(0.01, 1.0, 200)
        out = gpd_inverse(alpha, ys)
        assert np.all(np.diff(out) < 0.0)

    @settings(max_examples=120, deadline=None)
    @given(
        alpha=st.sampled_from(ALPHAS),
        y=st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_round_trip(self, alpha, y):
        assert gpd_survival(alpha, gpd_inverse(alpha, y)) == pytest.approx(
            y, rel=1e-12
        )


class TestBridgeSurvival:
    def test_hits_both_anchors(self):
        for alpha in ALPHAS:
            lo, hi = Anchor(0.5, 0.9), Anchor(2.0, 0.3)
            assert bridge_survival(alpha, lo, hi, lo.price) == pytest.approx(
                lo.survival, abs=1e-12
            )
            assert bridge_survival(alpha, lo, hi, hi.price) == pytest.approx(
                hi.survival, abs=1e-12
            )

    def test_regular_closed_form(self):
        # alpha=0 anchored at (0,1),(1,q) simplifies to 1/(1 + (1/q - 1) v)
        q = 0.5
        lo, hi = Anchor(0.0, 1.0), Anchor(1.0, q)
        for v, expect in [(0.25, 0.8), (0.5, 2.0 / 3.0), (0.75, 4.0 / 7.0)]:
            assert bridge_survival(0.0, lo, hi, v) == pytest.approx(expect, rel=1e-12)

    def test_nonincreasing_beyond_anchors(self):
        vs = np.linspace(0.2, 30.0, 500)
        for alpha in ALPHAS:
            out = bridge_survival(alpha, Anchor(0.2, 1.0), Anchor(1.0, 0.4), vs)
            assert np.all(np.diff(out) <= 0.0)
            assert np.all((out >= 0.0) & (out <= 1.0))

    def test_bad_anchors_rejected(self):
        with pytest.raises(DomainError):
            bridge_survival(0.5, Anchor(1.0, 0.5), Anchor(0.5, 0.4), 1.2)
        with pytest.raises(DomainError):
            bridge_survival(0.5, Anchor(0.5, 0.4), Anchor(1.0, 0.5), 1.2)
        with pytest.raises(DomainError):
            bridge_survival(0.5, Anchor(0.5, 1.0), Anchor(1.0, 0.5), 0.2)


class TestLambertW:
    def test_fixed_points(self):
        assert lambert_w(0.0) == 0.0
        assert lambert_w(math.e) == pytest.approx(1.0, rel=1e-15)

    def test_residual_across_range(self):
        for x in np.geomspace(1e-9, 1e6, 200):
            w = lambert_w(float(x))
            assert abs(w * math.exp(w) - x) <= 1e-13 * max(1.0, x)

    def test_residual_at_example_point(self):
        w = lambert_w(5.4366)
        assert w * math.exp(w) == pytest.approx(5.4366, rel=1e-13)

    def test_monotone(self):
        xs = np.linspace(0.0, 50.0, 300)
        ws = [lambert_w(float(x)) for x in xs]
        assert all(b > a for a, b in zip(ws, ws[1:]))

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            lambert_w(-1e-9)


class TestReserveBounds:
    def test_regular_is_unbounded_above(self):
        r_lo, r_hi = reserve_bounds(0.0, 1.0, 0.5)
        assert r_lo == pytest.approx(0.5, rel=1e-14)
        assert r_hi == math.inf

    def test_mhr_at_inverse_e(self):
        r_lo, r_hi = reserve_bounds(1.0, 1.0, math.exp(-1.0))
        assert r_lo == pytest.approx(0.5, rel=1e-13)
        assert r_hi == pytest.approx(1.0, rel=1e-13)

    def test_mhr_closed_form(self):
        r_lo, r_hi = reserve_bounds(1.0, 2.0, 0.5)
        assert r_lo == pytest.approx(2.0 / (math.log(2.0) + 1.0), rel=1e-13)
        assert r_hi == pytest.approx(2.0 / math.log(2.0), rel=1e-13)

    @pytest.mark.parametrize("alpha,q", [(0.0, 0.3), (0.5, 0.6), (1.0, 0.5), (1.0, 0.8)])
    def test_endpoints_are_self_optimal(self, alpha, q):
        # Oracle: at both endpoints the member's revenue curve peaks at r itself.
        w = 2.0
        ctx = PricingContext.point(alpha, w, q)
        r_lo, r_hi = reserve_bounds(alpha, w, q)
        for r in [r_lo] + ([r_hi] if r_hi > w and math.isfinite(r_hi) else []):
            member = WorstCaseDistribution(ctx, r)
            grid = np.unique(np.concatenate([np.linspace(1e-6, min(r_hi if math.isfinite(r_hi) else 100 * w, 100 * w), 20001), [r]]))
            revenue = grid * member.survival(grid)
            # r attains the global max (the curve can be flat, e.g. the
            # equal-revenue member at r_lo for alpha = 0, so the argmax
            # location need not be unique).
            assert revenue.max() == pytest.approx(member.oracle_revenue(), rel=1e-6)
            assert r * member.survival(r) == pytest.approx(revenue.max(), rel=1e-6)

    def test_degenerate_rates_rejected(self):
        for q in [0.0, 1.0, -0.1, 1.1]:
            with pytest.raises(DomainError):
                reserve_bounds(0.5, 1.0, q)


class TestBridgeVirtualValue:
    def _finite_difference_virtual_value(self, alpha, lo, hi, v, eps=1e-7):
        up = bridge_survival(alpha, lo, hi, v + eps)
        down = bridge_survival(alpha, lo, hi, v - eps)
        density = (down - up) / (2.0 * eps)
        return (1.0 - alpha) * v - bridge_survival(alpha, lo, hi, v) / density

    def test_exponential_example(self):
        lo, hi = Anchor(0.0, 1.0), Anchor(1.0, math.exp(-1.0))
        got = bridge_virtual_value(1.0, lo, hi)
        assert got == pytest.approx(-1.0, rel=1e-12)
        fd = self._finite_difference_virtual_value(1.0, lo, hi, 0.6)
        assert fd == pytest.approx(got, rel=1e-6)

    def test_regular_example(self):
        got = bridge_virtual_value(0.0, Anchor(0.0, 1.0), Anchor(1.0, 0.5))
        assert got == pytest.approx(-1.0, rel=1e-12)

    def test_half_alpha_example(self):
        lo, hi = Anchor(1.0, 0.8), Anchor(2.0, 0.4)
        got = bridge_virtual_value(0.5, lo, hi)
        expect = 0.5 - 1.0 / gpd_inverse(0.5, 0.5)
        assert got == pytest.approx(expect, rel=1e-13)
        fd = self._finite_difference_virtual_value(0.5, lo, hi, 1.5)
        assert fd == pytest.approx(got, rel=1e-6)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_constant_across_interior(self, alpha):
        lo, hi = Anchor(0.5, 0.9), Anchor(2.5, 0.35)
        expect = bridge_virtual_value(alpha, lo, hi)
        for v in np.linspace(0.6, 2.4, 100):
            fd = self._finite_difference_virtual_value(alpha, lo, hi, float(v))
            assert fd == pytest.approx(expect, rel=1e-6)


class TestGpdRevenuePeak:
    def test_exponential_peak(self):
        assert gpd_revenue_peak(1.0, 1.0, 0.0) == pytest.approx(1.0, rel=1e-12)

    def test_regular_increasing_forever(self):
        assert gpd_revenue_peak(0.0, 1.0, 0.0) == math.inf

    def test_grid_search_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            alpha = float(rng.uniform(0.05, 1.0))
            beta = float(rng.uniform(0.2, 3.0))
            w = float(rng.uniform(0.0, 2.0))
            peak = gpd_revenue_peak(alpha, beta, w)
            lo = max(w, 0.0)
            hi = max(4.0 * peak, lo + 5.0) if math.isfinite(peak) else lo + 50.0
            grid = np.linspace(lo, hi, 200001)
            revenue = grid * gpd_survival(alpha, beta * np.maximum(grid - w, 0.0))
            found = float(grid[int(revenue.argmax())])
            target = max(peak, lo)
            assert found == pytest.approx(target, abs=2.0 * (hi - lo) / 200000 + 1e-4)

    def test_bad_beta_rejected(self):
        with pytest.raises(DomainError):
            gpd_revenue_peak(0.5, 0.0, 1.0)


class TestSingleCrossing:
    @pytest.mark.parametrize("alpha,q,r", [
        (0.0, 0.4, 0.55), (0.5, 0.4, 0.7), (1.0, 0.5, 0.8),  # below-price members
        (0.0, 0.4, 2.5), (1.0, 0.5, 1.3),                    # above-price members
    ])
    def test_family_member_crosses_its_bridge_once(self, alpha, q, r):
        # Anchor the bridge at two points of the member's own curve: the
        # member must dominate between the anchors and be dominated beyond.
        ctx = PricingContext.point(alpha, 1.0, q)
        member = WorstCaseDistribution(ctx, r)
        top = member.r if member.side == "right" else ctx.w
        v1, v2 = 0.35 * top, 0.8 * top
        s1, s2 = member.survival(v1), member.survival(v2)
        lo, hi = Anchor(v1, s1), Anchor(v2, s2)

        inner = np.linspace(v1, v2, 1000)
        assert np.all(
            member.survival(inner) >= bridge_survival(alpha, lo, hi, inner) - 1e-9
        )
        beyond = np.linspace(v2, 1.5 * top, 1000)
        assert np.all(
            member.survival(beyond) <= bridge_survival(alpha, lo, hi, beyond) + 1e-9
        )
