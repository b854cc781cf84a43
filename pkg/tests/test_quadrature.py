import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentkit.core import (
    INF,
    Domain,
    EmptyDomainError,
    GeometryError,
    HalfSpaceField,
    lattice_window,
)
from tentkit.quadrature import (
    WHITNEY,
    AverageSpec,
    ball_count,
    ball_mask,
    ball_max,
    ball_mean,
    ball_sum,
    full_window_weight,
    lp_norm,
    power_mean,
    whitney_average,
    whitney_average_field,
)


def small_domain(d=1, n_space=16, m_scale=2, s_min=0.25, s_max=2.0, side=4.0):
    return Domain(d=d, side=side, n_space=n_space, s_min=s_min, s_max=s_max, m_scale=m_scale)


from oracle import brute_whitney_average, brute_window, periodic_distance


class TestPowerMean:
    def test_arithmetic_mean_at_rho_one(self):
        assert power_mean([1.0, 3.0], [1.0, 1.0], 1.0) == pytest.approx(2.0)

    def test_weights_matter(self):
        assert power_mean([1.0, 3.0], [3.0, 1.0], 1.0) == pytest.approx(1.5)

    def test_infinite_rho_is_max(self):
        assert power_mean([1.0, 5.0, 2.0], [1.0, 1.0, 1.0], INF) == 5.0

    def test_rejects_bad_input(self):
        with pytest.raises(EmptyDomainError):
            power_mean([], [], 2.0)
        with pytest.raises(ValueError):
            power_mean([-1.0], [1.0], 2.0)
        with pytest.raises(ValueError):
            power_mean([1.0], [0.0], 2.0)

    @given(
        st.lists(
            st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=10.0)),
            min_size=1,
            max_size=8,
        ),
        st.floats(min_value=0.2, max_value=3.0),
        st.floats(min_value=0.1, max_value=4.0),
    )
    @settings(max_examples=80)
    def test_monotone_in_rho(self, samples, rho, bump):
        w = [1.0 + (i % 3) for i in range(len(samples))]
        lo = power_mean(samples, w, rho)
        hi = power_mean(samples, w, rho + bump)
        assert lo <= hi * (1 + 1e-9)
        assert hi <= power_mean(samples, w, INF) * (1 + 1e-9)


class TestLpNorm:
    def test_matches_manual_sum(self):
        vals = np.array([1.0, -2.0, 2.0])
        assert lp_norm(vals, 2.0, 0.5) == pytest.approx(math.sqrt(9.0 * 0.5))

    def test_p_inf_is_max(self):
        assert lp_norm(np.array([1.0, -7.0]), INF, 0.5) == 7.0


class TestBallStencils:
    def test_d1_counts(self):
        dom = small_domain()  # h = 1/4
        # radius 0.3: offsets with |dy| < 0.3 are dy in {-0.25, 0, 0.25}... |dy|h
        assert ball_count(dom, 0.30) == 3
        assert ball_count(dom, 0.25) == 1  # strict inequality
        assert ball_count(dom, 0.26) == 3

    def test_saturates_at_half_diagonal(self):
        dom = small_domain(d=2, n_space=8)
        r = dom.side * math.sqrt(2.0) / 2.0 + 0.01
        assert ball_count(dom, r) == 64

    def test_mask_matches_brute_force(self):
        dom = small_domain(d=2, n_space=8)
        for r in (0.3, 0.8, 1.6, 2.5):
            mask = ball_mask(dom, r)
            for idx in np.ndindex(8, 8):
                want = periodic_distance(dom, idx, (0, 0)) < r
                assert mask[idx] == want, (idx, r)

    def test_ball_sum_matches_roll_loop(self):
        rng = np.random.default_rng(0)
        for d, n in ((1, 16), (2, 8)):
            dom = small_domain(d=d, n_space=n)
            arr = rng.normal(size=dom.spatial_shape)
            r = 0.9
            mask = ball_mask(dom, r)
            want = np.zeros_like(arr)
            for off in np.argwhere(mask):
                want += np.roll(arr, shift=tuple(-off), axis=tuple(range(d)))
            got = ball_sum(dom, arr, r)
            assert np.allclose(got, want, atol=1e-10)

    def test_ball_mean_of_constant(self):
        dom = small_domain(d=2, n_space=8)
        arr = np.full((8, 8), 3.0)
        assert np.allclose(ball_mean(dom, arr, 1.1), 3.0)

    @pytest.mark.parametrize("radius", [0.2, 0.3, 0.9, 1.9, 2.1, 3.0])
    def test_ball_max_matches_roll_loop(self, radius):
        rng = np.random.default_rng(1)
        dom = small_domain(d=2, n_space=8)
        arr = rng.normal(size=(8, 8))
        mask = ball_mask(dom, radius)
        want = np.full_like(arr, -np.inf)
        for off in np.argwhere(mask):
            np.maximum(want, np.roll(arr, shift=tuple(-off), axis=(0, 1)), out=want)
        assert np.array_equal(ball_max(dom, arr, radius), want)

    def test_ball_max_d1_wide(self):
        rng = np.random.default_rng(2)
        dom = small_domain()
        arr = rng.normal(size=16)
        for radius in (1.3, 1.9, 2.5):
            mask = ball_mask(dom, radius)
            want = np.full_like(arr, -np.inf)
            for (off,) in np.argwhere(mask):
                np.maximum(want, np.roll(arr, -off), out=want)
            assert np.array_equal(ball_max(dom, arr, radius), want)


class TestWindows:
    def test_full_window_weight_brute(self):
        dom = small_domain(m_scale=3, s_min=0.25, s_max=2.0)
        for (lo, hi) in ((0.3, 0.7), (0.25, 0.5), (1.0, 2.0), (2.0, 4.0), (3.0, 3.5)):
            want = sum(dom.dlog * dom.scale_value(u) for u in brute_window(dom, lo, hi))
            assert full_window_weight(dom, lo, hi) == pytest.approx(want, abs=1e-15)

    def test_empty_window_weight(self):
        dom = small_domain()
        assert full_window_weight(dom, 0.26, 0.27) == 0.0

    def test_every_scale_cell_fully_covered(self):
        # sum over extended-grid windows containing cell j of the cell's
        # share of the full window weight telescopes to exactly 1
        for m_scale in (1, 2, 4):
            dom = small_domain(m_scale=m_scale, s_min=0.25, s_max=2.0)
            for j, s in enumerate(dom.scales()):
                total = 0.0
                for t in dom.extended_t_grid():
                    u_lo, u_hi = lattice_window(dom, t / 2.0, t)
                    if u_lo <= j <= u_hi:
                        total += dom.dlog * s / full_window_weight(dom, t / 2.0, t)
                assert total == pytest.approx(1.0, abs=1e-12), (m_scale, j)


class TestWhitneyAverage:
    @pytest.mark.parametrize("rho", [1.0, 2.0, 0.5, INF])
    def test_matches_brute_force_d1(self, rho):
        dom = small_domain()
        rng = np.random.default_rng(3)
        f = HalfSpaceField(dom, rng.normal(size=(dom.n_scales, 16)))
        for t in (0.5, 0.7, 1.0, 2.0):
            for x in (0, 5, 15):
                want = brute_whitney_average(f, x, t, rho)
                got = whitney_average(f, x, t, rho)
                assert got == pytest.approx(want, rel=1e-10), (t, x)

    def test_matches_brute_force_d2_with_beta(self):
        dom = small_domain(d=2, n_space=8)
        rng = np.random.default_rng(4)
        f = HalfSpaceField(dom, rng.normal(size=(dom.n_scales, 8, 8)))
        for rho, beta in ((2.0, 0.5), (1.0, -1.0), (INF, 0.5)):
            want = brute_whitney_average(f, (1, 6), 1.0, rho, beta=beta)
            got = whitney_average(f, (1, 6), 1.0, rho, beta=beta)
            assert got == pytest.approx(want, rel=1e-10)

    def test_nonstandard_spec(self):
        dom = small_domain()
        rng = np.random.default_rng(5)
        f = HalfSpaceField(dom, rng.normal(size=(dom.n_scales, 16)))
        spec = AverageSpec(a=0.25, b=0.5, c=2.0)
        want = brute_whitney_average(f, 3, 1.0, 2.0, spec=spec)
        assert whitney_average(f, 3, 1.0, 2.0, spec=spec) == pytest.approx(want, rel=1e-10)

    def test_field_variant_agrees_pointwise(self):
        for d, n in ((1, 16), (2, 8)):
            dom = small_domain(d=d, n_space=n)
            rng = np.random.default_rng(6)
            f = HalfSpaceField(dom, rng.normal(size=(dom.n_scales,) + dom.spatial_shape))
            for rho in (1.0, 2.0, INF):
                grid = whitney_average_field(f, 1.0, rho, beta=0.25)
                for idx in np.ndindex(*dom.spatial_shape):
                    x = idx[0] if d == 1 else idx
                    want = whitney_average(f, x, 1.0, rho, beta=0.25)
                    assert grid[idx] == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_ball_too_large_rejected(self):
        dom = small_domain()
        f = HalfSpaceField(dom, np.ones((dom.n_scales, 16)))
        with pytest.raises(GeometryError, match="half period"):
            whitney_average(f, 0, 2.5, 2.0)

    def test_missed_window_rejected(self):
        dom = small_domain()
        f = HalfSpaceField(dom, np.ones((dom.n_scales, 16)))
        # (a t, b t] = (0.255, 0.51 * 0.51/0.5...]: pick t with empty realized window
        with pytest.raises(EmptyDomainError):
            whitney_average(f, 0, 0.26, 2.0, spec=AverageSpec(a=0.97, b=0.99, c=1.0))

    def test_bad_cell_rejected(self):
        dom = small_domain()
        f = HalfSpaceField(dom, np.ones((dom.n_scales, 16)))
        with pytest.raises(IndexError):
            whitney_average(f, 16, 1.0, 2.0)
        with pytest.raises(IndexError):
            whitney_average(f, (0, 0), 1.0, 2.0)

    def test_constant_field_average_is_constant(self):
        dom = small_domain()
        f = HalfSpaceField(dom, np.full((dom.n_scales, 16), 2.0))
        # window fully inside the realized grid: mean of a constant is the constant
        assert whitney_average(f, 0, 1.0, 2.0) == pytest.approx(2.0)
        assert whitney_average(f, 0, 1.0, INF) == pytest.approx(2.0)

    def test_top_window_sees_missing_ideal_cells(self):
        # at t above s_max part of the window is off-grid, so the mean of a
        # constant drops below the constant (mass is zero there by design)
        dom = small_domain()
        f = HalfSpaceField(dom, np.full((dom.n_scales, 16), 2.0))
        t_top = float(dom.extended_t_grid()[-1])
        assert whitney_average_field(f, t_top, 2.0).max() < 2.0
