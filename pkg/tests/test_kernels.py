import math

import numpy as np
import pytest

from tentkit.core import INF, BoundaryField, Domain, HypothesisError
from tentkit.families import band_limited_boundary, single_mode
from tentkit.kernels import (
    KernelSpec,
    check_characterization,
    convolution_inequality_check,
    convolve_at_scale,
    custom_kernel,
    extend,
    f_endpoint_norm,
    gauss_weierstrass,
    heat,
    lp_block,
    lp_block_transform,
    multiplier_values,
    peetre_maximal,
    smooth_cutoff,
    x_norm,
)


def small_domain(d=1, n_space=16):
    return Domain(d=d, side=4.0, n_space=n_space, s_min=0.25, s_max=2.0, m_scale=2)


def brute_sup_cube_means(dom, body_fn):
    best = 0.0
    g_min = round(math.log2(dom.h))
    for g in range(g_min, dom.root_generation + 1):
        body = body_fn(g)
        if body is None:
            continue
        npc = round(2.0**g / dom.h)
        nb = dom.n_space // npc
        for off in np.ndindex(*(nb,) * dom.d):
            sl = tuple(slice(o * npc, (o + 1) * npc) for o in off)
            best = max(best, float(body[sl].mean()))
    return best


def brute_f_endpoint(blocks, q, beta):
    dom = next(iter(blocks.values())).domain
    ks = sorted(blocks)

    def body(g):
        eligible = [k for k in ks if k >= -g]
        if not eligible:
            return None
        return sum(2.0 ** (k * beta * q) * np.abs(blocks[k].values) ** q for k in eligible)

    return brute_sup_cube_means(dom, body) ** (1.0 / q)


def brute_x_norm(blocks, q, alpha):
    dom = next(iter(blocks.values())).domain
    ks = sorted(blocks)

    def body(g):
        eligible = [k for k in ks if k >= -g]
        if not eligible:
            return None
        if q == INF:
            tail = np.maximum.reduce([np.abs(blocks[k].values) for k in eligible])
            return tail**alpha
        tail = sum(np.abs(blocks[k].values) ** q for k in eligible)
        return tail ** (alpha / q)

    return brute_sup_cube_means(dom, body) ** (1.0 / alpha)


class TestKernelSpec:
    def test_moment_orders(self):
        assert heat().moment_order == -1
        assert gauss_weierstrass(3).moment_order == 2
        assert lp_block().moment_order == INF
        assert custom_kernel([(0.0, 0.0), (1.0, 1.0)], 1.5).moment_order == 1.5

    def test_validation(self):
        with pytest.raises(ValueError, match="unknown kernel kind"):
            KernelSpec("poisson")
        with pytest.raises(ValueError, match="moment factor"):
            KernelSpec("gauss_weierstrass", n=-1)
        with pytest.raises(ValueError, match="profile table"):
            KernelSpec("custom", moments=1.0)
        with pytest.raises(ValueError, match="vanishing-moment"):
            KernelSpec("custom", table=((0.0, 1.0),))
        with pytest.raises(ValueError, match="increase"):
            custom_kernel([(1.0, 0.0), (0.5, 1.0)], 0.0)


class TestMultiplier:
    def test_heat_values(self):
        u = np.array([0.0, 1.0, 2.0])
        got = multiplier_values(heat(), u)
        assert got == pytest.approx([1.0, 0.36787944117144233, 0.01831563888873418])

    def test_moment_factor_values(self):
        got = multiplier_values(gauss_weierstrass(2), np.array([0.0, 1.0, 2.0]))
        assert got == pytest.approx([0.0, 0.36787944117144233, 0.07326255555493671])

    def test_block_bump_support(self):
        u = np.array([0.0, 0.25, 0.5, 2.0, 2.5])
        assert np.all(multiplier_values(lp_block(), u) == 0.0)
        inside = multiplier_values(lp_block(), np.array([0.75, 1.0, 1.5]))
        assert np.all(inside > 0.0)
        assert multiplier_values(lp_block(), np.array([1.0]))[0] == pytest.approx(1.0)

    def test_custom_interpolates_and_clamps(self):
        k = custom_kernel([(0.0, 1.0), (2.0, 0.0)], 0.0)
        got = multiplier_values(k, np.array([1.0, 3.0]))
        assert got == pytest.approx([0.5, 0.0])

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            multiplier_values(heat(), np.array([-0.1]))

    def test_smooth_cutoff_shape(self):
        u = np.linspace(0.0, 3.0, 31)
        c = smooth_cutoff(u)
        assert np.all(c[u <= 1.0] == 1.0)
        assert np.all(c[u >= 2.0] == 0.0)
        mid = c[(u > 1.0) & (u < 2.0)]
        assert np.all((mid > 0.0) & (mid < 1.0))
        assert np.all(np.diff(c) <= 1e-15)


class TestConvolveAndExtend:
    def test_single_mode_eigenrelation(self):
        # a pure mode is an eigenvector: Phi_t * cos = m(t |xi|) cos
        dom = small_domain()
        f = single_mode(dom, [1])
        t = 0.7
        xi = 2.0 * math.pi / dom.side
        want = float(multiplier_values(heat(), np.array([t * xi]))[0])
        got = convolve_at_scale(f, heat(), t)
        assert np.allclose(got.values, want * f.values, atol=1e-14)

    def test_rejects_nonpositive_t(self):
        f = single_mode(small_domain(), [1])
        with pytest.raises(ValueError, match="positive"):
            convolve_at_scale(f, heat(), 0.0)

    def test_extend_rows_match_per_scale_convolution(self):
        dom = small_domain(d=2, n_space=8)
        f = band_limited_boundary(dom, np.random.default_rng(0), mode_hi=2)
        ext = extend(f, gauss_weierstrass(1))
        for j, s in enumerate(dom.scales()):
            row = convolve_at_scale(f, gauss_weierstrass(1), float(s)).values
            assert np.array_equal(ext.values[j], row)

    def test_extend_linear(self):
        dom = small_domain()
        rng = np.random.default_rng(1)
        f = band_limited_boundary(dom, rng)
        g = band_limited_boundary(dom, rng)
        combo = BoundaryField(dom, 2.0 * f.values - 3.0 * g.values)
        lhs = extend(combo, heat()).values
        rhs = 2.0 * extend(f, heat()).values - 3.0 * extend(g, heat()).values
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_complex_data_stays_complex(self):
        dom = small_domain()
        f = BoundaryField(dom, np.exp(2j * math.pi * dom.axis_coordinates() / dom.side))
        out = convolve_at_scale(f, heat(), 0.5)
        assert out.is_complex


class TestBlockTransform:
    def test_telescoping_reconstruction(self):
        dom = small_domain(n_space=32)
        f = band_limited_boundary(dom, np.random.default_rng(2))
        blocks = lp_block_transform(f)
        total = sum(b.values for b in blocks.values())
        assert np.allclose(total, f.values, atol=1e-12 * np.abs(f.values).max())

    def test_default_block_range(self):
        dom = small_domain(n_space=16)
        f = band_limited_boundary(dom, np.random.default_rng(3))
        blocks = lp_block_transform(f)
        # realized frequencies run from 2 pi / side to pi / h
        assert min(blocks) == math.floor(math.log2(2.0 * math.pi / dom.side) + 1e-12)
        assert max(blocks) == math.ceil(math.log2(math.pi / dom.h) - 1e-12)

    def test_mean_triggers_warning(self):
        dom = small_domain()
        f = BoundaryField(dom, np.ones(dom.spatial_shape))
        with pytest.warns(RuntimeWarning, match="mean"):
            blocks = lp_block_transform(f)
        total = sum(b.values for b in blocks.values())
        assert np.allclose(total, 0.0, atol=1e-12)

    def test_empty_range_rejected(self):
        dom = small_domain()
        f = band_limited_boundary(dom, np.random.default_rng(4))
        with pytest.raises(ValueError, match="empty block range"):
            lp_block_transform(f, k_lo=3, k_hi=1)


def block_family(dom, seed, n=3):
    rng = np.random.default_rng(seed)
    return {
        k: BoundaryField(dom, rng.normal(size=dom.spatial_shape))
        for k in range(-1, -1 + n)
    }


class TestSequenceNorms:
    @pytest.mark.parametrize("q,beta", [(2.0, 0.0), (1.0, 0.5), (2.0, -0.25)])
    def test_f_endpoint_matches_brute(self, q, beta):
        dom = small_domain()
        blocks = block_family(dom, 5)
        assert f_endpoint_norm(blocks, q, beta) == pytest.approx(
            brute_f_endpoint(blocks, q, beta), rel=1e-12
        )

    @pytest.mark.parametrize("q,alpha", [(2.0, 2.0), (2.0, 1.0), (1.0, 0.5), (INF, 2.0)])
    def test_x_norm_matches_brute(self, q, alpha):
        dom = small_domain(d=2, n_space=8)
        blocks = block_family(dom, 6)
        assert x_norm(blocks, q, alpha) == pytest.approx(
            brute_x_norm(blocks, q, alpha), rel=1e-12
        )

    def test_x_matches_endpoint_at_beta_zero(self):
        dom = small_domain()
        blocks = block_family(dom, 7)
        assert x_norm(blocks, 2.0, 2.0) == pytest.approx(
            f_endpoint_norm(blocks, 2.0, 0.0), rel=1e-14
        )

    def test_parameter_bounds(self):
        dom = small_domain()
        blocks = block_family(dom, 8)
        with pytest.raises(ValueError):
            f_endpoint_norm(blocks, INF, 0.0)
        with pytest.raises(ValueError):
            x_norm(blocks, 2.0, INF)
        with pytest.raises(ValueError):
            x_norm(blocks, 0.0, 1.0)
        with pytest.raises(ValueError, match="no frequency blocks"):
            x_norm({}, 2.0, 2.0)

    def test_mixed_domains_rejected(self):
        a = BoundaryField(small_domain(), np.ones(16))
        b = BoundaryField(small_domain(n_space=32), np.ones(32))
        with pytest.raises(ValueError, match="different domains"):
            x_norm({0: a, 1: b}, 2.0, 2.0)


class TestConvolutionInequality:
    def test_delta_hypothesis_enforced(self):
        dom = small_domain()
        blocks = block_family(dom, 9)
        with pytest.raises(HypothesisError, match="d/alpha"):
            convolution_inequality_check(blocks, 2.0, 2.0, 0.5)

    def test_zero_family_degenerate(self):
        dom = small_domain()
        blocks = {0: BoundaryField(dom, np.zeros(dom.spatial_shape))}
        assert math.isnan(convolution_inequality_check(blocks, 2.0, 2.0, 1.0))

    def test_ratio_at_least_one(self):
        # the l = k term alone reproduces |g_l|, so smoothing only adds mass
        dom = small_domain()
        blocks = block_family(dom, 10)
        assert convolution_inequality_check(blocks, 2.0, 2.0, 1.0) >= 1.0

    def test_ratio_nonincreasing_in_delta(self):
        dom = small_domain()
        blocks = block_family(dom, 11)
        ratios = [
            convolution_inequality_check(blocks, 2.0, 2.0, delta)
            for delta in (0.75, 1.0, 1.5, 2.5)
        ]
        assert all(a >= b - 1e-12 for a, b in zip(ratios, ratios[1:]))


class TestPeetreMaximal:
    def test_dominates_convolution(self):
        dom = small_domain()
        f = band_limited_boundary(dom, np.random.default_rng(12))
        t, a = 0.5, 2.0
        m = peetre_maximal(f, heat(), t, a).values
        conv = np.abs(convolve_at_scale(f, heat(), t).values)
        assert np.all(m >= conv - 1e-14)

    def test_translate_bound(self):
        # |Phi_t * f|(x + y) <= (1 + |y| / t)^a M(x) for every grid shift y
        dom = small_domain()
        f = band_limited_boundary(dom, np.random.default_rng(13))
        t, a = 0.7, 1.5
        m = peetre_maximal(f, heat(), t, a).values
        conv = np.abs(convolve_at_scale(f, heat(), t).values)
        for shift in range(dom.n_space):
            dy = shift * dom.h
            dist = abs((dy + dom.side / 2.0) % dom.side - dom.side / 2.0)
            bound = (1.0 + dist / t) ** a * m
            assert np.all(np.roll(conv, -shift) <= bound * (1 + 1e-12))

    def test_decreasing_in_a(self):
        dom = small_domain(d=2, n_space=8)
        f = band_limited_boundary(dom, np.random.default_rng(14), mode_hi=2)
        small = peetre_maximal(f, heat(), 0.5, 4.0).values
        large = peetre_maximal(f, heat(), 0.5, 1.0).values
        assert np.all(small <= large * (1 + 1e-12))

    def test_rejects_bad_a(self):
        f = single_mode(small_domain(), [1])
        with pytest.raises(ValueError, match="positive"):
            peetre_maximal(f, heat(), 0.5, 0.0)


class TestCharacterizationHypotheses:
    def test_heat_admissible_below_zero(self):
        check_characterization(heat(), -0.5)

    @pytest.mark.parametrize("beta", [0.0, 0.5])
    def test_heat_rejected_at_and_above_zero(self, beta):
        with pytest.raises(HypothesisError, match="moments"):
            check_characterization(heat(), beta)

    def test_moment_raised_kernels_admit_higher_beta(self):
        check_characterization(gauss_weierstrass(1), 0.5)
        check_characterization(gauss_weierstrass(2), 1.5)
        with pytest.raises(HypothesisError, match="moments"):
            check_characterization(gauss_weierstrass(1), 1.0)

    def test_block_kernel_admits_any_beta(self):
        check_characterization(lp_block(), 5.0)
        check_characterization(lp_block(), -5.0)

    def test_vanishing_annulus_rejected(self):
        dead = custom_kernel([(0.0, 1.0), (0.5, 0.0)], 10.0)
        with pytest.raises(HypothesisError, match="annulus"):
            check_characterization(dead, 0.0)
