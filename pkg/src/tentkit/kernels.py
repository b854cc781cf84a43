"""Convolution kernels on the torus: extensions, frequency blocks, maximal ops.

All convolutions are spectral: a kernel is its radial Fourier multiplier
m(u) evaluated at u = t |xi|, with xi the angular frequencies 2 pi n / side.
The Gauss-Weierstrass kernel at t is the heat semigroup at time t^2; its
moment-raised variants u^n exp(-u^2) kill moments up to order n - 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .core import (
    INF,
    BoundaryField,
    Domain,
    HalfSpaceField,
    HypothesisError,
)

__all__ = [
    "KernelSpec",
    "heat",
    "gauss_weierstrass",
    "lp_block",
    "custom_kernel",
    "multiplier_values",
    "extend",
    "convolve_at_scale",
    "lp_block_transform",
    "f_endpoint_norm",
    "x_norm",
    "convolution_inequality_check",
    "peetre_maximal",
    "check_characterization",
]

_KINDS = ("gauss_weierstrass", "lp_block", "custom")


@dataclass(frozen=True)
class KernelSpec:
    """A radial Fourier multiplier family Phi_t, identified by its profile.

    kind "gauss_weierstrass" with moment factor n has profile
    u^n exp(-u^2); n = 0 is the heat kernel (moment order -1, only usable
    below weight zero).  kind "lp_block" is the smooth annular bump
    supported on [1/2, 2] that the frequency decomposition uses.  kind
    "custom" interpolates a tabulated profile linearly and must declare its
    vanishing-moment order.
    """

    kind: str
    n: int = 0
    table: tuple[tuple[float, float], ...] | None = None
    moments: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, want one of {_KINDS}")
        if self.kind == "gauss_weierstrass":
            if self.n < 0:
                raise ValueError(f"moment factor must be >= 0, got {self.n}")
        if self.kind == "custom":
            if not self.table:
                raise ValueError("custom kernels need a profile table")
            if self.moments is None:
                raise ValueError("custom kernels must declare their vanishing-moment order")
            us = [u for u, _ in self.table]
            if any(b <= a for a, b in zip(us, us[1:])):
                raise ValueError("profile table abscissae must increase")

    @property
    def moment_order(self) -> float:
        """Largest order through which the kernel's moments vanish."""
        if self.kind == "gauss_weierstrass":
            return self.n - 1
        if self.kind == "lp_block":
            return INF
        return float(self.moments)


def heat() -> KernelSpec:
    return KernelSpec("gauss_weierstrass", 0)


def gauss_weierstrass(n: int) -> KernelSpec:
    """Heat profile with n spectral zeros at the origin: u^n exp(-u^2)."""
    return KernelSpec("gauss_weierstrass", n)


def lp_block() -> KernelSpec:
    return KernelSpec("lp_block")


def custom_kernel(table, moments: float) -> KernelSpec:
    return KernelSpec("custom", table=tuple((float(u), float(v)) for u, v in table), moments=moments)


def _glue(x: np.ndarray) -> np.ndarray:
    # exp(-1/x) on x > 0, zero elsewhere; smooth across 0
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_cutoff(u) -> np.ndarray:
    """C^inf cutoff, 1 on [0, 1], 0 on [2, inf), strictly between otherwise."""
    u = np.asarray(u, dtype=float)
    hi = _glue(2.0 - u)
    lo = _glue(u - 1.0)
    return hi / (hi + lo)


def _annular_bump(u: np.ndarray) -> np.ndarray:
    return smooth_cutoff(u) - smooth_cutoff(2.0 * u)


def multiplier_values(kernel: KernelSpec, u) -> np.ndarray:
    """Radial profile m(u) of the kernel's Fourier multiplier."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("multiplier argument must be nonnegative")
    if kernel.kind == "gauss_weierstrass":
        base = np.exp(-(u**2))
        return u**kernel.n * base if kernel.n else base
    if kernel.kind == "lp_block":
        return _annular_bump(u)
    xs = np.array([p[0] for p in kernel.table])
    ys = np.array([p[1] for p in kernel.table])
    return np.interp(u, xs, ys, left=0.0, right=0.0)


@lru_cache(maxsize=None)
def _freq_magnitude(dom: Domain) -> np.ndarray:
    axis = 2.0 * math.pi * np.fft.fftfreq(dom.n_space, d=dom.h)
    grids = np.meshgrid(*([axis] * dom.d), indexing="ij")
    mag = np.sqrt(sum(g**2 for g in grids))
    mag.setflags(write=False)
    return mag


def _apply_multiplier(f: BoundaryField, profile: np.ndarray) -> np.ndarray:
    fhat = np.fft.fftn(f.values)
    out = np.fft.ifftn(fhat * profile)
    return out.real if not f.is_complex else out


def convolve_at_scale(f: BoundaryField, kernel: KernelSpec, t: float) -> BoundaryField:
    """Phi_t * f via the multiplier m(t |xi|)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    mag = _freq_magnitude(f.domain)
    return BoundaryField(f.domain, _apply_multiplier(f, multiplier_values(kernel, t * mag)), f.label)


def extend(f: BoundaryField, kernel: KernelSpec) -> HalfSpaceField:
    """Half-space extension (Phi_s * f)(x) over the domain's scale grid."""
    dom = f.domain
    mag = _freq_magnitude(dom)
    fhat = np.fft.fftn(f.values)
    rows = []
    for s in dom.scales():
        out = np.fft.ifftn(fhat * multiplier_values(kernel, float(s) * mag))
        rows.append(out.real if not f.is_complex else out)
    return HalfSpaceField(dom, np.stack(rows, axis=0), f.label)


def lp_block_transform(
    f: BoundaryField, k_lo: int | None = None, k_hi: int | None = None
) -> dict[int, BoundaryField]:
    """Frequency blocks g_k = (bump at scale 2^k) * f, telescoping to f.

    The default block range covers every nonzero mode of the grid, so
    summing the blocks reconstructs f minus its mean.  Data with a
    nonvanishing mean triggers a spectral-gap warning; the mean is invisible
    to every block.
    """
    dom = f.domain
    mag = _freq_magnitude(dom)
    fhat = np.fft.fftn(f.values)
    dc = abs(complex(fhat.flat[0])) / f.values.size
    scale = float(np.abs(f.values).max())
    if scale > 0 and dc > 1e-12 * scale:
        warnings.warn(
            f"boundary data has mean {dc:.3g}; frequency blocks cannot see it",
            RuntimeWarning,
            stacklevel=2,
        )
    positive = mag[mag > 0]
    if k_lo is None:
        k_lo = math.floor(math.log2(positive.min()) + 1e-12)
    if k_hi is None:
        k_hi = math.ceil(math.log2(positive.max()) - 1e-12)
    if k_lo > k_hi:
        raise ValueError(f"empty block range [{k_lo}, {k_hi}]")
    blocks: dict[int, BoundaryField] = {}
    for k in range(k_lo, k_hi + 1):
        profile = _annular_bump(2.0**-k * mag)
        blocks[k] = BoundaryField(dom, _apply_multiplier(f, profile), f.label)
    return blocks


def _common_domain(blocks: Mapping[int, BoundaryField]) -> Domain:
    if not blocks:
        raise ValueError("no frequency blocks")
    doms = {b.domain for b in blocks.values()}
    if len(doms) != 1:
        raise ValueError("frequency blocks live on different domains")
    return next(iter(doms))


def _cube_generations(dom: Domain) -> range:
    g_min = round(math.log2(dom.h))
    return range(g_min, dom.root_generation + 1)


def _sup_of_cube_means(dom: Domain, per_generation_body) -> float:
    """sup over generations g and cubes P of generation g of the mean over P
    of per_generation_body(g); entries of None are skipped."""
    from .dyadic import _block_reduce  # shared block reduction

    best = 0.0
    for g in _cube_generations(dom):
        body = per_generation_body(g)
        if body is None:
            continue
        npc = round(2.0**g / dom.h)
        means = _block_reduce(body, npc, "sum") / float(npc**dom.d)
        best = max(best, float(means.max()))
    return best


def f_endpoint_norm(blocks: Mapping[int, BoundaryField], q: float, beta: float) -> float:
    """Endpoint frequency-block norm

        sup_P ( mean_P sum_{k >= -log2 l(P)} 2^(k beta q) |g_k|^q )^(1/q)

    over all dyadic cubes P of the grid, cells included.
    """
    if not 0 < q < INF:
        raise ValueError(f"q must lie in (0, inf), got {q}")
    dom = _common_domain(blocks)
    ks = sorted(blocks, reverse=True)
    suffix: dict[int, np.ndarray] = {}
    running = np.zeros(dom.spatial_shape)
    for k in ks:
        running = running + 2.0 ** (k * beta * q) * np.abs(blocks[k].values) ** q
        suffix[k] = running

    def body(g: int):
        eligible = [k for k in ks if k >= -g]
        if not eligible:
            return None
        return suffix[eligible[-1]]

    return _sup_of_cube_means(dom, body) ** (1.0 / q)


def x_norm(blocks: Mapping[int, BoundaryField], q: float, alpha: float) -> float:
    """Carleson-type sequence norm

        sup_P ( mean_P ( sum_{k >= -log2 l(P)} |g_k|^q )^(alpha/q) )^(1/alpha).
    """
    if not alpha > 0 or alpha == INF:
        raise ValueError(f"alpha must lie in (0, inf), got {alpha}")
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    dom = _common_domain(blocks)
    ks = sorted(blocks, reverse=True)
    suffix: dict[int, np.ndarray] = {}
    running = np.zeros(dom.spatial_shape)
    for k in ks:
        mag = np.abs(blocks[k].values)
        running = np.maximum(running, mag) if q == INF else running + mag**q
        suffix[k] = running

    def body(g: int):
        eligible = [k for k in ks if k >= -g]
        if not eligible:
            return None
        tail = suffix[eligible[-1]]
        return tail**alpha if q == INF else tail ** (alpha / q)

    return _sup_of_cube_means(dom, body) ** (1.0 / alpha)


def convolution_inequality_check(
    blocks: Mapping[int, BoundaryField], q: float, alpha: float, delta: float
) -> float:
    """Ratio of the X-norm after smoothing h_l = sum_k 2^(-|k-l| delta) g_k
    to the X-norm of the blocks themselves.

    Only defined for delta > d / alpha; smaller delta raises
    HypothesisError.  A zero family gives nan (degenerate, not an error).
    """
    dom = _common_domain(blocks)
    if not delta > dom.d / alpha:
        raise HypothesisError(
            f"delta = {delta} does not exceed d/alpha = {dom.d / alpha}; the convolution bound needs delta > d/alpha"
        )
    denom = x_norm(blocks, q, alpha)
    if denom == 0.0:
        return math.nan
    ks = sorted(blocks)
    smoothed: dict[int, BoundaryField] = {}
    for l in ks:
        acc = np.zeros(dom.spatial_shape)
        for k in ks:
            acc = acc + 2.0 ** (-abs(k - l) * delta) * np.abs(blocks[k].values)
        smoothed[l] = BoundaryField(dom, acc)
    return x_norm(smoothed, q, alpha) / denom


def peetre_maximal(f: BoundaryField, kernel: KernelSpec, t: float, a: float) -> BoundaryField:
    """Peetre maximal function sup_y |Phi_t * f|(x + y) / (1 + |y| / t)^a.

    y runs over the whole torus with periodic distance; a > 0.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    dom = f.domain
    conv = np.abs(convolve_at_scale(f, kernel, t).values)
    dy = np.arange(dom.n_space) * dom.h
    delta = (dy + dom.side / 2.0) % dom.side - dom.side / 2.0
    grids = np.meshgrid(*([delta] * dom.d), indexing="ij")
    dist = np.sqrt(sum(g**2 for g in grids))
    weight = (1.0 + dist / t) ** (-a)
    out = np.zeros(dom.spatial_shape)
    axes = tuple(range(dom.d))
    for off in np.ndindex(dom.spatial_shape):
        np.maximum(out, weight[off] * np.roll(conv, shift=tuple(-o for o in off), axis=axes), out=out)
    return BoundaryField(dom, out, f.label)


def check_characterization(kernel: KernelSpec, beta: float) -> None:
    """Hypotheses of the kernel characterization: moments past beta and a
    nondegenerate annulus.

    The existential annulus is witnessed at unit scale: the profile must be
    strictly positive on (1/2, 1).  Violations raise HypothesisError.
    """
    if not kernel.moment_order + 1 > beta:
        raise HypothesisError(
            f"kernel kills moments through order {kernel.moment_order}, "
            f"needs more than beta = {beta}"
        )
    u = np.linspace(0.5625, 0.9375, 25)
    if np.any(multiplier_values(kernel, u) <= 0):
        raise HypothesisError("kernel profile vanishes on the unit annulus")
