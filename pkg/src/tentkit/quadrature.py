"""Quadrature primitives: power means, periodic balls, Whitney box averages.

All spatial averaging is over periodic-distance balls realized as cell
stencils, so the cell count under a ball is independent of its center and
saturates at the full torus for radii past side * sqrt(d) / 2.  Window means
in the scale variable are normalized by the full geometric-lattice window
(cells outside the realized grid carry zero field mass), which keeps the
discrete Fubini identity exact; see Domain.extended_t_grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .core import (
    INF,
    Domain,
    EmptyDomainError,
    GeometryError,
    HalfSpaceField,
    lattice_window,
)

__all__ = [
    "AverageSpec",
    "WHITNEY",
    "power_mean",
    "lp_norm",
    "ball_mask",
    "ball_count",
    "ball_sum",
    "ball_mean",
    "ball_max",
    "full_window_weight",
    "whitney_average",
    "whitney_average_field",
]


@dataclass(frozen=True)
class AverageSpec:
    """Whitney window and ball proportions: window (a t, b t], ball radius c t."""

    a: float = 0.5
    b: float = 1.0
    c: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.a < self.b:
            raise ValueError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if not self.c > 0:
            raise ValueError(f"need c > 0, got c={self.c}")


WHITNEY = AverageSpec()


def power_mean(samples, weights, rho: float) -> float:
    """Weighted power mean (sum w s^rho / sum w)^(1/rho); rho=inf is the max.

    Samples must be nonnegative and weights positive, equal length, nonempty.
    Monotone in rho by Jensen.
    """
    s = np.asarray(samples, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if s.size == 0:
        raise EmptyDomainError("power mean over no samples")
    if s.size != w.size:
        raise ValueError(f"{s.size} samples but {w.size} weights")
    if np.any(s < 0):
        raise ValueError("samples must be nonnegative")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if rho == INF:
        return float(s.max())
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return float((np.dot(w, s**rho) / w.sum()) ** (1.0 / rho))


def lp_norm(values, p: float, cell_volume: float) -> float:
    """L^p norm of grid samples against the counting measure times cell_volume."""
    v = np.abs(np.asarray(values)).ravel()
    if v.size == 0:
        raise EmptyDomainError("L^p norm over no samples")
    if p == INF:
        return float(v.max())
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((np.sum(v**p) * cell_volume) ** (1.0 / p))


@lru_cache(maxsize=None)
def _wrapped_axis_offsets(dom: Domain) -> np.ndarray:
    # displacement dy*h wrapped into [-side/2, side/2)
    dy = np.arange(dom.n_space) * dom.h
    return (dy + dom.side / 2.0) % dom.side - dom.side / 2.0


@lru_cache(maxsize=None)
def _ball_mask(dom: Domain, radius: float) -> np.ndarray:
    delta = _wrapped_axis_offsets(dom)
    grids = np.meshgrid(*([delta] * dom.d), indexing="ij")
    dist2 = sum(g**2 for g in grids)
    mask = dist2 < radius * radius
    mask.setflags(write=False)
    return mask


def ball_mask(dom: Domain, radius: float) -> np.ndarray:
    """Boolean stencil of cells within periodic distance radius of cell 0.

    Indexed by displacement in roll convention; always contains the center.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return _ball_mask(dom, float(radius))


@lru_cache(maxsize=None)
def _ball_count(dom: Domain, radius: float) -> int:
    return int(_ball_mask(dom, radius).sum())


def ball_count(dom: Domain, radius: float) -> int:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return _ball_count(dom, float(radius))


@lru_cache(maxsize=None)
def _ball_mask_rfft(dom: Domain, radius: float) -> np.ndarray:
    out = np.conj(np.fft.rfftn(_ball_mask(dom, radius).astype(np.float64)))
    out.setflags(write=False)
    return out


def ball_sum(dom: Domain, arr: np.ndarray, radius: float) -> np.ndarray:
    """Sum of arr over the ball stencil around every grid cell (periodic)."""
    if arr.shape != dom.spatial_shape:
        raise ValueError(f"array shape {arr.shape} does not match grid {dom.spatial_shape}")
    kernel = _ball_mask_rfft(dom, float(radius))
    axes = tuple(range(arr.ndim))
    return np.fft.irfftn(np.fft.rfftn(arr) * kernel, s=arr.shape, axes=axes)


def ball_mean(dom: Domain, arr: np.ndarray, radius: float) -> np.ndarray:
    return ball_sum(dom, arr, radius) / ball_count(dom, radius)


def ball_max(dom: Domain, arr: np.ndarray, radius: float) -> np.ndarray:
    """Max of arr over the ball stencil around every grid cell (periodic)."""
    if arr.shape != dom.spatial_shape:
        raise ValueError(f"array shape {arr.shape} does not match grid {dom.spatial_shape}")
    n, h = dom.n_space, dom.h
    reach = math.ceil(radius / h) - 1  # largest |dy| with |dy| h < radius
    if reach <= 0:
        return arr.copy()
    if 2 * reach + 1 <= n:
        off = np.arange(-reach, reach + 1) * h
        grids = np.meshgrid(*([off] * dom.d), indexing="ij")
        fp = sum(g**2 for g in grids) < radius * radius
        return ndimage.maximum_filter(arr, footprint=fp, mode="wrap")
    mask = _ball_mask(dom, float(radius))
    if mask.all():
        return np.full_like(arr, arr.max())
    # wide but not saturated; only reachable for d >= 2
    out = np.full_like(arr, -np.inf)
    axes = tuple(range(dom.d))
    for off in np.argwhere(mask):
        np.maximum(out, np.roll(arr, shift=tuple(-off), axis=axes), out=out)
    return out


def full_window_weight(dom: Domain, lo: float, hi: float) -> float:
    """Measure sum_{lattice cells in (lo, hi]} s dlog over the full lattice."""
    u_lo, u_hi = lattice_window(dom, lo, hi)
    if u_lo > u_hi:
        return 0.0
    u = np.arange(u_lo, u_hi + 1)
    return dom.dlog * float(np.sum(dom.s_min * 2.0 ** (u / dom.m_scale)))


def _realized_window(dom: Domain, lo: float, hi: float) -> tuple[int, int]:
    u_lo, u_hi = lattice_window(dom, lo, hi)
    return max(u_lo, 0), min(u_hi, dom.n_scales - 1)


def whitney_average_field(
    field: HalfSpaceField,
    t: float,
    rho: float,
    beta: float = 0.0,
    spec: AverageSpec = WHITNEY,
    dilation: float = 1.0,
) -> np.ndarray:
    """Whitney box average of |s^-beta f|^rho at every grid point, ^(1/rho).

    For finite rho the mean runs over the window (a t, b t] with cell weights
    s dlog, normalized by the full lattice window weight, and over the ball
    of radius c t dilation, normalized by the cell count of the undilated
    ball.  Lattice cells outside the realized grid carry zero mass.  rho=inf
    takes the max over realized cells instead; a window that misses the
    lattice entirely raises EmptyDomainError.
    """
    dom = field.domain
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if not dilation > 0:
        raise ValueError(f"dilation must be positive, got {dilation}")
    radius = spec.c * t * dilation
    j_lo, j_hi = _realized_window(dom, spec.a * t, spec.b * t)
    if rho == INF:
        if j_lo > j_hi:
            return np.zeros(dom.spatial_shape)
        s = dom.scales()[j_lo : j_hi + 1]
        block = np.abs(field.values[j_lo : j_hi + 1])
        if beta:
            block = block * (s**-beta).reshape((-1,) + (1,) * dom.d)
        return ball_max(dom, block.max(axis=0), radius)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    w_full = full_window_weight(dom, spec.a * t, spec.b * t)
    if w_full <= 0:
        raise EmptyDomainError(f"window ({spec.a * t}, {spec.b * t}] misses the scale lattice")
    n_ref = ball_count(dom, spec.c * t)
    if j_lo > j_hi:
        return np.zeros(dom.spatial_shape)
    s = dom.scales()[j_lo : j_hi + 1]
    w = dom.dlog * s ** (1.0 - beta * rho)
    collapsed = np.tensordot(w, np.abs(field.values[j_lo : j_hi + 1]) ** rho, axes=(0, 0))
    mean_rho = ball_sum(dom, collapsed, radius) / (w_full * n_ref)
    np.maximum(mean_rho, 0.0, out=mean_rho)  # FFT roundoff can dip below zero
    return mean_rho ** (1.0 / rho)


def whitney_average(
    field: HalfSpaceField,
    x,
    t: float,
    rho: float,
    beta: float = 0.0,
    spec: AverageSpec = WHITNEY,
) -> float:
    """Whitney box average at a single grid cell x.

    x is a spatial cell multi-index (a plain int is accepted for d=1).
    Preconditions per the interface contract: the window (a t, b t] must
    meet the scale grid, and the ball must fit the torus, c t <= side / 2.
    Norm kernels do not route through this entry point; they use the
    saturating stencil of whitney_average_field.
    """
    dom = field.domain
    if isinstance(x, (int, np.integer)):
        x = (int(x),)
    x = tuple(int(i) for i in x)
    if len(x) != dom.d:
        raise IndexError(f"cell index {x} has {len(x)} axes, domain has d={dom.d}")
    if any(not 0 <= i < dom.n_space for i in x):
        raise IndexError(f"cell index {x} outside the grid")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if spec.c * t > dom.side / 2.0 * (1 + 1e-12):
        raise GeometryError(f"ball radius {spec.c * t} exceeds half period {dom.side / 2.0}")
    j_lo, j_hi = _realized_window(dom, spec.a * t, spec.b * t)
    if j_lo > j_hi:
        raise EmptyDomainError(f"window ({spec.a * t}, {spec.b * t}] misses the scale grid")
    offs = np.nonzero(ball_mask(dom, spec.c * t))
    cells = tuple((o + xi) % dom.n_space for o, xi in zip(offs, x))
    block = np.abs(field.values[(slice(j_lo, j_hi + 1),) + cells])  # (window, ball)
    s = dom.scales()[j_lo : j_hi + 1]
    if beta:
        block = block * (s**-beta)[:, None]
    if rho == INF:
        return float(block.max())
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    w_full = full_window_weight(dom, spec.a * t, spec.b * t)
    num = float(np.sum((dom.dlog * s)[:, None] * block**rho))
    return (num / (w_full * offs[0].size)) ** (1.0 / rho)
