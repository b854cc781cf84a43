"""Seeded test-function families: modes, lacunary sums, indicators, noise.

Everything is deterministic given the generator state; families consume
their rng in a fixed order so a seed pins the whole collection.  Boundary
members are mean-zero by construction (nonzero Fourier modes only).
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    BoundaryField,
    Domain,
    DyadicCube,
    HalfSpaceField,
    SubsetFamily,
    cube_cell_slices,
    cube_cells_per_axis,
    lattice_window,
)
from .dyadic import LocalMeanField
from .kernels import extend, heat

__all__ = [
    "single_mode",
    "band_limited_boundary",
    "lacunary_boundary",
    "resolved_mode_cap",
    "whitney_indicator",
    "box_field",
    "random_halfspace",
    "boundary_family",
    "halfspace_family",
    "random_subsets",
    "random_cube",
]


def _axis_grids(dom: Domain) -> list[np.ndarray]:
    x = dom.axis_coordinates()
    return list(np.meshgrid(*([x] * dom.d), indexing="ij"))


def single_mode(dom: Domain, mode, amplitude: float = 1.0, phase: float = 0.0) -> BoundaryField:
    """Real Fourier mode amplitude * cos(2 pi mode . x / side + phase)."""
    mode = np.atleast_1d(np.asarray(mode, dtype=float))
    if mode.shape != (dom.d,):
        raise ValueError(f"mode vector has shape {mode.shape}, want ({dom.d},)")
    grids = _axis_grids(dom)
    arg = sum(m * g for m, g in zip(mode, grids)) * (2.0 * math.pi / dom.side)
    return BoundaryField(dom, amplitude * np.cos(arg + phase), label=f"mode{tuple(int(m) for m in mode)}")


def _draw_mode(dom: Domain, rng: np.random.Generator, lo: int, hi: int) -> np.ndarray:
    while True:
        m = rng.integers(-hi, hi + 1, size=dom.d)
        norm = math.sqrt(float(np.dot(m, m)))
        if lo <= norm <= hi:
            return m


def band_limited_boundary(
    dom: Domain,
    rng: np.random.Generator,
    mode_lo: int = 1,
    mode_hi: int | None = None,
    n_modes: int = 5,
    label: str = "",
) -> BoundaryField:
    """Random trigonometric polynomial with |mode| in [mode_lo, mode_hi]."""
    if mode_hi is None:
        mode_hi = min(8, dom.n_space // 4)
    if mode_hi < mode_lo:
        raise ValueError(f"empty mode band [{mode_lo}, {mode_hi}]")
    grids = _axis_grids(dom)
    out = np.zeros(dom.spatial_shape)
    for _ in range(n_modes):
        m = _draw_mode(dom, rng, mode_lo, mode_hi)
        amp = rng.lognormal(0.0, 0.4)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        arg = sum(mi * g for mi, g in zip(m, grids)) * (2.0 * math.pi / dom.side)
        out += amp * np.cos(arg + phase)
    return BoundaryField(dom, out, label=label or "band_limited")


def lacunary_boundary(
    dom: Domain, rng: np.random.Generator, n_levels: int = 4, label: str = ""
) -> BoundaryField:
    """Lacunary sum sum_k c_k cos(2 pi 2^k x_1 / side + phase_k)."""
    max_level = int(math.log2(max(dom.n_space // 4, 2)))
    n_levels = min(n_levels, max_level + 1)
    grids = _axis_grids(dom)
    out = np.zeros(dom.spatial_shape)
    for k in range(n_levels):
        amp = rng.lognormal(0.0, 0.3) * 2.0 ** (-0.25 * k)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        out += amp * np.cos(2.0 * math.pi * (2.0**k) * grids[0] / dom.side + phase)
    return BoundaryField(dom, out, label=label or "lacunary")


def whitney_indicator(dom: Domain, cube: DyadicCube, amplitude: float = 1.0) -> HalfSpaceField:
    """Indicator of the Whitney box (l/2, l] x Q as a half-space field."""
    values = np.zeros((dom.n_scales,) + dom.spatial_shape)
    u_lo, u_hi = lattice_window(dom, cube.side_length / 2.0, cube.side_length)
    j_lo, j_hi = max(u_lo, 0), min(u_hi, dom.n_scales - 1)
    if j_lo <= j_hi:
        sl = cube_cell_slices(dom, cube)
        values[(slice(j_lo, j_hi + 1),) + sl] = amplitude
    return HalfSpaceField(dom, values, label=f"whitney_k{cube.k}_{cube.offset}")


def box_field(dom: Domain, s_lo: float, s_hi: float, corner, widths, amplitude: float = 1.0) -> HalfSpaceField:
    """Indicator of the half-open box [s_lo, s_hi) x prod [corner, corner + width).

    Half-open on every side: a scale cell belongs iff s_lo <= s_j < s_hi, a
    space cell iff its center lies in the box.
    """
    corner = np.atleast_1d(np.asarray(corner, dtype=float))
    widths = np.atleast_1d(np.asarray(widths, dtype=float))
    if corner.shape != (dom.d,) or widths.shape != (dom.d,):
        raise ValueError(f"corner and widths must have {dom.d} entries")
    s = dom.scales()
    in_s = (s >= s_lo * (1 - 1e-12)) & (s < s_hi * (1 - 1e-12))
    x = dom.axis_coordinates()
    axis_masks = [(x >= c) & (x < c + w) for c, w in zip(corner, widths)]
    spatial = axis_masks[0]
    for m in axis_masks[1:]:
        spatial = np.multiply.outer(spatial, m)
    values = amplitude * np.multiply.outer(in_s.astype(float), spatial.astype(float))
    return HalfSpaceField(dom, values, label="box")


def random_halfspace(dom: Domain, rng: np.random.Generator, n_modes: int = 3, label: str = "") -> HalfSpaceField:
    """Half-space field with independent band-limited slices per scale."""
    grids = _axis_grids(dom)
    mode_hi = min(8, dom.n_space // 4)
    rows = []
    for _ in range(dom.n_scales):
        row = np.zeros(dom.spatial_shape)
        for _ in range(n_modes):
            m = _draw_mode(dom, rng, 1, mode_hi)
            amp = rng.lognormal(0.0, 0.5)
            phase = rng.uniform(0.0, 2.0 * math.pi)
            arg = sum(mi * g for mi, g in zip(m, grids)) * (2.0 * math.pi / dom.side)
            row += amp * np.cos(arg + phase)
        rows.append(row * rng.uniform(0.5, 1.5))
    return HalfSpaceField(dom, np.stack(rows, axis=0), label=label or "random_halfspace")


def random_cube(dom: Domain, rng: np.random.Generator) -> DyadicCube:
    g_lo, g_hi = dom.generation_range()
    g_lo = max(g_lo, round(math.log2(dom.h)))
    k = int(rng.integers(g_lo, g_hi + 1))
    n_axis = round(dom.side / 2.0**k)
    offset = tuple(int(o) for o in rng.integers(0, n_axis, size=dom.d))
    return DyadicCube(k, offset)


def resolved_mode_cap(dom: Domain) -> int:
    """Largest Fourier mode the scale grid can average: s_min |xi| <= ~1.

    Content above this cap only matters at scales below s_min, which the
    grid truncates; members built past it compare a truncated tent norm
    against full-spectrum boundary quantities.
    """
    cap = int(dom.side / (2.0 * math.pi * dom.s_min))
    return max(1, min(cap, dom.n_space // 4))


def boundary_family(dom: Domain, seed: int, count: int) -> list[BoundaryField]:
    """Mean-zero boundary members: band-limited noise with lacunary sums mixed in.

    Frequencies stay inside the resolved band of the domain's scale grid.
    """
    rng = np.random.default_rng(seed)
    cap = resolved_mode_cap(dom)
    members = []
    for i in range(count):
        if i % 3 == 2:
            levels = int(math.log2(cap)) + 1
            b = lacunary_boundary(dom, rng, n_levels=levels, label=f"m{i:02d}_lacunary")
        else:
            lo = min(1 + (i % 2), cap)
            b = band_limited_boundary(dom, rng, mode_lo=lo, mode_hi=cap, label=f"m{i:02d}_band")
        members.append(b)
    return members


def halfspace_family(dom: Domain, seed: int, count: int) -> list[HalfSpaceField]:
    """Half-space members mixing noise, heat extensions, and Whitney bumps."""
    rng = np.random.default_rng(seed)
    members: list[HalfSpaceField] = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            members.append(random_halfspace(dom, rng, label=f"m{i:02d}_noise"))
        elif kind == 1:
            b = band_limited_boundary(dom, rng, mode_lo=2)
            u = extend(b, heat())
            members.append(HalfSpaceField(dom, u.values, label=f"m{i:02d}_heat"))
        elif kind == 2:
            cube = random_cube(dom, rng)
            amp = float(rng.lognormal(0.0, 0.4))
            members.append(
                HalfSpaceField(dom, whitney_indicator(dom, cube, amp).values, label=f"m{i:02d}_whitney")
            )
        else:
            acc = np.zeros((dom.n_scales,) + dom.spatial_shape)
            for _ in range(3):
                cube = random_cube(dom, rng)
                acc += whitney_indicator(dom, cube, float(rng.lognormal(0.0, 0.4))).values
            members.append(HalfSpaceField(dom, acc, label=f"m{i:02d}_boxes"))
    return members


def random_subsets(lm: LocalMeanField, rng: np.random.Generator, epsilon: float = 0.25) -> SubsetFamily:
    """Random subset E_Q for every cube of the local means, |E_Q| > epsilon |Q|."""
    dom = lm.domain
    masks = {}
    for k in range(lm.k_min, lm.k_max + 1):
        npc = cube_cells_per_axis(dom, k)
        n_cells = npc**dom.d
        keep = max(int(math.floor(epsilon * n_cells)) + 1, (n_cells + 1) // 2)
        keep = min(keep, n_cells)
        for offset in np.ndindex(lm.per_generation[k].shape):
            chosen = rng.choice(n_cells, size=keep, replace=False)
            flat = np.zeros(n_cells, dtype=bool)
            flat[chosen] = True
            masks[DyadicCube(k, offset)] = flat.reshape((npc,) * dom.d)
    return SubsetFamily(dom, epsilon, masks)
