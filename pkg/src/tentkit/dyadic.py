"""Dyadic-cube characterizations: local means, medians, sequence norms.

A cube Q of generation k owns the Whitney box (l/2, l] x Q, l = 2^k.  The
local mean a_Q is the L^r norm of the field over that box against the
measure dy ds / s^(d+1).  Everything downstream (dyadic tent norms, square
functions, medians, John-Nirenberg forms) aggregates indicator sums of
these per-cube quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .core import (
    INF,
    BoundaryField,
    CoverageError,
    CubeSequence,
    Domain,
    DyadicCube,
    EmptyDomainError,
    ExponentTuple,
    GeometryError,
    HalfSpaceField,
    SubsetFamily,
    cube_cell_slices,
    cube_cells_per_axis,
    lattice_window,
)
from .quadrature import lp_norm
from .tent_norms import NormResult

__all__ = [
    "LocalMeanField",
    "local_means",
    "dyadic_tent_norm",
    "dyadic_subset_norm",
    "local_square_function",
    "c_median",
    "median_field",
    "sequence_norm",
    "jn_dyadic_norm",
    "owning_generation",
]


def owning_generation(dom: Domain, j: int) -> int:
    """Generation k of the unique Whitney window (2^(k-1), 2^k] holding s_j."""
    if not 0 <= j < dom.n_scales:
        raise IndexError(f"scale index {j} outside [0, {dom.n_scales})")
    return math.ceil(math.log2(dom.scale_value(j)) - 1e-9)


@dataclass(frozen=True)
class LocalMeanField:
    """Per-cube local means a_Q for generations k_min .. k_max.

    per_generation[k] holds the cube values of generation k as an array of
    shape (side / 2^k,) * d in offset order.
    """

    domain: Domain
    r: float
    k_min: int
    k_max: int
    per_generation: Mapping[int, np.ndarray]

    def __post_init__(self) -> None:
        clean = {}
        for k in range(self.k_min, self.k_max + 1):
            arr = np.asarray(self.per_generation[k], dtype=float)
            nb = round(self.domain.side / 2.0**k)
            if arr.shape != (nb,) * self.domain.d:
                raise ValueError(f"generation {k} array has shape {arr.shape}, want {(nb,) * self.domain.d}")
            arr = arr.copy()
            arr.setflags(write=False)
            clean[k] = arr
        object.__setattr__(self, "per_generation", clean)

    def value(self, cube: DyadicCube) -> float:
        if not self.k_min <= cube.k <= self.k_max:
            raise KeyError(f"generation {cube.k} outside [{self.k_min}, {self.k_max}]")
        return float(self.per_generation[cube.k][cube.offset])

    def cubes(self) -> Iterator[DyadicCube]:
        for k in range(self.k_min, self.k_max + 1):
            arr = self.per_generation[k]
            for offset in np.ndindex(arr.shape):
                yield DyadicCube(k, offset)

    def as_sequence(self) -> CubeSequence:
        """Coefficients s_Q = |Q|^(1/2) a_Q of the sequence-space picture."""
        entries = {}
        for cube in self.cubes():
            entries[cube] = cube.volume**0.5 * self.value(cube)
        return CubeSequence(entries)


def _block_reduce(arr: np.ndarray, npc: int, how: str) -> np.ndarray:
    d = arr.ndim
    nb = arr.shape[0] // npc
    r = arr.reshape(sum(((nb, npc) for _ in range(d)), ()))
    axes = tuple(range(1, 2 * d, 2))
    return r.sum(axis=axes) if how == "sum" else r.max(axis=axes)


def _expand(arr: np.ndarray, npc: int) -> np.ndarray:
    out = arr
    for ax in range(arr.ndim):
        out = np.repeat(out, npc, axis=ax)
    return out


def local_means(
    f: HalfSpaceField, r: float, k_min: int | None = None, k_max: int | None = None
) -> LocalMeanField:
    """L^r local means over Whitney boxes, measure dy ds / s^(d+1).

    Defaults cover every generation whose window meets the scale grid.
    Generations whose cubes drop below the grid step or exceed the torus are
    rejected.
    """
    dom = f.domain
    g_lo, g_hi = dom.generation_range()
    if k_min is None:
        k_min = g_lo
    if k_max is None:
        k_max = g_hi
    if k_min > k_max:
        raise ValueError(f"empty generation range [{k_min}, {k_max}]")
    if 2.0**k_min < dom.h * (1 - 1e-12):
        raise GeometryError(f"generation {k_min} cube is below the grid step {dom.h}")
    if k_max > dom.root_generation:
        raise GeometryError(f"generation {k_max} cube exceeds the torus")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    s = dom.scales()
    per: dict[int, np.ndarray] = {}
    for k in range(k_min, k_max + 1):
        npc = cube_cells_per_axis(dom, k)
        nb = dom.n_space // npc
        u_lo, u_hi = lattice_window(dom, 2.0 ** (k - 1), 2.0**k)
        j_lo, j_hi = max(u_lo, 0), min(u_hi, dom.n_scales - 1)
        if j_lo > j_hi:
            per[k] = np.zeros((nb,) * dom.d)
            continue
        slab = np.abs(f.values[j_lo : j_hi + 1])
        if r == INF:
            per[k] = _block_reduce(slab.max(axis=0), npc, "max")
        else:
            w = dom.dlog * s[j_lo : j_hi + 1] ** (-dom.d)
            cell = np.tensordot(w, slab**r, axes=(0, 0)) * dom.cell_volume
            per[k] = _block_reduce(cell, npc, "sum") ** (1.0 / r)
    return LocalMeanField(dom, float(r), k_min, k_max, per)


def _require_matching_r(lm: LocalMeanField, e: ExponentTuple) -> None:
    if e.r != lm.r:
        raise ValueError(f"exponent r={e.r} does not match the local means (r={lm.r})")


def _weight_grids(lm: LocalMeanField, q: float, beta: float, masked: SubsetFamily | None = None) -> dict[int, np.ndarray]:
    """Full-grid arrays of the per-cube summand, one per generation.

    Finite q: W = 1_Q |Q|^(-beta q / d) a_Q^q summed over the generation's
    cubes; q = inf: the base value |Q|^(-beta/d) a_Q instead.  With a subset
    family the indicator 1_Q shrinks to 1_{E_Q}.
    """
    dom = lm.domain
    grids: dict[int, np.ndarray] = {}
    for k in range(lm.k_min, lm.k_max + 1):
        a = lm.per_generation[k]
        ell = 2.0**k
        w = ell**-beta * a if q == INF else ell ** (-beta * q) * a**q
        if masked is None:
            npc = cube_cells_per_axis(dom, k)
            grids[k] = _expand(w, npc)
        else:
            grid = np.zeros(dom.spatial_shape)
            for offset in np.ndindex(a.shape):
                if w[offset] == 0.0:
                    continue
                cube = DyadicCube(k, offset)
                mask = masked.masks.get(cube)
                if mask is None:
                    raise CoverageError(f"subset family misses {cube}, which carries mass")
                grid[cube_cell_slices(dom, cube)][mask] = w[offset]
            grids[k] = grid
    return grids


def _aggregate_grids(dom: Domain, grids: Mapping[int, np.ndarray], p: float, q: float, alpha: float | None = None) -> float:
    if not grids:
        raise EmptyDomainError("no generations to aggregate")
    if p != INF:
        if q == INF:
            F = np.maximum.reduce(list(grids.values()))
        else:
            F = sum(grids.values()) ** (1.0 / q)
        return lp_norm(F, p, dom.cell_volume)
    if alpha is None:
        alpha = q
    if q == INF and alpha == INF:
        return float(max(g.max() for g in grids.values()))
    ks = sorted(grids)
    cums: dict[int, np.ndarray] = {}
    running = np.zeros(dom.spatial_shape)
    for k in ks:
        running = np.maximum(running, grids[k]) if q == INF else running + grids[k]
        cums[k] = running
    best = 0.0
    for kp in range(ks[0], dom.root_generation + 1):
        cap = max(k for k in ks if k <= kp)
        body = cums[cap]
        if q == INF:
            body = body**alpha
        elif alpha != q:
            body = body ** (alpha / q)
        npc = cube_cells_per_axis(dom, kp)
        means = _block_reduce(body, npc, "sum") / float(npc**dom.d)
        best = max(best, float(means.max()))
    return best ** (1.0 / alpha)


def _dyadic_result(value: float, e: ExponentTuple, variant: str, lm: LocalMeanField, **params) -> NormResult:
    return NormResult(
        value,
        e,
        variant,
        lm.domain,
        2.0 ** (lm.k_min - 1),
        2.0**lm.k_max,
        {"k_min": lm.k_min, "k_max": lm.k_max, **params},
    )


def dyadic_tent_norm(lm: LocalMeanField, e: ExponentTuple) -> NormResult:
    """L^p norm of (sum_Q 1_Q |Q|^(-beta q/d) a_Q^q)^(1/q); Carleson sup at p=inf."""
    _require_matching_r(lm, e)
    grids = _weight_grids(lm, e.q, e.beta)
    value = _aggregate_grids(lm.domain, grids, e.p, e.q)
    return _dyadic_result(value, e, "dyadic", lm)


def dyadic_subset_norm(lm: LocalMeanField, e: ExponentTuple, family: SubsetFamily) -> NormResult:
    """Dyadic tent norm with each indicator 1_Q thinned to 1_{E_Q}.

    Cubes with zero local mean need no subset; a missing subset under a cube
    with mass raises CoverageError.
    """
    _require_matching_r(lm, e)
    if family.domain != lm.domain:
        raise ValueError("subset family and local means live on different domains")
    grids = _weight_grids(lm, e.q, e.beta, masked=family)
    value = _aggregate_grids(lm.domain, grids, e.p, e.q)
    return _dyadic_result(value, e, "dyadic_subset", lm, epsilon=family.epsilon)


def local_square_function(lm: LocalMeanField, q: float, beta: float, p_cube: DyadicCube) -> np.ndarray:
    """Square function G over the cells of p_cube.

    G(x) = ( sum over Q contained in p_cube with x in Q of
    |Q|^(-beta q/d) a_Q^q )^(1/q), generations clipped to the local means'
    range; q = inf takes the sup instead.
    """
    dom = lm.domain
    if p_cube.k < lm.k_min:
        raise ValueError(f"p_cube generation {p_cube.k} lies below the local means' range")
    grids = _weight_grids(lm, q, beta)
    cap = min(p_cube.k, lm.k_max)
    ks = [k for k in grids if k <= cap]
    sl = cube_cell_slices(dom, p_cube)
    parts = [grids[k][sl] for k in sorted(ks)]
    if q == INF:
        return np.maximum.reduce(parts)
    return sum(parts) ** (1.0 / q)


def c_median(values, c: float) -> float:
    """Smallest t with |{values > t}| < c * count; ties handled exactly."""
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyDomainError("median of no values")
    v = np.sort(v)
    idx = min(int(math.floor(v.size * (1.0 - c) + 1e-9)), v.size - 1)
    return float(v[idx])


def median_field(lm: LocalMeanField, q: float, beta: float, c: float) -> BoundaryField:
    """Pointwise sup over cubes P of the c-median of G restricted to P."""
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    dom = lm.domain
    grids = _weight_grids(lm, q, beta)
    ks = sorted(grids)
    cums: dict[int, np.ndarray] = {}
    running = np.zeros(dom.spatial_shape)
    for k in ks:
        running = np.maximum(running, grids[k]) if q == INF else running + grids[k]
        cums[k] = running
    out = np.zeros(dom.spatial_shape)
    for kp in range(ks[0], dom.root_generation + 1):
        cap = max(k for k in ks if k <= kp)
        body = cums[cap] if q == INF else cums[cap] ** (1.0 / q)
        npc = cube_cells_per_axis(dom, kp)
        nb = dom.n_space // npc
        blocks = body.reshape(sum(((nb, npc) for _ in range(dom.d)), ()))
        # bring the block axes forward, cells last, then sort cells
        order = tuple(range(0, 2 * dom.d, 2)) + tuple(range(1, 2 * dom.d, 2))
        flat = blocks.transpose(order).reshape(nb**dom.d, npc**dom.d)
        flat = np.sort(flat, axis=1)
        n_cells = npc**dom.d
        idx = min(int(math.floor(n_cells * (1.0 - c) + 1e-9)), n_cells - 1)
        med = flat[:, idx].reshape((nb,) * dom.d)
        np.maximum(out, _expand(med, npc), out=out)
    return BoundaryField(dom, out)


def sequence_norm(seq: CubeSequence, p: float, q: float, beta: float, dom: Domain) -> NormResult:
    """Norm of (sum_Q 1_Q |Q|^(-q/2 - beta q/d) |s_Q|^q)^(1/q) in L^p.

    The p = inf form is the Carleson sup over cubes P of the in-P average,
    matching the dyadic tent aggregation.
    """
    if len(seq) == 0:
        raise EmptyDomainError("empty cube sequence")
    gens: dict[int, np.ndarray] = {}
    for cube, s_val in seq.entries.items():
        if cube.d != dom.d:
            raise ValueError(f"cube {cube} has dimension {cube.d}, domain d={dom.d}")
        nb = round(dom.side / cube.side_length)
        cube_cell_slices(dom, cube)  # validates alignment and torus bounds
        if cube.k not in gens:
            gens[cube.k] = np.zeros((nb,) * dom.d)
        vol = cube.volume
        if q == INF:
            w = vol ** (-0.5 - beta / dom.d) * s_val
        else:
            w = vol ** ((-0.5 - beta / dom.d) * q) * s_val**q
        gens[cube.k][cube.offset] = w
    grids = {k: _expand(arr, cube_cells_per_axis(dom, k)) for k, arr in gens.items()}
    value = _aggregate_grids(dom, grids, p, q)
    e = ExponentTuple(p, q, 2.0, beta)
    ks = sorted(gens)
    return NormResult(value, e, "sequence", dom, 2.0 ** (ks[0] - 1), 2.0 ** ks[-1], {"generations": ks})


def jn_dyadic_norm(lm: LocalMeanField, q: float, beta: float, alpha: float) -> NormResult:
    """Dyadic John-Nirenberg form: sup over P of the in-P alpha-mean of G^alpha.

    alpha = q reproduces the p = inf dyadic tent norm exactly.
    """
    if not 0 < alpha < INF:
        raise ValueError(f"alpha must lie in (0, inf), got {alpha}")
    grids = _weight_grids(lm, q, beta)
    value = _aggregate_grids(lm.domain, grids, INF, q, alpha=alpha)
    e = ExponentTuple(INF, q, lm.r, beta)
    return _dyadic_result(value, e, "jn_dyadic", lm, alpha=alpha)
