"""K and E functionals and real interpolation on the discrete couples.

L^p couples (L^p0, L^inf) get the classical truncated-rearrangement
functional, exact at p0 = 1 and equivalent otherwise.  Tent couples get
upper K-profiles from explicit splitting families: median-driven cube
splits for (p0, inf) couples and scale cutoffs for weight couples.  Profile
minima are upper bounds on the true infimum; every consumer treats them as
one side of an equivalence, never as exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INF,
    BoundaryField,
    ExponentTuple,
    HalfSpaceField,
)
from .dyadic import local_means, median_field, owning_generation, _block_reduce, _expand
from .core import cube_cells_per_axis
from .quadrature import lp_norm
from .tent_norms import tent_norm

__all__ = [
    "k_functional_lp",
    "e_functional_lp",
    "k_infty_lp",
    "SplitProfile",
    "median_split_profile",
    "scale_split_profile",
    "real_interpolation_norm",
    "geometric_t_grid",
]


def k_functional_lp(g: BoundaryField, p0: float, t: float) -> float:
    """K(t, g; L^p0, L^inf) in rearrangement form.

    Computes ( int_0^(t^p0) g*(u)^p0 du )^(1/p0) with g* the decreasing
    rearrangement against the cell measure.  Exact for p0 = 1; for other
    p0 equivalent to K with constants depending only on p0.
    """
    if not 0 < p0 < INF:
        raise ValueError(f"p0 must lie in (0, inf), got {p0}")
    if not t >= 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0.0:
        return 0.0
    vol = g.domain.cell_volume
    v = np.sort(np.abs(g.values).ravel())[::-1] ** p0
    u_cut = t**p0
    n_full = min(int(math.floor(u_cut / vol + 1e-12)), v.size)
    total = float(v[:n_full].sum()) * vol
    if n_full < v.size:
        total += float(v[n_full]) * max(u_cut - n_full * vol, 0.0)
    return total ** (1.0 / p0)


def e_functional_lp(g: BoundaryField, p0: float, lam: float) -> float:
    """E(lam, g; L^p0, L^inf) = || (|g| - lam)_+ ||_{L^p0}."""
    if not 0 < p0 < INF:
        raise ValueError(f"p0 must lie in (0, inf), got {p0}")
    if not lam >= 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    excess = np.maximum(np.abs(g.values) - lam, 0.0)
    return lp_norm(excess, p0, g.domain.cell_volume)


def k_infty_lp(g: BoundaryField, p0: float, t: float) -> float:
    """Max-form functional K_inf(t) = inf_lam max(E(lam), t lam).

    E is continuous decreasing and t lam increasing, so the infimum sits at
    their crossing; located by bisection.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    vmax = float(np.abs(g.values).max())
    if vmax == 0.0:
        return 0.0
    lo, hi = 0.0, vmax
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if e_functional_lp(g, p0, mid) > t * mid:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return max(e_functional_lp(g, p0, lam), t * lam)


@dataclass(frozen=True)
class SplitProfile:
    """Norm pairs (witness, ||f0||_0, ||f1||_1) from a splitting family.

    k(t) minimizes the sum over the family and upper-bounds the true
    K-functional of the couple; k_infty(t) minimizes the max form.
    """

    couple: str
    entries: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty splitting family")

    def k(self, t: float) -> float:
        return min(a + t * b for _, a, b in self.entries)

    def k_infty(self, t: float) -> float:
        return min(max(a, t * b) for _, a, b in self.entries)

    def witness(self, t: float) -> float:
        """Splitting parameter attaining k(t)."""
        return min(self.entries, key=lambda ent: ent[1] + t * ent[2])[0]


def _threshold_ladder(mf: np.ndarray, limit: int) -> list[float]:
    vals = np.unique(mf)
    if vals.size > limit:
        idx = np.unique(np.linspace(0, vals.size - 1, limit).round().astype(int))
        vals = vals[idx]
    ladder = [-1.0]  # below every value: the whole field goes to f0
    ladder.extend(float(v) for v in vals)
    return ladder


def median_split_profile(
    f: HalfSpaceField,
    e0: ExponentTuple,
    c: float = 0.25,
    max_thresholds: int = 24,
) -> SplitProfile:
    """Splitting family for the couple (tent p0, tent inf) at shared (q, r, beta).

    For each threshold lam the cubes where the median field exceeds lam on
    more than half the cells send their Whitney boxes to the finite-p part
    f0; the rest goes to f1.  Norm pairs are precomputed so K sweeps are
    cheap.
    """
    if e0.p == INF:
        raise ValueError("the couple's first exponent must be finite")
    dom = f.domain
    e1 = ExponentTuple(INF, e0.q, e0.r, e0.beta)
    lm = local_means(f, e0.r)
    mf = median_field(lm, e0.q, e0.beta, c).values
    owners = [owning_generation(dom, j) for j in range(dom.n_scales)]
    entries = []
    for lam in _threshold_ladder(mf, max_thresholds):
        above = (mf > lam).astype(float)
        cell_mask: dict[int, np.ndarray] = {}
        for k in range(lm.k_min, lm.k_max + 1):
            npc = cube_cells_per_axis(dom, k)
            counts = _block_reduce(above, npc, "sum")
            cell_mask[k] = _expand(counts > npc**dom.d / 2.0, npc)
        rows0 = []
        for j in range(dom.n_scales):
            mask = cell_mask.get(owners[j])
            rows0.append(f.values[j] * mask if mask is not None else np.zeros_like(f.values[j]))
        f0 = f.with_values(np.stack(rows0, axis=0))
        f1 = f.with_values(f.values - f0.values)
        a = tent_norm(f0, e0).value
        b = tent_norm(f1, e1).value
        entries.append((lam, a, b))
    return SplitProfile("tent_p_couple", tuple(entries))


def scale_split_profile(f: HalfSpaceField, e0: ExponentTuple, e1: ExponentTuple) -> SplitProfile:
    """Splitting family for weight couples: sharp cutoffs in the scale index.

    Both orientations are swept (low scales to either endpoint), which is
    near-optimal when the endpoint norms weight scales monotonically, the
    situation of the endpoint couples with beta0 != beta1.
    """
    if (e0.p, e0.q, e0.r) != (e1.p, e1.q, e1.r):
        raise ValueError("scale splits expect endpoints sharing (p, q, r)")
    dom = f.domain
    entries = []
    zeros = np.zeros_like(f.values)
    for cut in range(dom.n_scales + 1):
        low = np.concatenate([f.values[:cut], zeros[cut:]], axis=0)
        high = f.values - low
        f_low, f_high = f.with_values(low), f.with_values(high)
        entries.append((float(cut), tent_norm(f_low, e0).value, tent_norm(f_high, e1).value))
        entries.append((float(-cut), tent_norm(f_high, e0).value, tent_norm(f_low, e1).value))
    return SplitProfile("tent_weight_couple", tuple(entries))


def real_interpolation_norm(ts, ks, theta: float, q: float) -> float:
    """(theta, q) functional ( int (t^-theta K(t))^q dt/t )^(1/q) on a grid.

    Trapezoid weights in log t; the grid need not be uniform.  q = inf takes
    the sup of t^-theta K(t).
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    t = np.asarray(ts, dtype=float)
    k = np.asarray(ks, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or np.any(t <= 0):
        raise ValueError("ts must be an increasing positive grid")
    if k.shape != t.shape:
        raise ValueError(f"{k.size} K values for {t.size} grid points")
    body = t**-theta * k
    if q == INF:
        return float(body.max())
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    logt = np.log(t)
    w = np.empty_like(logt)
    w[1:-1] = (logt[2:] - logt[:-2]) / 2.0
    w[0] = (logt[1] - logt[0]) / 2.0
    w[-1] = (logt[-1] - logt[-2]) / 2.0
    return float(np.sum(w * body**q) ** (1.0 / q))


def geometric_t_grid(center: float, decades: float, per_decade: int = 16) -> np.ndarray:
    """Geometric grid spanning the given number of decades around center."""
    if not center > 0:
        raise ValueError(f"center must be positive, got {center}")
    half = decades / 2.0
    n = max(int(round(decades * per_decade)) + 1, 2)
    return np.geomspace(center * 10.0**-half, center * 10.0**half, n)
