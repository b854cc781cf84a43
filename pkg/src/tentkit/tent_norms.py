"""Tent, Z, change-of-angle, beyond-infinity and John-Nirenberg norms.

Every norm aggregates the Whitney box average

    A(x, t) = ( window-ball mean of |s^-beta f|^r at (x, t) )^(1/r)

over the extended t-grid; see quadrature.whitney_average_field for the
normalization conventions that make the (2, 2, 2, 0) norm an exact discrete
Fubini identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any, Mapping

import numpy as np

from .core import (
    INF,
    Domain,
    ExponentTuple,
    GeometryError,
    HalfSpaceField,
    EmptyDomainError,
)
from .quadrature import (
    WHITNEY,
    AverageSpec,
    ball_mean,
    ball_max,
    ball_sum,
    ball_count,
    lp_norm,
    whitney_average_field,
)

__all__ = [
    "NormResult",
    "tent_norm",
    "z_norm",
    "change_of_angle_norm",
    "beyond_infinity_norm",
    "jn_norm",
    "duality_pairing",
]


@dataclass(frozen=True)
class NormResult:
    """A computed norm value with the geometry it was computed under.

    t_lo and t_hi record the truncation of the t-variable; params carries
    variant-specific knobs (window proportions, dilation, alpha).
    """

    value: float
    exponents: ExponentTuple
    variant: str
    domain: Domain
    t_lo: float
    t_hi: float
    params: Mapping[str, Any] = dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))

    def __float__(self) -> float:
        return self.value


def _spec_params(spec: AverageSpec) -> dict:
    return {"window": (spec.a, spec.b), "ball": spec.c}


def _average_stack(
    f: HalfSpaceField,
    rho: float,
    beta: float,
    spec: AverageSpec,
    t_grid: np.ndarray,
    dilation: float = 1.0,
) -> np.ndarray:
    rows = []
    zeros = None
    for t in t_grid:
        try:
            rows.append(whitney_average_field(f, float(t), rho, beta, spec, dilation))
        except EmptyDomainError:
            # window narrower than the lattice step at this t; no cells at all
            if zeros is None:
                zeros = np.zeros(f.domain.spatial_shape)
            rows.append(zeros)
    return np.stack(rows, axis=0)


def _scale_aggregate(dom: Domain, stack: np.ndarray, q: float) -> np.ndarray:
    if q == INF:
        return stack.max(axis=0)
    return (stack**q).sum(axis=0) ** (1.0 / q) * dom.dlog ** (1.0 / q)


def _carleson_sup(dom: Domain, stack: np.ndarray, t_grid: np.ndarray, q: float, alpha: float) -> float:
    """sup over (tau, y) of ( ball-mean_{B(y,tau)} of C_tau^(alpha/q) )^(1/alpha)
    where C_tau(x) aggregates the stack over t <= tau with exponent q."""
    if q == INF:
        body = np.maximum.accumulate(stack, axis=0) ** alpha
    else:
        body = np.cumsum(stack**q * dom.dlog, axis=0) ** (alpha / q)
    best = 0.0
    for k, tau in enumerate(t_grid):
        best = max(best, float(ball_mean(dom, body[k], float(tau)).max()))
    return best ** (1.0 / alpha)


def tent_norm(f: HalfSpaceField, e: ExponentTuple, spec: AverageSpec = WHITNEY) -> NormResult:
    """Tent norm with exponents (p, q, r) and weight beta.

    p < inf takes the L^p norm in x of the t-aggregated Whitney averages;
    p = inf is the Carleson form, a sup over balls B(y, tau) of the t-range
    (0, tau].  Exponents equal to inf are realized as maxima.
    """
    dom = f.domain
    tg = dom.extended_t_grid()
    stack = _average_stack(f, e.r, e.beta, spec, tg)
    if e.p == INF:
        if e.q == INF:
            value = float(stack.max())
        else:
            value = _carleson_sup(dom, stack, tg, e.q, e.q)
    else:
        value = lp_norm(_scale_aggregate(dom, stack, e.q), e.p, dom.cell_volume)
    return NormResult(value, e, "tent", dom, float(tg[0]), float(tg[-1]), _spec_params(spec))


def z_norm(f: HalfSpaceField, e: ExponentTuple, spec: AverageSpec = WHITNEY) -> NormResult:
    """Z norm: L^p in x of the Whitney average first, then L^q in t.

    At p = q = inf this coincides with the tent norm by definition.
    """
    dom = f.domain
    tg = dom.extended_t_grid()
    stack = _average_stack(f, e.r, e.beta, spec, tg)
    flat = stack.reshape(len(tg), -1)
    if e.p == INF:
        u = flat.max(axis=1)
    else:
        u = (flat**e.p).sum(axis=1) ** (1.0 / e.p) * dom.cell_volume ** (1.0 / e.p)
    if e.q == INF:
        value = float(u.max())
    else:
        value = float(((u**e.q).sum() * dom.dlog) ** (1.0 / e.q))
    return NormResult(value, e, "z", dom, float(tg[0]), float(tg[-1]), _spec_params(spec))


def change_of_angle_norm(
    f: HalfSpaceField, e: ExponentTuple, aperture: float, spec: AverageSpec = WHITNEY
) -> NormResult:
    """Tent norm with the inner ball dilated to radius aperture * c * t.

    The inner mean stays normalized by the undilated ball, so aperture = 1
    reproduces tent_norm exactly.  For p = inf only the averaging region
    widens; the outer ball B(y, tau) keeps its radius, so the Carleson
    geometry is fixed while the cone opens.  The dilated ball must fit the
    torus: aperture * s_max <= side / 2.
    """
    dom = f.domain
    if not aperture >= 1:
        raise ValueError(f"aperture must be >= 1, got {aperture}")
    if aperture * spec.c * dom.s_max > dom.side / 2.0 * (1 + 1e-12):
        raise GeometryError(
            f"aperture {aperture} puts the ball radius past half period "
            f"({aperture * spec.c * dom.s_max} > {dom.side / 2.0})"
        )
    tg = dom.extended_t_grid()
    stack = _average_stack(f, e.r, e.beta, spec, tg, dilation=aperture)
    if e.p == INF:
        if e.q == INF:
            value = float(stack.max())
        else:
            value = _carleson_sup(dom, stack, tg, e.q, e.q)
    else:
        value = lp_norm(_scale_aggregate(dom, stack, e.q), e.p, dom.cell_volume)
    params = _spec_params(spec)
    params["aperture"] = aperture
    return NormResult(value, e, "change_of_angle", dom, float(tg[0]), float(tg[-1]), params)


def beyond_infinity_norm(f: HalfSpaceField, q: float, beta: float, alpha: float) -> NormResult:
    """sup over (x, t) of t^-alpha (int_0^t ball-mean |s^-beta f|^q ds/s)^(1/q).

    No Whitney window: the inner integral runs over all scales below t with
    the ball radius fixed at t.  alpha > 0 reaches past the Carleson scale.
    """
    dom = f.domain
    if not alpha >= 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    tg = dom.extended_t_grid()
    s = dom.scales()
    shape = (-1,) + (1,) * dom.d
    if q == INF:
        body = np.abs(f.values) * (s**-beta).reshape(shape) if beta else np.abs(f.values)
        cum = np.maximum.accumulate(body, axis=0)
        best = 0.0
        for k, t in enumerate(tg):
            j = min(k, dom.n_scales - 1)
            best = max(best, float(t) ** -alpha * float(ball_max(dom, cum[j], float(t)).max()))
        value = best
    else:
        body = np.abs(f.values) ** q * (dom.dlog * s ** (-beta * q)).reshape(shape)
        cum = np.cumsum(body, axis=0)
        best = 0.0
        for k, t in enumerate(tg):
            j = min(k, dom.n_scales - 1)
            inner = ball_sum(dom, cum[j], float(t)) / ball_count(dom, float(t))
            best = max(best, float(t) ** -alpha * float(max(inner.max(), 0.0)) ** (1.0 / q))
        value = best
    e = ExponentTuple(INF, q, q, beta)
    return NormResult(value, e, "beyond_infinity", dom, float(tg[0]), float(tg[-1]), {"alpha": alpha})


def jn_norm(f: HalfSpaceField, e: ExponentTuple, alpha: float, spec: AverageSpec = WHITNEY) -> NormResult:
    """John-Nirenberg variant of the p = inf tent norm with outer exponent alpha.

    alpha = q reproduces tent_norm at p = inf exactly; the equivalence for
    other alpha in (0, inf) is the continuous John-Nirenberg property.
    """
    if e.p != INF:
        raise ValueError(f"jn_norm is a p = inf form, got p = {e.p}")
    if not 0 < alpha < INF:
        raise ValueError(f"alpha must lie in (0, inf), got {alpha}")
    dom = f.domain
    tg = dom.extended_t_grid()
    stack = _average_stack(f, e.r, e.beta, spec, tg)
    value = _carleson_sup(dom, stack, tg, e.q, alpha)
    params = _spec_params(spec)
    params["alpha"] = alpha
    return NormResult(value, e, "jn", dom, float(tg[0]), float(tg[-1]), params)


def duality_pairing(f: HalfSpaceField, g: HalfSpaceField) -> float:
    """Absolute pairing sum |f g| h^d dlog, the measure dy ds/s on the grid."""
    if f.domain != g.domain:
        raise ValueError("pairing requires a common domain")
    dom = f.domain
    return float(np.sum(np.abs(f.values) * np.abs(g.values)) * dom.cell_volume * dom.dlog)
