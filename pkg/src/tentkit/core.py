"""Discretized upper half-space geometry: domains, fields, dyadic cubes.

The spatial domain is the periodic box [0, side)^d sampled at n_space cells
per axis with cell centers (i + 1/2) h, h = side / n_space.  Scales form the
geometric lattice s_j = s_min * 2^(j / m_scale), j = 0 .. n_scales - 1, which
closes at s_max.  Quadrature conventions live in :mod:`tentkit.quadrature`.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

__all__ = [
    "INF",
    "EmptyDomainError",
    "GeometryError",
    "CoverageError",
    "HypothesisError",
    "holder_conjugate",
    "ExponentTuple",
    "Domain",
    "HalfSpaceField",
    "BoundaryField",
    "DyadicCube",
    "WhitneyBox",
    "whitney_tiling",
    "cube_cell_slices",
    "cube_cells_per_axis",
    "lattice_window",
    "CubeSequence",
    "SubsetFamily",
    "save_hsf1",
    "load_hsf1",
    "field_from_csv",
    "field_to_csv",
    "boundary_from_csv",
]

INF = float("inf")


class EmptyDomainError(ValueError):
    """A requested average or window has no cells under it."""


class GeometryError(ValueError):
    """A geometric precondition on the torus is violated."""


class CoverageError(KeyError):
    """A subset family misses a cube that carries mass."""


class HypothesisError(ValueError):
    """A result was invoked outside its hypotheses."""


def holder_conjugate(x: float) -> float:
    """Conjugate exponent x' with 1/x + 1/x' = 1; x <= 1 maps to inf."""
    if x == INF:
        return 1.0
    if x <= 1.0:
        return INF
    return x / (x - 1.0)


@dataclass(frozen=True)
class ExponentTuple:
    """Exponent triple (p, q, r) in (0, inf]^3 with weight exponent beta.

    p is the outer spatial integrability, q the scale integrability, r the
    exponent of the Whitney box average, and beta the power weight s^(-beta)
    applied to the field inside every average.
    """

    p: float
    q: float
    r: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p", "q", "r"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
            object.__setattr__(self, name, v)
        b = float(self.beta)
        if not math.isfinite(b):
            raise ValueError(f"beta must be finite, got {b!r}")
        object.__setattr__(self, "beta", b)

    def conjugate(self) -> "ExponentTuple":
        """Entrywise Holder conjugate with negated weight."""
        return ExponentTuple(
            holder_conjugate(self.p),
            holder_conjugate(self.q),
            holder_conjugate(self.r),
            -self.beta,
        )

    def power_scaled(self, m: float) -> "ExponentTuple":
        """Tuple (p/m, q/m, r/m, m*beta) used by the convexity identity."""
        if not m > 0:
            raise ValueError(f"power must be positive, got {m!r}")
        return ExponentTuple(self.p / m, self.q / m, self.r / m, m * self.beta)


def _log2_int(x: float, what: str) -> int:
    l = math.log2(x)
    r = round(l)
    if abs(l - r) > 1e-9:
        raise ValueError(f"{what} must be a power of two, got {x!r}")
    return r


@dataclass(frozen=True)
class Domain:
    """Geometry of the sampled half-space (0, s_max] x torus.

    Parameters
    ----------
    d : int
        Spatial dimension, >= 1.
    side : float
        Period of the torus.  Must be a power of two so dyadic cubes of
        generation k = log2(side) tile it exactly.
    n_space : int
        Cells per spatial axis, a power of two.
    s_min, s_max : float
        Scale range.  The lattice must close: m_scale * log2(s_max/s_min)
        has to be an integer, and s_max may not exceed side.
    m_scale : int
        Scale lattice resolution, points per octave.
    """

    d: int
    side: float
    n_space: int
    s_min: float
    s_max: float
    m_scale: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.side <= 0:
            raise ValueError(f"side must be positive, got {self.side}")
        _log2_int(self.side, "side")
        if self.n_space < 2 or self.n_space & (self.n_space - 1):
            raise ValueError(f"n_space must be a power of two >= 2, got {self.n_space}")
        if not 0 < self.s_min < self.s_max:
            raise ValueError(f"need 0 < s_min < s_max, got {self.s_min}, {self.s_max}")
        if self.s_max > self.side * (1 + 1e-12):
            raise ValueError(f"s_max {self.s_max} exceeds side {self.side}")
        if self.m_scale < 1:
            raise ValueError(f"m_scale must be >= 1, got {self.m_scale}")
        octaves = self.m_scale * math.log2(self.s_max / self.s_min)
        if abs(octaves - round(octaves)) > 1e-9:
            raise ValueError(
                "scale lattice does not close: m_scale * log2(s_max/s_min) "
                f"= {octaves} is not an integer"
            )

    @property
    def h(self) -> float:
        return self.side / self.n_space

    @property
    def dlog(self) -> float:
        """Log-scale cell width ln(2) / m_scale."""
        return math.log(2.0) / self.m_scale

    @property
    def n_scales(self) -> int:
        return round(self.m_scale * math.log2(self.s_max / self.s_min)) + 1

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return (self.n_space,) * self.d

    def scales(self) -> np.ndarray:
        """Scale grid values s_j, ascending."""
        return _scales(self)

    def extended_t_grid(self) -> np.ndarray:
        """Scale lattice extended m_scale - 1 points above s_max.

        Tent and related norms sum their t-variable over this grid so that
        every Whitney window (t/2, t] sees its full complement of m_scale
        lattice cells.  With window means normalized by the full lattice
        window (see quadrature), this makes the discrete Fubini identity
        exact for any field.
        """
        return _ext_grid(self)

    def scale_value(self, j: int) -> float:
        return self.s_min * 2.0 ** (j / self.m_scale)

    def axis_coordinates(self) -> np.ndarray:
        """Cell center coordinates (i + 1/2) h along one axis."""
        return (np.arange(self.n_space) + 0.5) * self.h

    def generation_range(self) -> tuple[int, int]:
        """Dyadic generations k whose Whitney window (2^(k-1), 2^k] meets
        the scale grid, capped at the torus generation log2(side)."""
        k_lo = math.ceil(math.log2(self.s_min) - 1e-9)
        k_hi = math.ceil(math.log2(self.s_max) - 1e-9)
        return k_lo, min(k_hi, _log2_int(self.side, "side"))

    @property
    def root_generation(self) -> int:
        return _log2_int(self.side, "side")


@lru_cache(maxsize=None)
def _scales(dom: Domain) -> np.ndarray:
    j = np.arange(dom.n_scales)
    s = dom.s_min * 2.0 ** (j / dom.m_scale)
    s.setflags(write=False)
    return s


@lru_cache(maxsize=None)
def _ext_grid(dom: Domain) -> np.ndarray:
    k = np.arange(dom.n_scales + dom.m_scale - 1)
    t = dom.s_min * 2.0 ** (k / dom.m_scale)
    t.setflags(write=False)
    return t


def lattice_window(dom: Domain, lo: float, hi: float) -> tuple[int, int]:
    """Lattice exponent range {u : lo < s_min 2^(u/m_scale) <= hi}, u over Z.

    Returns (u_lo, u_hi) inclusive; empty windows come back with
    u_lo > u_hi.  Exponents outside [0, n_scales) address lattice cells the
    grid does not realize (fields vanish there).
    """
    if not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got {lo}, {hi}")
    m = dom.m_scale
    u_lo = math.floor(m * math.log2(lo / dom.s_min) + 1e-9) + 1
    u_hi = math.floor(m * math.log2(hi / dom.s_min) + 1e-9)
    return u_lo, u_hi


def _as_locked_array(values, want_shape, what: str) -> np.ndarray:
    vals = np.asarray(values)
    if vals.shape != want_shape:
        raise ValueError(f"{what} shape {vals.shape} does not match domain, want {want_shape}")
    if vals.dtype.kind not in "fc":
        vals = vals.astype(np.float64)
    elif vals.dtype.kind == "f" and vals.dtype != np.float64:
        vals = vals.astype(np.float64)
    elif vals.dtype.kind == "c" and vals.dtype != np.complex128:
        vals = vals.astype(np.complex128)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{what} must be finite")
    vals = vals.copy()
    vals.setflags(write=False)
    return vals


@dataclass(frozen=True)
class HalfSpaceField:
    """Field sampled on the scale grid times the spatial grid.

    values has shape (n_scales, n_space, ..., n_space) and is locked after
    construction; real or complex entries, all finite.
    """

    domain: Domain
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        want = (self.domain.n_scales,) + self.domain.spatial_shape
        object.__setattr__(self, "values", _as_locked_array(self.values, want, "values"))

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def with_values(self, values, label: str | None = None) -> "HalfSpaceField":
        return HalfSpaceField(self.domain, values, self.label if label is None else label)

    def scaled(self, factor: float) -> "HalfSpaceField":
        return self.with_values(self.values * factor)

    def abs_power(self, m: float) -> "HalfSpaceField":
        """Field |f|^m, the substitution behind the convexity identity."""
        return self.with_values(np.abs(self.values) ** m)


@dataclass(frozen=True)
class BoundaryField:
    """Function sampled on the spatial grid alone."""

    domain: Domain
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        want = self.domain.spatial_shape
        object.__setattr__(self, "values", _as_locked_array(self.values, want, "values"))

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def mean(self) -> complex:
        return complex(self.values.mean())


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Half-open cube prod_i [2^k o_i, 2^k (o_i + 1)) of generation k."""

    k: int
    offset: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "offset", tuple(int(o) for o in self.offset))

    @property
    def d(self) -> int:
        return len(self.offset)

    @property
    def side_length(self) -> float:
        return 2.0**self.k

    @property
    def volume(self) -> float:
        return self.side_length**self.d

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.k + 1, tuple(o >> 1 for o in self.offset))

    def children(self) -> list["DyadicCube"]:
        kids = []
        for bits in range(1 << self.d):
            shift = tuple((bits >> i) & 1 for i in range(self.d))
            kids.append(DyadicCube(self.k - 1, tuple(2 * o + s for o, s in zip(self.offset, shift))))
        return kids

    def corner(self) -> tuple[float, ...]:
        return tuple(self.side_length * o for o in self.offset)


@dataclass(frozen=True)
class WhitneyBox:
    """Box (l/2, l] x Q over a dyadic cube Q, l = Q.side_length."""

    cube: DyadicCube

    @property
    def s_lo(self) -> float:
        return self.cube.side_length / 2.0

    @property
    def s_hi(self) -> float:
        return self.cube.side_length


def whitney_tiling(p_cube: DyadicCube, k_min: int) -> list[WhitneyBox]:
    """Whitney boxes of every descendant of p_cube down to generation k_min.

    Their closures tile the truncated Carleson box (2^(k_min - 1), l(P)] x P
    disjointly; generations come back descending, offsets lexicographic.
    """
    if k_min > p_cube.k:
        raise ValueError(f"k_min {k_min} exceeds cube generation {p_cube.k}")
    boxes: list[WhitneyBox] = []
    level = [p_cube]
    for k in range(p_cube.k, k_min - 1, -1):
        boxes.extend(WhitneyBox(q) for q in level)
        if k > k_min:
            level = sorted((c for q in level for c in q.children()))
    return boxes


def cube_cells_per_axis(dom: Domain, k: int) -> int:
    npc = 2.0**k / dom.h
    r = round(npc)
    if r < 1 or abs(npc - r) > 1e-9:
        raise GeometryError(f"generation {k} cube side {2.0**k} not aligned to grid step {dom.h}")
    return r


def cube_cell_slices(dom: Domain, cube: DyadicCube) -> tuple[slice, ...]:
    """Index slices selecting the cube's cells in a spatial grid array."""
    if cube.d != dom.d:
        raise ValueError(f"cube dimension {cube.d} does not match domain d={dom.d}")
    npc = cube_cells_per_axis(dom, cube.k)
    n_axis = round(dom.side / cube.side_length)
    for o in cube.offset:
        if not 0 <= o < n_axis:
            raise GeometryError(f"cube offset {cube.offset} outside torus at generation {cube.k}")
    return tuple(slice(o * npc, (o + 1) * npc) for o in cube.offset)


@dataclass(frozen=True)
class CubeSequence:
    """Nonnegative coefficients indexed by dyadic cubes."""

    entries: Mapping[DyadicCube, float]

    def __post_init__(self) -> None:
        clean: dict[DyadicCube, float] = {}
        for cube, v in self.entries.items():
            v = float(v)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"coefficient for {cube} must be finite and >= 0, got {v!r}")
            clean[cube] = v
        object.__setattr__(self, "entries", clean)

    def __len__(self) -> int:
        return len(self.entries)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for cube in sorted(self.entries):
                writer.writerow([cube.k, *cube.offset, repr(self.entries[cube])])

    @classmethod
    def from_csv(cls, path, d: int) -> "CubeSequence":
        entries: dict[DyadicCube, float] = {}
        with open(path, newline="") as fh:
            for row_num, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != d + 2:
                    raise ValueError(f"{path}:{row_num}: want k, {d} offsets, value; got {len(row)} fields")
                k = int(row[0])
                offset = tuple(int(x) for x in row[1 : 1 + d])
                entries[DyadicCube(k, offset)] = float(row[-1])
        return cls(entries)


@dataclass(frozen=True)
class SubsetFamily:
    """Subsets E_Q of cubes Q with |E_Q| > epsilon |Q|, as cell masks."""

    domain: Domain
    epsilon: float
    masks: Mapping[DyadicCube, np.ndarray]

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        clean: dict[DyadicCube, np.ndarray] = {}
        for cube, mask in self.masks.items():
            npc = cube_cells_per_axis(self.domain, cube.k)
            mask = np.asarray(mask, dtype=bool)
            want = (npc,) * self.domain.d
            if mask.shape != want:
                raise ValueError(f"mask for {cube} has shape {mask.shape}, want {want}")
            if mask.sum() <= self.epsilon * mask.size:
                raise ValueError(f"subset for {cube} covers {mask.sum()}/{mask.size} cells, needs more than epsilon={self.epsilon}")
            mask = mask.copy()
            mask.setflags(write=False)
            clean[cube] = mask
        object.__setattr__(self, "masks", clean)


_HSF1_MAGIC = b"HSF1"


def save_hsf1(field: HalfSpaceField, path) -> None:
    """Write a field in the HSF1 binary layout.

    Layout: magic "HSF1"; little-endian int32 d, n_space, m_scale, n_scales;
    little-endian float64 side, s_min, s_max; one flag byte (0 real,
    1 complex); then float64 samples in C order, scale index major, complex
    values interleaved re, im.
    """
    dom = field.domain
    flag = 1 if field.is_complex else 0
    arr = np.ascontiguousarray(field.values, dtype=np.complex128 if flag else np.float64)
    with open(path, "wb") as fh:
        fh.write(_HSF1_MAGIC)
        fh.write(struct.pack("<iiii", dom.d, dom.n_space, dom.m_scale, dom.n_scales))
        fh.write(struct.pack("<ddd", dom.side, dom.s_min, dom.s_max))
        fh.write(struct.pack("<B", flag))
        fh.write(arr.tobytes(order="C"))


def load_hsf1(path, label: str = "") -> HalfSpaceField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _HSF1_MAGIC:
            raise ValueError(f"bad magic {magic!r}, want {_HSF1_MAGIC!r}")
        d, n_space, m_scale, n_scales = struct.unpack("<iiii", fh.read(16))
        side, s_min, s_max = struct.unpack("<ddd", fh.read(24))
        (flag,) = struct.unpack("<B", fh.read(1))
        raw = fh.read()
    dom = Domain(d=d, side=side, n_space=n_space, s_min=s_min, s_max=s_max, m_scale=m_scale)
    if dom.n_scales != n_scales:
        raise ValueError(f"header n_scales {n_scales} inconsistent with scale grid ({dom.n_scales})")
    count = n_scales * n_space**d
    dtype = np.dtype("<c16") if flag else np.dtype("<f8")
    if len(raw) != count * dtype.itemsize:
        raise ValueError(f"payload holds {len(raw)} bytes, want {count * dtype.itemsize}")
    arr = np.frombuffer(raw, dtype=dtype).reshape((n_scales,) + (n_space,) * d)
    return HalfSpaceField(dom, arr, label=label)


def field_from_csv(domain: Domain, path, label: str = "") -> HalfSpaceField:
    """Read a d=1 field from (scale index, cell index, value) rows.

    Cells absent from the file are zero.
    """
    if domain.d != 1:
        raise ValueError(f"CSV fields are d=1 only, domain has d={domain.d}")
    values = np.zeros((domain.n_scales, domain.n_space))
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{row_num}: want j, x, value; got {len(row)} fields")
            j, x = int(row[0]), int(row[1])
            if not 0 <= j < domain.n_scales:
                raise ValueError(f"{path}:{row_num}: scale index {j} outside [0, {domain.n_scales})")
            if not 0 <= x < domain.n_space:
                raise ValueError(f"{path}:{row_num}: cell index {x} outside [0, {domain.n_space})")
            values[j, x] = float(row[2])
    return HalfSpaceField(domain, values, label=label)


def field_to_csv(field: HalfSpaceField, path) -> None:
    if field.domain.d != 1:
        raise ValueError(f"CSV fields are d=1 only, field has d={field.domain.d}")
    if field.is_complex:
        raise ValueError("CSV fields are real only")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for j in range(field.domain.n_scales):
            for x in range(field.domain.n_space):
                v = field.values[j, x]
                if v != 0.0:
                    writer.writerow([j, x, repr(float(v))])


def boundary_from_csv(domain: Domain, path, label: str = "") -> BoundaryField:
    """Read d=1 boundary samples from (cell index, value) rows; absent cells are zero."""
    if domain.d != 1:
        raise ValueError(f"CSV boundary data is d=1 only, domain has d={domain.d}")
    values = np.zeros(domain.n_space)
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{row_num}: want x, value; got {len(row)} fields")
            x = int(row[0])
            if not 0 <= x < domain.n_space:
                raise ValueError(f"{path}:{row_num}: cell index {x} outside [0, {domain.n_space})")
            values[x] = float(row[1])
    return BoundaryField(domain, values, label=label)
