"""Materials, waveguide cross-sections and their staggered discretization.

All quantities are SI (meters, hertz, radians).  A :class:`Grid2D` stores the
cell edges along each axis and a per-cell relative permittivity.  Field
samples live on the Yee-style staggered positions used by
:mod:`drwsim.fdfd`:

    Ex  (x half, y node)      Hx  (x node, y half)
    Ey  (x node, y half)      Hy  (x half, y node)
    Ez  (x node, y node)      Hz  (x half, y half)

where "node" means a cell edge coordinate and "half" a cell-center
coordinate.  The outer box edges carry the perfect electric conductor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    GridTooLarge,
    InvalidGeometry,
    InvalidMaterial,
    NotFound,
)

C0 = 299_792_458.0
EPS0 = 8.8541878128e-12
MU0 = 1.0 / (EPS0 * C0**2)
ETA0 = math.sqrt(MU0 / EPS0)
DB_PER_NEPER = 8.685889638  # 20 / ln(10)

MAX_TAN_DELTA = 0.1
DEFAULT_MAX_CELLS = 2_000_000
DEFAULT_BAND = (80e9, 160e9)


def k0_of(f: float) -> float:
    return 2.0 * math.pi * f / C0


@dataclass(frozen=True)
class Material:
    name: str
    eps_r: float
    tan_delta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.eps_r) or self.eps_r < 1.0:
            raise InvalidMaterial(f"{self.name}: eps_r must be >= 1, got {self.eps_r}")
        if not (0.0 <= self.tan_delta <= MAX_TAN_DELTA):
            raise InvalidMaterial(
                f"{self.name}: tan_delta must lie in [0, {MAX_TAN_DELTA}], got {self.tan_delta}"
            )

    def lossless(self) -> "Material":
        return replace(self, tan_delta=0.0)

    def with_tan_delta(self, tan_delta: float) -> "Material":
        return replace(self, tan_delta=tan_delta)


def constant_dispersion(m: Material, f: float) -> complex:
    return complex(m.eps_r, -m.eps_r * m.tan_delta)


# Hook for frequency-dependent permittivity; only the constant model ships.
DISPERSION_MODEL: Callable[[Material, float], complex] = constant_dispersion


def complex_permittivity(m: Material, f: float) -> complex:
    """Relative permittivity ``eps_r * (1 - j tan_delta)``; ``f`` is unused by the constant model."""
    return DISPERSION_MODEL(m, f)


_CATALOG = {
    "paper-core-lossless": Material("paper-core-lossless", 1000.0, 0.0),
    "paper-core-realistic": Material("paper-core-realistic", 1000.0, 0.0005),
    "paper-core-worst": Material("paper-core-worst", 1000.0, 0.002),
    "paper-clad": Material("paper-clad", 12.0, 0.0),
}


def material_catalog(extra: dict[str, Material] | None = None) -> dict[str, Material]:
    """Named material presets, optionally merged with user-supplied entries."""
    out = dict(_CATALOG)
    if extra:
        out.update(extra)
    return out


def lookup_material(name: str, extra: dict[str, Material] | None = None) -> Material:
    catalog = material_catalog(extra)
    try:
        return catalog[name]
    except KeyError:
        raise NotFound(f"unknown material {name!r}; known: {sorted(catalog)}") from None


@dataclass(frozen=True)
class CrossSection:
    """Rectangular core of width ``a`` (along x) and height ``b`` (along y) in a cladding."""

    a: float
    b: float
    core: Material
    clad: Material

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidGeometry(f"core dimensions must be positive, got a={self.a}, b={self.b}")
        if not self.core.eps_r > self.clad.eps_r:
            raise InvalidGeometry(
                f"guiding requires core eps ({self.core.eps_r}) > cladding eps ({self.clad.eps_r})"
            )

    def lossless(self) -> "CrossSection":
        return replace(self, core=self.core.lossless(), clad=self.clad.lossless())

    def with_tan_delta(self, core: float, clad: float | None = None) -> "CrossSection":
        clad_m = self.clad if clad is None else self.clad.with_tan_delta(clad)
        return replace(self, core=self.core.with_tan_delta(core), clad=clad_m)

    def scaled(self, sa: float, sb: float | None = None) -> "CrossSection":
        return replace(self, a=self.a * sa, b=self.b * (sa if sb is None else sb))


def reference_cross_section(core: str = "paper-core-lossless") -> CrossSection:
    """The 160 um x 80 um guide with eps 1000 core in eps 12 cladding."""
    return CrossSection(160e-6, 80e-6, lookup_material(core), lookup_material("paper-clad"))


def core_wavelength(eps_core: float, f: float) -> float:
    return C0 / (f * math.sqrt(eps_core))


def clad_decay_rate(eps_core: float, eps_clad: float, f: float) -> float:
    """Upper bound on the transverse decay rate in the cladding, k0 sqrt(eps_core - eps_clad)."""
    return k0_of(f) * math.sqrt(eps_core - eps_clad)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned block of material, used to paint grids."""

    x0: float
    x1: float
    y0: float
    y1: float
    eps: complex
    tan_delta: float = 0.0
    label: str = "core"


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Staggered cross-section grid.

    ``x_edges``/``y_edges`` hold the ``nx + 1``/``ny + 1`` cell boundaries;
    ``eps`` is the per-cell relative permittivity (real part) with shape
    ``(nx, ny)``; ``tan_delta`` is the matching per-cell loss tangent and
    ``region`` an integer label map (0 = cladding, k = k-th painted block).
    """

    x_edges: np.ndarray
    y_edges: np.ndarray
    eps: np.ndarray
    tan_delta: np.ndarray
    region: np.ndarray
    eps_background: float
    blocks: tuple = field(default=())

    @property
    def nx(self) -> int:
        return self.x_edges.size - 1

    @property
    def ny(self) -> int:
        return self.y_edges.size - 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.x_edges)

    @property
    def dy(self) -> np.ndarray:
        return np.diff(self.y_edges)

    @property
    def x_centers(self) -> np.ndarray:
        return 0.5 * (self.x_edges[1:] + self.x_edges[:-1])

    @property
    def y_centers(self) -> np.ndarray:
        return 0.5 * (self.y_edges[1:] + self.y_edges[:-1])

    @property
    def cell_area(self) -> np.ndarray:
        return np.outer(self.dx, self.dy)

    @property
    def is_uniform(self) -> bool:
        return bool(np.ptp(self.dx) < 1e-9 * self.dx.max() and np.ptp(self.dy) < 1e-9 * self.dy.max())

    @property
    def max_cell(self) -> float:
        return float(max(self.dx.max(), self.dy.max()))

    @property
    def eps_max(self) -> float:
        return float(np.max(self.eps))

    @property
    def complex_eps(self) -> np.ndarray:
        return self.eps * (1.0 - 1j * self.tan_delta)

    def with_eps(self, eps: np.ndarray) -> "Grid2D":
        eps = np.asarray(eps, dtype=float)
        if eps.shape != self.shape:
            raise InvalidGeometry(f"eps shape {eps.shape} does not match grid {self.shape}")
        return replace(self, eps=eps)

    def same_as(self, other: "Grid2D") -> bool:
        return (
            self is other
            or (
                self.shape == other.shape
                and np.array_equal(self.x_edges, other.x_edges)
                and np.array_equal(self.y_edges, other.y_edges)
            )
        )

    def region_integral(self, values: np.ndarray, label: int) -> float:
        """Integral of a per-cell quantity over the cells carrying ``label``."""
        mask = self.region == label
        return float(np.sum(values[mask] * self.cell_area[mask]))

    def fingerprint(self) -> bytes:
        parts = (self.x_edges, self.y_edges, self.eps, self.tan_delta, self.region)
        return b"".join(np.ascontiguousarray(p).tobytes() for p in parts)


def _merge_breakpoints(points: Iterable[float], tol: float) -> np.ndarray:
    pts = np.sort(np.asarray(list(points), dtype=float))
    out = [pts[0]]
    for p in pts[1:]:
        if p - out[-1] > tol:
            out.append(p)
    return np.array(out)


def axis_edges(breakpoints: Sequence[float], h_max: float, tol: float = 1e-10) -> np.ndarray:
    """Edges that hit every breakpoint, splitting each interval into equal cells no larger than ``h_max``."""
    pts = _merge_breakpoints(breakpoints, tol)
    edges = [pts[:1]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((hi - lo) / h_max - 1e-9))
        edges.append(np.linspace(lo, hi, n + 1)[1:])
    return np.concatenate(edges)


def paint(x_edges, y_edges, eps_background: float, blocks: Sequence[Rect], clad_tan_delta: float = 0.0) -> Grid2D:
    """Rasterize rectangles onto a grid; a cell takes the material of the last block containing its center."""
    x_edges = np.asarray(x_edges, dtype=float)
    y_edges = np.asarray(y_edges, dtype=float)
    xc = 0.5 * (x_edges[1:] + x_edges[:-1])
    yc = 0.5 * (y_edges[1:] + y_edges[:-1])
    eps = np.full((xc.size, yc.size), float(eps_background))
    tand = np.full(eps.shape, float(clad_tan_delta))
    region = np.zeros(eps.shape, dtype=np.int32)
    for k, blk in enumerate(blocks, start=1):
        ix = (xc > blk.x0) & (xc < blk.x1)
        iy = (yc > blk.y0) & (yc < blk.y1)
        m = np.outer(ix, iy)
        eps[m] = blk.eps
        tand[m] = blk.tan_delta
        region[m] = k
    return Grid2D(x_edges, y_edges, eps, tand, region, float(eps_background), tuple(blocks))


def required_cell(eps_core: float, f_max: float, cells_per_wavelength: int) -> float:
    return core_wavelength(eps_core, f_max) / cells_per_wavelength


def required_padding(eps_core: float, eps_clad: float, f_min: float, decay_lengths: float = 5.0) -> float:
    return decay_lengths / clad_decay_rate(eps_core, eps_clad, f_min)


def core_block(cs: CrossSection, x_center: float = 0.0, y_center: float = 0.0) -> Rect:
    return Rect(
        x_center - cs.a / 2, x_center + cs.a / 2,
        y_center - cs.b / 2, y_center + cs.b / 2,
        cs.core.eps_r, cs.core.tan_delta,
    )


def _check_size(nx: int, ny: int, max_cells: int):
    if nx * ny > max_cells:
        raise GridTooLarge(f"grid of {nx} x {ny} = {nx * ny} cells exceeds the cap of {max_cells}")


def build_grid(
    cs: CrossSection,
    f_max: float,
    cells_per_wavelength: int = 20,
    *,
    f_min: float | None = None,
    pad_decay_lengths: float = 5.0,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> Grid2D:
    """Uniform grid for a single guide centered at the origin.

    Cell sizes are the largest divisors of ``a`` and ``b`` not exceeding
    ``lambda_core / cells_per_wavelength`` at ``f_max``.  Padding covers at
    least ``pad_decay_lengths`` cladding decay lengths at ``f_min`` (which
    defaults to ``f_max``) and is rounded up to whole cells.
    """
    if cells_per_wavelength < 20:
        raise ValueError("cells_per_wavelength must be >= 20")
    h = required_cell(cs.core.eps_r, f_max, cells_per_wavelength)
    na = math.ceil(cs.a / h - 1e-9)
    nb = math.ceil(cs.b / h - 1e-9)
    dx, dy = cs.a / na, cs.b / nb
    pad = required_padding(cs.core.eps_r, cs.clad.eps_r, f_min or f_max, pad_decay_lengths)
    px = math.ceil(pad / dx - 1e-9)
    py = math.ceil(pad / dy - 1e-9)
    nx, ny = na + 2 * px, nb + 2 * py
    _check_size(nx, ny, max_cells)
    x_edges = (np.arange(nx + 1) - nx / 2) * dx
    y_edges = (np.arange(ny + 1) - ny / 2) * dy
    return paint(x_edges, y_edges, cs.clad.eps_r, [core_block(cs)], cs.clad.tan_delta)


def build_composite_grid(
    blocks: Sequence[Rect],
    eps_clad: float,
    f_max: float,
    cells_per_wavelength: int = 20,
    *,
    f_min: float | None = None,
    clad_tan_delta: float = 0.0,
    pad_decay_lengths: float = 5.0,
    extra_x: Sequence[float] = (),
    extra_y: Sequence[float] = (),
    min_gap_cells: int = 0,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> Grid2D:
    """Possibly non-uniform grid whose edges hit every block boundary.

    Used whenever modes of several geometries must share one grid (junctions,
    coupled pairs).  ``extra_x``/``extra_y`` add breakpoints (e.g. the
    boundaries of a second cross-section that is not painted).  Gaps between
    neighbouring blocks are split into at least ``min_gap_cells`` cells.
    """
    eps_core = max(float(np.real(b.eps)) for b in blocks)
    h = required_cell(eps_core, f_max, cells_per_wavelength)
    pad = required_padding(eps_core, eps_clad, f_min or f_max, pad_decay_lengths)
    xs = [v for b in blocks for v in (b.x0, b.x1)] + list(extra_x)
    ys = [v for b in blocks for v in (b.y0, b.y1)] + list(extra_y)
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_edges = _padded_axis(xs, x_lo - pad, x_hi + pad, h, min_gap_cells, blocks, "x")
    y_edges = _padded_axis(ys, y_lo - pad, y_hi + pad, h, min_gap_cells, blocks, "y")
    _check_size(x_edges.size - 1, y_edges.size - 1, max_cells)
    return paint(x_edges, y_edges, eps_clad, blocks, clad_tan_delta)


def _padded_axis(points, lo, hi, h, min_gap_cells, blocks, axis) -> np.ndarray:
    edges = axis_edges([lo, *points, hi], h)
    if min_gap_cells:
        edges = _refine_gaps(edges, blocks, axis, min_gap_cells)
    return edges


def _refine_gaps(edges, blocks, axis, min_cells) -> np.ndarray:
    spans = sorted((b.x0, b.x1) if axis == "x" else (b.y0, b.y1) for b in blocks)
    out = edges
    for (_, e0), (s1, _) in zip(spans[:-1], spans[1:]):
        if s1 <= e0:
            continue
        inside = (out > e0 + 1e-12) & (out < s1 - 1e-12)
        if inside.sum() + 1 < min_cells:
            fill = np.linspace(e0, s1, min_cells + 1)[1:-1]
            out = np.sort(np.concatenate([out[~inside], fill]))
    return out


def pair_blocks(cs: CrossSection, d: float) -> list[Rect]:
    """Two identical cores side by side along x with edge-to-edge gap ``d``."""
    xc = (cs.a + d) / 2
    return [core_block(cs, -xc), core_block(cs, xc)]


def gap_cells(grid: Grid2D, d: float, a: float) -> int:
    xc = (a + d) / 2
    e0, s1 = -xc + a / 2, xc - a / 2
    return int(np.sum((grid.x_centers > e0) & (grid.x_centers < s1)))


@dataclass(frozen=True)
class FrequencyGrid:
    frequencies: tuple

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.size == 0 or np.any(f <= 0) or np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be positive and strictly increasing")

    @classmethod
    def linspace(cls, start: float = DEFAULT_BAND[0], stop: float = DEFAULT_BAND[1], points: int = 9):
        return cls(tuple(float(v) for v in np.linspace(start, stop, points)))

    def __iter__(self):
        return iter(self.frequencies)

    def __len__(self):
        return len(self.frequencies)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.frequencies, dtype=float)
