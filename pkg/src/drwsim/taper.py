"""Staircase eigenmode-expansion model of tapered mode converters and links."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bend import BendSpec, bend_loss_90
from .channel import SParameterSet, dielectric_attenuation, straight_channel
from .errors import TaperInfeasible
from .fdfd import ModeSolution, mode_overlap, solve_grid_modes
from .modematch import (
    ScatteringBlock,
    cascade_blocks,
    junction_scattering as _junction_from_modes,
    propagation,
    star,
)
from .model import CrossSection, build_composite_grid, build_grid, core_block, paint
from .parallel import map_ordered

DEFAULT_N_MODES = 5
LAUNCH_AREA_RATIO = 3.0


@dataclass(frozen=True)
class Segment:
    length: float
    cs: CrossSection


@dataclass(frozen=True)
class TaperProfile:
    """Ordered uniform sections; the outer ends of the first and last are the ports.

    Zero-length sections are allowed and act as port reference guides.
    """

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise TaperInfeasible("a taper needs at least one segment")
        if any(s.length < 0 for s in segs):
            raise TaperInfeasible("segment lengths must be non-negative")
        core, clad = segs[0].cs.core, segs[0].cs.clad
        if any(s.cs.core != core or s.cs.clad != clad for s in segs):
            raise TaperInfeasible("all segments must share core and cladding materials")
        for dim in ("a", "b"):
            v = np.array([getattr(s.cs, dim) for s in segs])
            d = np.diff(v)
            if np.any(d > 0) and np.any(d < 0):
                raise TaperInfeasible(f"dimension {dim} must vary monotonically along the taper")

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    @property
    def cs_in(self) -> CrossSection:
        return self.segments[0].cs

    @property
    def cs_out(self) -> CrossSection:
        return self.segments[-1].cs

    def reversed(self) -> "TaperProfile":
        return TaperProfile(tuple(reversed(self.segments)))

    def with_tan_delta(self, core: float, clad: float | None = None) -> "TaperProfile":
        return TaperProfile(tuple(replace(s, cs=s.cs.with_tan_delta(core, clad)) for s in self.segments))

    def runs(self) -> list[Segment]:
        """Consecutive identical cross-sections merged into single sections."""
        out: list[Segment] = []
        for s in self.segments:
            if out and out[-1].cs == s.cs:
                out[-1] = Segment(out[-1].length + s.length, s.cs)
            else:
                out.append(s)
        return out


def launch_cross_section(cs: CrossSection, area_ratio: float = LAUNCH_AREA_RATIO) -> CrossSection:
    """Same-material guide with ``area_ratio`` times the cross-sectional area."""
    s = math.sqrt(area_ratio)
    return cs.scaled(s, s)


def make_linear_taper(cs_in: CrossSection, cs_out: CrossSection, length: float, n_segments: int) -> TaperProfile:
    """Linear staircase: ``n_segments`` equal sections sampled at their midpoints.

    The exact endpoint cross-sections are kept as zero-length port sections.
    """
    if n_segments < 2:
        raise TaperInfeasible("n_segments must be >= 2")
    if length <= 0:
        raise TaperInfeasible("taper length must be positive")
    if cs_in.core != cs_out.core or cs_in.clad != cs_out.clad:
        raise TaperInfeasible("taper endpoints must share materials")
    seg_len = length / n_segments
    segs = [Segment(0.0, cs_in)]
    for k in range(n_segments):
        t = (k + 0.5) / n_segments
        a = cs_in.a + t * (cs_out.a - cs_in.a)
        b = cs_in.b + t * (cs_out.b - cs_in.b)
        segs.append(Segment(seg_len, replace(cs_in, a=a, b=b)))
    segs.append(Segment(0.0, cs_out))
    return TaperProfile(tuple(segs))


def junction_grids(cs_left: CrossSection, cs_right: CrossSection, f: float, cells_per_wavelength: int = 20):
    """Two grids with identical edges, one painted with each cross-section."""
    if cs_left == cs_right:
        g = build_grid(cs_left.lossless(), f, cells_per_wavelength)
        return g, g
    bl, br = core_block(cs_left.lossless()), core_block(cs_right.lossless())
    gl = build_composite_grid(
        [bl], cs_left.clad.eps_r, f, cells_per_wavelength,
        extra_x=(br.x0, br.x1), extra_y=(br.y0, br.y1),
    )
    gr = paint(gl.x_edges, gl.y_edges, cs_right.clad.eps_r, [br])
    return gl, gr


@dataclass(frozen=True, eq=False)
class JunctionModes:
    left: list
    right: list


def junction_modes(cs_left, cs_right, f, n_modes=DEFAULT_N_MODES, cells_per_wavelength=20) -> JunctionModes:
    gl, gr = junction_grids(cs_left, cs_right, f, cells_per_wavelength)
    left = solve_grid_modes(gl, f, n_modes)
    right = left if gr is gl else solve_grid_modes(gr, f, n_modes)
    return JunctionModes(left, right)


def junction_scattering(
    cs_left: CrossSection,
    cs_right: CrossSection,
    f: float,
    n_modes: int = DEFAULT_N_MODES,
    *,
    cells_per_wavelength: int = 20,
) -> ScatteringBlock:
    """Scattering matrix (left modes first) of an abrupt junction; bases truncated to guided modes."""
    jm = junction_modes(cs_left, cs_right, f, n_modes, cells_per_wavelength)
    return _junction_from_modes(jm.left, jm.right)


def _match_bases(a: list[ModeSolution], b: list[ModeSolution]):
    """Pair up the same physical modes solved on two different grids."""
    cost = np.array(
        [[abs(ma.neff - mb.neff) / ma.neff + abs(ma.mode_class.rho_x - mb.mode_class.rho_x) for mb in b] for ma in a]
    )
    ia, ib = linear_sum_assignment(cost)
    order = np.argsort(ia)
    ia, ib = ia[order], ib[order]
    return [a[i] for i in ia], [b[i] for i in ib]


@dataclass(frozen=True, eq=False)
class CascadeRecord:
    f: float
    block: ScatteringBlock
    mode_counts: tuple
    truncated_power: np.ndarray  # per junction, fundamental incidence


def _alpha(modes: list[ModeSolution], cs: CrossSection) -> np.ndarray | None:
    if cs.core.tan_delta == 0 and cs.clad.tan_delta == 0:
        return None
    return np.array([dielectric_attenuation(m, cs) for m in modes])


def _cascade_at(args) -> CascadeRecord:
    profile, f, n_modes, cpw = args
    runs = profile.runs()
    if len(runs) == 1:
        modes = solve_grid_modes(build_grid(runs[0].cs.lossless(), f, cpw), f, n_modes)
        blk = propagation([m.beta.real for m in modes], runs[0].length, _alpha(modes, runs[0].cs))
        return CascadeRecord(f, blk, (len(modes),), np.zeros(0))
    juncs = [junction_modes(r0.cs, r1.cs, f, n_modes, cpw) for r0, r1 in zip(runs[:-1], runs[1:])]
    lefts = [j.left for j in juncs]
    rights = [j.right for j in juncs]
    for k in range(1, len(runs) - 1):
        rights[k - 1], lefts[k] = _match_bases(rights[k - 1], lefts[k])
    blocks = []
    counts = []
    for k, run in enumerate(runs):
        modes = lefts[0] if k == 0 else rights[k - 1]
        blocks.append(propagation([m.beta.real for m in modes], run.length, _alpha(modes, run.cs)))
        counts.append(len(modes))
        if k < len(juncs):
            blocks.append(_junction_from_modes(lefts[k], rights[k]))
    full = cascade_blocks(blocks)
    # power of a fundamental incident from either side that the kept bases miss
    trunc = np.array([max(b.truncated[0], b.truncated[b.n_left]) for b in blocks if b.truncated.size])
    return CascadeRecord(f, full, tuple(counts), trunc)


def cascade(
    profile: TaperProfile,
    f_grid: Sequence[float],
    n_modes: int = DEFAULT_N_MODES,
    *,
    cells_per_wavelength: int = 20,
    workers: int = 1,
) -> tuple[SParameterSet, list[CascadeRecord]]:
    """Fundamental-to-fundamental 2-port of a staircase profile plus the multimode record per frequency."""
    f = np.asarray(f_grid, dtype=float)
    records = map_ordered(_cascade_at, [(profile, float(v), n_modes, cells_per_wavelength) for v in f], workers)
    s = np.empty((f.size, 2, 2), dtype=complex)
    for i, rec in enumerate(records):
        blk = rec.block
        n1 = blk.n_left
        s[i] = [[blk.s[0, 0], blk.s[0, n1]], [blk.s[n1, 0], blk.s[n1, n1]]]
    return SParameterSet(f, s), records


def adiabaticity(profile: TaperProfile, f: float, *, cells_per_wavelength: int = 20) -> float:
    """Largest local mode-coupling amplitude per unit length along the profile.

    For each junction, ``sqrt(1 - |<psi_i|psi_i+1>|^2)`` of the fundamentals
    divided by the center-to-center distance of the adjacent sections.  It
    tends to the continuous coupling coefficient as the staircase is refined.
    """
    segs = profile.segments
    worst = 0.0
    for s0, s1 in zip(segs[:-1], segs[1:]):
        if s0.cs == s1.cs:
            continue
        step = 0.5 * (s0.length + s1.length)
        if step <= 0:
            return math.inf
        jm = junction_modes(s0.cs, s1.cs, f, 1, cells_per_wavelength)
        p = abs(mode_overlap(jm.left[0], jm.right[0])) ** 2
        worst = max(worst, math.sqrt(max(1.0 - p, 0.0)) / step)
    return worst


def bend_two_port(frequencies, loss_db: Sequence[float]) -> SParameterSet:
    """Matched 2-port carrying only the excess loss of a bend."""
    t = 10.0 ** (-np.asarray(loss_db, dtype=float) / 20.0)
    return SParameterSet.two_port(frequencies, np.zeros(len(t)), t)


def star_two_port(a: SParameterSet, b: SParameterSet) -> SParameterSet:
    if not np.allclose(a.frequencies, b.frequencies):
        raise ValueError("frequency grids differ")
    out = np.empty_like(a.s)
    for i in range(len(a)):
        ba = ScatteringBlock(a.s[i], 1, 1)
        bb = ScatteringBlock(b.s[i], 1, 1)
        out[i] = star(ba, bb).s
    return SParameterSet(a.frequencies, out)


def end_to_end_link(
    taper_in: TaperProfile | None,
    straight_length: float,
    bends: Sequence[BendSpec],
    taper_out: TaperProfile | None,
    f_grid: Sequence[float],
    tan_delta: float = 0.0,
    *,
    cs: CrossSection | None = None,
    n_modes: int = DEFAULT_N_MODES,
    cells_per_wavelength: int = 20,
    workers: int = 1,
) -> SParameterSet:
    """Taper, straight guide, bend excess losses and output taper composed by star products.

    ``cs`` defaults to the output cross-section of ``taper_in``.  ``None``
    tapers stand for ideal (identity) transitions.
    """
    f = np.asarray(f_grid, dtype=float)
    if cs is None:
        if taper_in is None:
            raise ValueError("a cross-section is required when taper_in is None")
        cs = taper_in.cs_out
    lossy = cs.with_tan_delta(tan_delta)
    parts = []
    if taper_in is not None:
        parts.append(cascade(taper_in.with_tan_delta(tan_delta), f, n_modes,
                             cells_per_wavelength=cells_per_wavelength, workers=workers)[0])
    parts.append(straight_channel(straight_length, lossy, f, cells_per_wavelength=cells_per_wavelength, workers=workers))
    for spec in bends:
        spec.validate_for(cs)
        losses = [bend_loss_90(cs, spec.radius, v, tan_delta, plane=spec.plane,
                               cells_per_wavelength=cells_per_wavelength).loss_db * spec.angle / (math.pi / 2)
                  for v in f]
        parts.append(bend_two_port(f, losses))
    if taper_out is not None:
        parts.append(cascade(taper_out.with_tan_delta(tan_delta), f, n_modes,
                             cells_per_wavelength=cells_per_wavelength, workers=workers)[0])
    out = parts[0]
    for p in parts[1:]:
        out = star_two_port(out, p)
    return out
