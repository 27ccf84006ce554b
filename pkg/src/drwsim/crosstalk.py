"""Coupling between two parallel guides from their even and odd supermodes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridTooCoarse, InvalidGeometry, NoGuidedMode
from .fdfd import ModeSolution, _staggered_eps, solve_grid_modes, weights
from .model import EPS0, CrossSection, build_composite_grid, gap_cells, k0_of, pair_blocks, paint
from .parallel import map_ordered

MIN_GAP_CELLS = 8
FLOOR_DB = -120.0
SUPERMODE_CANDIDATES = 6


@dataclass(frozen=True)
class ParallelPair:
    """Two identical guides side by side along x, ``d`` apart edge to edge, over length ``L``."""

    cs: CrossSection
    d: float
    length: float = 1e-3

    def __post_init__(self):
        if not self.d > 0:
            raise InvalidGeometry("edge-to-edge gap must be positive")
        if self.length < 0:
            raise InvalidGeometry("coupled length must be non-negative")


@dataclass(frozen=True, eq=False)
class Supermodes:
    even: ModeSolution
    odd: ModeSolution

    @property
    def kappa(self) -> float:
        return coupling_coefficient(self.even.beta.real, self.odd.beta.real)


def pair_grid(pair: ParallelPair, f: float, cells_per_wavelength: int = 20):
    cs = pair.cs.lossless()
    grid = build_composite_grid(
        pair_blocks(cs, pair.d), cs.clad.eps_r, f, cells_per_wavelength, min_gap_cells=MIN_GAP_CELLS
    )
    n_gap = gap_cells(grid, pair.d, cs.a)
    if n_gap < MIN_GAP_CELLS:
        raise GridTooCoarse(f"gap resolved by {n_gap} cells, need {MIN_GAP_CELLS}")
    return grid


def _parity(ms: ModeSolution) -> float:
    """+1 for an even dominant transverse field about x = 0, -1 for odd."""
    g = ms.grid
    comp = "Ex" if ms.mode_class.rho_x >= 0.5 else "Ey"
    x = g.x_centers if comp == "Ex" else g.x_edges[:-1]
    field = np.real(ms[comp])
    right = np.sum(field[x > 0])
    left = np.sum(field[x < 0])
    return float(np.sign(right * left))


def supermode_split(pair: ParallelPair, f: float, *, cells_per_wavelength: int = 20) -> Supermodes:
    """Even and odd supermodes built from the x-polarized fundamental of each guide."""
    grid = pair_grid(pair, f, cells_per_wavelength)
    modes = solve_grid_modes(grid, f, SUPERMODE_CANDIDATES)
    xpol = [m for m in modes if m.mode_class.rho_x >= 0.5]
    even = next((m for m in xpol if _parity(m) > 0), None)
    odd = next((m for m in xpol if _parity(m) < 0), None)
    if even is None or odd is None:
        raise NoGuidedMode(f"could not identify both supermodes at {f / 1e9:g} GHz, d = {pair.d * 1e6:g} um")
    return Supermodes(even, odd)


def coupling_coefficient(beta_even: float, beta_odd: float) -> float:
    """Half the supermode splitting.

    The magnitude is taken because for the x-polarized fundamental of a pair
    spaced along x the antisymmetric supermode is the faster one.
    """
    return 0.5 * abs(beta_even - beta_odd)


def _db(x):
    return np.maximum(10.0 * np.log10(np.maximum(x, 1e-300)), FLOOR_DB)


@dataclass(frozen=True)
class CrosstalkResult:
    frequencies: np.ndarray
    kappa: np.ndarray
    beta_mean: np.ndarray
    fext_db: np.ndarray
    through_db: np.ndarray
    next_db: np.ndarray


def _split(args):
    pair, f, cpw = args
    sm = supermode_split(pair, f, cells_per_wavelength=cpw)
    return sm.kappa, 0.5 * (sm.even.beta.real + sm.odd.beta.real)


def fext(pair: ParallelPair, f_grid: Sequence[float], *, cells_per_wavelength: int = 20, workers: int = 1) -> CrosstalkResult:
    """Far-end coupled power ``sin^2(kappa L)`` and through power ``cos^2(kappa L)`` in dB."""
    f = np.asarray(f_grid, dtype=float)
    out = map_ordered(_split, [(pair, float(v), cells_per_wavelength) for v in f], workers)
    kappa = np.array([o[0] for o in out])
    beta = np.array([o[1] for o in out])
    coupled, through = transfer_db(kappa, pair.length)
    return CrosstalkResult(f, kappa, beta, coupled, through, next_bound(kappa, beta))


def transfer_db(kappa, length):
    """Coupled and through power (dB) of a synchronous lossless coupler, floored at -120 dB."""
    phase = np.asarray(kappa, dtype=float) * length
    return _db(np.sin(phase) ** 2), _db(np.cos(phase) ** 2)


def next_bound(kappa, beta):
    """Order-of-magnitude near-end level ``|kappa / 2 beta|^2`` in dB; not a rigorous bound."""
    return _db(np.abs(np.asarray(kappa) / (2.0 * np.asarray(beta))) ** 2)


def overlap_coupling(pair: ParallelPair, f: float, *, cells_per_wavelength: int = 20) -> float:
    """Coupled-mode ``kappa`` from the isolated-guide fields on the pair grid.

    ``kappa = (omega eps0 / 4) integral_core1 (eps_core - eps_clad) E1* . E2 dA``
    with both fields at unit power.  Kept as a cross-check of the supermode value.
    """
    grid = pair_grid(pair, f, cells_per_wavelength)
    cs = pair.cs.lossless()
    left, right = pair_blocks(cs, pair.d)
    g1 = paint(grid.x_edges, grid.y_edges, cs.clad.eps_r, [left])
    g2 = paint(grid.x_edges, grid.y_edges, cs.clad.eps_r, [right])
    m1 = solve_grid_modes(g1, f, 1)[0]
    m2 = solve_grid_modes(g2, f, 1)[0]
    delta = np.where(g1.region > 0, cs.core.eps_r - cs.clad.eps_r, 0.0)
    dx, dy, dz = _staggered_eps(grid, delta)
    w = weights(grid)
    integral = sum(
        np.sum(dm * w[c] * np.conj(m1[c]) * m2[c]) for dm, c in ((dx, "Ex"), (dy, "Ey"), (dz, "Ez"))
    )
    omega = 2 * math.pi * f
    return float(abs(0.25 * omega * EPS0 * integral))


@dataclass(frozen=True)
class DecayFit:
    slope: float  # d ln(kappa) / d d, 1/m
    intercept: float
    expected_slope: float
    r2: float


def fit_log_kappa(d: Sequence[float], kappa: Sequence[float], cs: CrossSection, f: float, beta: float) -> DecayFit:
    """Least-squares line through ``ln kappa`` versus gap, compared with ``-sqrt(beta^2 - k0^2 eps_clad)``."""
    d = np.asarray(d, dtype=float)
    y = np.log(np.abs(np.asarray(kappa, dtype=float)))
    slope, intercept = np.polyfit(d, y, 1)
    resid = y - (slope * d + intercept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    k0 = k0_of(f)
    expected = -math.sqrt(max(beta ** 2 - k0 ** 2 * cs.clad.eps_r, 0.0))
    return DecayFit(float(slope), float(intercept), expected, float(r2))
