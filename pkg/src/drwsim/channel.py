"""Dielectric attenuation, dispersion and straight-channel S-parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import IncompatibleGrids, InsufficientGrid
from .fdfd import ModeSolution, _staggered_eps, solve_grid_modes, weights
from .model import C0, DB_PER_NEPER, EPS0, CrossSection, build_grid
from .parallel import map_ordered


@dataclass(frozen=True, eq=False)
class SParameterSet:
    """Per-frequency scattering matrices in power-normalized modal waves.

    ``s`` has shape ``(n_freq, n_ports, n_ports)``.  The 50 ohm reference is
    only a tag for file export.
    """

    frequencies: np.ndarray
    s: np.ndarray
    z0: float = 50.0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.s, dtype=complex)
        if s.ndim != 3 or s.shape[0] != f.size or s.shape[1] != s.shape[2]:
            raise ValueError(f"S-array shape {s.shape} does not match {f.size} frequencies")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "s", s)

    @property
    def n_ports(self) -> int:
        return self.s.shape[1]

    def __len__(self):
        return self.frequencies.size

    def param(self, i: int, j: int) -> np.ndarray:
        """S_ij with 1-based port indices."""
        return self.s[:, i - 1, j - 1]

    def db(self, i: int, j: int) -> np.ndarray:
        return 20.0 * np.log10(np.maximum(np.abs(self.param(i, j)), 1e-300))

    def reciprocity_error(self) -> float:
        return float(np.max(np.abs(self.s - np.transpose(self.s, (0, 2, 1))))) if len(self) else 0.0

    def passivity_excess(self) -> float:
        """Largest singular value minus one over all frequencies (<= 0 means passive)."""
        if not len(self):
            return 0.0
        return float(np.max(np.linalg.svd(self.s, compute_uv=False)) - 1.0)

    @classmethod
    def identity(cls, frequencies, n_ports: int = 2) -> "SParameterSet":
        f = np.asarray(frequencies, dtype=float)
        s = np.zeros((f.size, n_ports, n_ports), dtype=complex)
        s[:, range(n_ports), range(n_ports)] = 0.0
        if n_ports == 2:
            s[:, 0, 1] = s[:, 1, 0] = 1.0
        else:
            s[:] = np.eye(n_ports)
        return cls(f, s)

    @classmethod
    def two_port(cls, frequencies, s11, s21, s12=None, s22=None) -> "SParameterSet":
        f = np.asarray(frequencies, dtype=float)
        s = np.zeros((f.size, 2, 2), dtype=complex)
        s[:, 0, 0] = s11
        s[:, 1, 0] = s21
        s[:, 0, 1] = s21 if s12 is None else s12
        s[:, 1, 1] = s11 if s22 is None else s22
        return cls(f, s)


@dataclass(frozen=True)
class LossTable:
    frequencies: np.ndarray
    tan_deltas: np.ndarray
    db_per_mm: np.ndarray  # shape (n_tan_delta, n_freq)

    def row(self, tan_delta: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.tan_deltas - tan_delta)))
        return self.db_per_mm[idx]


def loss_map(ms: ModeSolution, cs: CrossSection) -> np.ndarray:
    """Per-cell ``eps_r * tan_delta`` using the region labels of the mode's grid."""
    region = ms.grid.region
    core_loss = cs.core.eps_r * cs.core.tan_delta
    clad_loss = cs.clad.eps_r * cs.clad.tan_delta
    return np.where(region > 0, core_loss, clad_loss).astype(float)


def dielectric_attenuation(ms: ModeSolution, cs: CrossSection, f: float | None = None) -> float:
    """Power-perturbation attenuation in Np/m of a mode solved without loss.

    ``alpha = (omega eps0 / 2) sum eps_r tan_delta integral |E|^2 dA / (2 P_z)``
    with the loss map sampled at the same staggered positions as the field.
    """
    f = ms.f if f is None else f
    omega = 2 * math.pi * f
    lx, ly, lz = _staggered_eps(ms.grid, loss_map(ms, cs))
    w = weights(ms.grid)
    dissipated = (
        np.sum(lx * w["Ex"] * np.abs(ms["Ex"]) ** 2)
        + np.sum(ly * w["Ey"] * np.abs(ms["Ey"]) ** 2)
        + np.sum(lz * w["Ez"] * np.abs(ms["Ez"]) ** 2)
    )
    return float(0.5 * omega * EPS0 * dissipated / (2.0 * ms.power))


def plane_wave_attenuation(eps_r: float, tan_delta: float, f: float) -> float:
    """Attenuation of a plane wave in an unbounded lossy dielectric, ``pi f sqrt(eps) tan_delta / c``."""
    return math.pi * f * math.sqrt(eps_r) * tan_delta / C0


def np_per_m_to_db_per_mm(alpha: float) -> float:
    return alpha * DB_PER_NEPER * 1e-3


def _fundamental(args):
    cs, f, cpw = args
    grid = build_grid(cs.lossless(), f, cpw)
    return solve_grid_modes(grid, f, 1)[0]


def fundamental_modes(cs: CrossSection, f_list: Sequence[float], cells_per_wavelength: int = 20, workers: int = 1):
    return map_ordered(_fundamental, [(cs, float(f), cells_per_wavelength) for f in f_list], workers)


def loss_table(
    cs: CrossSection,
    f_list: Sequence[float],
    tan_delta_list: Sequence[float],
    *,
    cells_per_wavelength: int = 20,
    workers: int = 1,
    modes: Sequence[ModeSolution] | None = None,
) -> LossTable:
    """Dielectric loss in dB/mm of the fundamental mode; rows by ascending tan delta."""
    if not len(f_list) or not len(tan_delta_list):
        raise ValueError("frequency and tan delta lists must be non-empty")
    tds = np.sort(np.asarray(tan_delta_list, dtype=float))
    if modes is None:
        modes = fundamental_modes(cs, f_list, cells_per_wavelength, workers)
    table = np.empty((tds.size, len(f_list)))
    for j, ms in enumerate(modes):
        for i, td in enumerate(tds):
            table[i, j] = np_per_m_to_db_per_mm(dielectric_attenuation(ms, cs.with_tan_delta(td)))
    return LossTable(np.asarray(f_list, dtype=float), tds, table)


@dataclass(frozen=True)
class DispersionProfile:
    frequencies: np.ndarray
    beta: np.ndarray
    group_index: np.ndarray
    beta2: np.ndarray  # s^2 / m
    one_sided: np.ndarray  # True where a stencil is not centered


def dispersion_from_beta(frequencies, beta) -> DispersionProfile:
    """Group index and GVD from sampled ``beta(f)`` by central differences.

    Interior points use centered (nonuniform-aware) stencils; the two
    endpoints fall back to one-sided differences and are flagged.
    """
    f = np.asarray(frequencies, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if f.size < 5:
        raise InsufficientGrid(f"dispersion needs at least 5 frequency points, got {f.size}")
    omega = 2 * math.pi * f
    b1 = np.gradient(beta, omega, edge_order=2)
    b2 = np.gradient(b1, omega, edge_order=2)
    flags = np.zeros(f.size, dtype=bool)
    flags[[0, -1]] = True
    return DispersionProfile(f, beta, C0 * b1, b2, flags)


def _mode_beta(args):
    grid, f, index = args
    return float(np.real(solve_grid_modes(grid, f, index + 1)[index].beta))


def dispersion_profile(
    cs: CrossSection,
    f_grid: Sequence[float],
    mode_index: int = 0,
    *,
    cells_per_wavelength: int = 20,
    workers: int = 1,
) -> DispersionProfile:
    """Sweep ``beta(f)`` for one mode on a single grid sized for the top frequency."""
    f = np.asarray(f_grid, dtype=float)
    if f.size < 5:
        raise InsufficientGrid(f"dispersion needs at least 5 frequency points, got {f.size}")
    grid = build_grid(cs.lossless(), float(f.max()), cells_per_wavelength, f_min=float(f.min()))
    betas = map_ordered(_mode_beta, [(grid, float(v), mode_index) for v in f], workers)
    return dispersion_from_beta(f, betas)


def straight_channel(
    length: float,
    cs: CrossSection,
    f_grid: Sequence[float],
    *,
    cells_per_wavelength: int = 20,
    workers: int = 1,
    modes: Sequence[ModeSolution] | None = None,
) -> SParameterSet:
    """Matched 2-port of a straight guide: ``S21 = exp(-(alpha + j beta) L)``, ``S11 = 0``.

    The loss tangents attached to ``cs`` set ``alpha``.
    """
    if length < 0:
        raise ValueError("length must be non-negative")
    f = np.asarray(f_grid, dtype=float)
    if modes is None:
        modes = fundamental_modes(cs, f, cells_per_wavelength, workers)
    if len(modes) != f.size:
        raise IncompatibleGrids("one mode per frequency is required")
    alpha = np.array([dielectric_attenuation(m, cs) for m in modes])
    beta = np.array([float(np.real(m.beta)) for m in modes])
    s21 = np.exp(-(alpha + 1j * beta) * length)
    sp = SParameterSet.two_port(f, np.zeros(f.size), s21)
    sp.notes.update(alpha=alpha, beta=beta)
    return sp
