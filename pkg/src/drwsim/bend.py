"""Bend loss from a conformally transformed straight profile.

A bend of centerline radius ``R`` is replaced by a straight guide whose
permittivity is scaled by ``(1 + u / R)**2``, with ``u`` the offset from the
centerline toward the outside of the bend.  Loss per bend combines the two
junction mismatches with the differential dielectric loss along the arc.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import dielectric_attenuation
from .errors import InvalidGeometry
from .fdfd import (
    ModeSolution,
    field_centroid,
    mode_overlap,
    solve_grid_modes,
)
from .model import DB_PER_NEPER, CrossSection, Grid2D, build_grid

# Below this the equivalent permittivity would fall under vacuum (inside the bend center).
MIN_EQUIVALENT_EPS = 1.0
NEGATIVE_LOSS_FLAG_DB = -0.05


class BendPlane(enum.Enum):
    A = "in-plane-of-a"
    B = "in-plane-of-b"


@dataclass(frozen=True)
class BendSpec:
    radius: float
    angle: float = math.pi / 2
    plane: BendPlane = BendPlane.A

    def __post_init__(self):
        object.__setattr__(self, "plane", BendPlane(self.plane))
        if not (0 < self.angle <= 2 * math.pi):
            raise InvalidGeometry(f"bend angle must lie in (0, 2 pi], got {self.angle}")
        if not self.radius > 0:
            raise InvalidGeometry("bend radius must be positive")

    def validate_for(self, cs: CrossSection):
        half = (cs.a if self.plane is BendPlane.A else cs.b) / 2
        if not self.radius > half:
            raise InvalidGeometry(
                f"centerline radius {self.radius * 1e6:g} um does not clear the half-width {half * 1e6:g} um"
            )


def centerline_radius(inner_radius: float, cs: CrossSection, plane: BendPlane | str = BendPlane.A) -> float:
    """Convert a radius measured to the inner core edge into a centerline radius."""
    plane = BendPlane(plane)
    return inner_radius + (cs.a if plane is BendPlane.A else cs.b) / 2


def bend_equivalent_profile(cs: CrossSection, radius: float, grid: Grid2D, plane: BendPlane | str = BendPlane.A) -> Grid2D:
    """Grid with the same edges as ``grid`` and ``eps (1 + u/R)^2`` in every cell."""
    plane = BendPlane(plane)
    BendSpec(radius, plane=plane).validate_for(cs)
    if plane is BendPlane.A:
        u = grid.x_centers[:, None] * np.ones((1, grid.ny))
    else:
        u = np.ones((grid.nx, 1)) * grid.y_centers[None, :]
    factor = (1.0 + u / radius) ** 2
    eps = np.maximum(grid.eps * factor, MIN_EQUIVALENT_EPS)
    eps[u <= -radius] = MIN_EQUIVALENT_EPS
    return grid.with_eps(eps)


@dataclass(frozen=True, eq=False)
class BendModes:
    straight: list
    bend: ModeSolution
    grid: Grid2D
    radius: float


def _straight_grid(cs: CrossSection, f: float, cells_per_wavelength: int) -> Grid2D:
    return build_grid(cs.lossless(), f, cells_per_wavelength)


def bend_fundamental(
    cs: CrossSection,
    radius: float,
    f: float,
    *,
    plane: BendPlane | str = BendPlane.A,
    cells_per_wavelength: int = 20,
    grid: Grid2D | None = None,
    straight: ModeSolution | None = None,
    candidates: int = 6,
) -> ModeSolution:
    """Bent-guide mode that continues the straight fundamental.

    Strong bends can push an outer-edge mode of the other polarization above
    it in neff, so the candidate with the largest straight overlap is taken.
    """
    grid = grid or _straight_grid(cs, f, cells_per_wavelength)
    straight = straight or solve_grid_modes(grid, f, 1)[0]
    prof = bend_equivalent_profile(cs, radius, grid, plane)
    found = solve_grid_modes(prof, f, candidates)
    return max(found, key=lambda m: junction_power(straight, m))


def bend_modes(cs, radius, f, n_straight=1, *, plane=BendPlane.A, cells_per_wavelength=20) -> BendModes:
    grid = _straight_grid(cs, f, cells_per_wavelength)
    straight = solve_grid_modes(grid, f, n_straight)
    bend = bend_fundamental(cs, radius, f, plane=plane, grid=grid, straight=straight[0])
    return BendModes(straight, bend, grid, radius)


def junction_power(straight: ModeSolution, bend: ModeSolution) -> float:
    """Power coupled between the straight and bent fundamentals at one junction."""
    # The equivalent-profile mode lives on a grid with different eps but identical edges.
    bend_on_grid = replace(bend, grid=straight.grid)
    return abs(mode_overlap(straight, bend_on_grid)) ** 2


@dataclass(frozen=True)
class BendLoss:
    radius: float
    f: float
    loss_db: float
    junction_db: float
    arc_db: float
    flagged: bool


def bend_loss_90(
    cs: CrossSection,
    radius: float,
    f: float,
    tan_delta: float | None = None,
    *,
    plane: BendPlane | str = BendPlane.A,
    cells_per_wavelength: int = 20,
    modes: BendModes | None = None,
) -> BendLoss:
    """Excess loss (dB) of a pi/2 bend over a straight guide of the same arc length."""
    lossy = cs if tan_delta is None else cs.with_tan_delta(tan_delta)
    m = modes or bend_modes(cs, radius, f, plane=plane, cells_per_wavelength=cells_per_wavelength)
    straight = m.straight[0]
    coupled = junction_power(straight, m.bend)
    junction = 2.0 * -10.0 * math.log10(coupled)
    arc = math.pi / 2 * radius
    d_alpha = dielectric_attenuation(m.bend, lossy) - dielectric_attenuation(straight, lossy)
    arc_db = DB_PER_NEPER * d_alpha * arc
    total = junction + arc_db
    return BendLoss(radius, f, total, junction, arc_db, total < NEGATIVE_LOSS_FLAG_DB)


@dataclass(frozen=True)
class ModeConversion:
    fractions: np.ndarray
    unaccounted: float

    @property
    def converted(self) -> float:
        return float(np.sum(self.fractions[1:]))


def bend_mode_conversion(
    cs: CrossSection,
    radius: float,
    f: float,
    n_modes: int = 6,
    *,
    plane: BendPlane | str = BendPlane.A,
    cells_per_wavelength: int = 20,
    modes: BendModes | None = None,
) -> ModeConversion:
    """Power of the bent fundamental projected on each straight guided mode at the exit."""
    if n_modes < 2:
        raise ValueError("n_modes must be >= 2")
    m = modes or bend_modes(cs, radius, f, n_modes, plane=plane, cells_per_wavelength=cells_per_wavelength)
    fr = np.array([junction_power(s, m.bend) for s in m.straight[:n_modes]])
    return ModeConversion(fr, float(1.0 - fr.sum()))


def bend_centroid(ms: ModeSolution, plane: BendPlane | str = BendPlane.A) -> float:
    x, y = field_centroid(ms)
    return x if BendPlane(plane) is BendPlane.A else y
