"""Marcatili's separable approximation for the rectangular dielectric guide.

Each transverse direction is treated as a symmetric slab of the core
permittivity against the cladding.  The two slab wavenumbers combine into
``beta**2 = k0**2 eps_core - kx**2 - ky**2``.  Fields in the corner regions
are closed with the product of the two cladding decays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import BelowCutoff, InvalidGeometry
from .model import CrossSection, k0_of


class Wall(enum.Enum):
    TE_like = "TE_like"  # dominant E tangential to the wall
    TM_like = "TM_like"  # dominant E normal to the wall


class Family(enum.Enum):
    Ex = "Ex"
    Ey = "Ey"


GUIDED_MARGIN = 1e-6


@dataclass(frozen=True)
class MarcatiliMode:
    family: Family
    p: int
    q: int
    kx: float
    ky: float
    gamma_x: float
    gamma_y: float
    beta: float
    neff: float
    f: float
    eps_core: float
    eps_clad: float
    a: float
    b: float

    @property
    def label(self) -> str:
        return f"{self.family.value}_{self.p}{self.q}"

    @property
    def walls(self) -> tuple[Wall, Wall]:
        return walls_for(self.family)


def walls_for(family: Family) -> tuple[Wall, Wall]:
    """Wall types of the (x, y) walls for a mode family."""
    if family is Family.Ey:
        return Wall.TE_like, Wall.TM_like
    return Wall.TM_like, Wall.TE_like


def _eta(wall: Wall, eps1: float, eps2: float) -> float:
    return 1.0 if wall is Wall.TE_like else eps2 / eps1


def transverse_residual(k_t: float, w: float, k0: float, eps1: float, eps2: float, p: int, wall: Wall) -> float:
    """``k_t w + 2 atan(eta k_t / gamma) - p pi``; increasing in ``k_t``."""
    v2 = k0 * k0 * (eps1 - eps2)
    g2 = v2 - k_t * k_t
    eta = _eta(wall, eps1, eps2)
    if g2 <= 0.0:
        return k_t * w + math.pi - p * math.pi
    return k_t * w + 2.0 * math.atan(eta * k_t / math.sqrt(g2)) - p * math.pi


def _bracket(w, k0, eps1, eps2, p) -> tuple[float, float]:
    v = k0 * math.sqrt(eps1 - eps2)
    return (p - 1) * math.pi / w, min(p * math.pi / w, v)


def solve_transverse(w: float, k0: float, eps1: float, eps2: float, p: int, wall: Wall) -> tuple[float, float]:
    """Transverse wavenumber and cladding decay rate of the ``p``-th slab solution.

    Bisection on the bracket ``((p-1) pi / w, min(p pi / w, V))`` to a relative
    width of 1e-12, then Newton steps that are kept only if they stay inside
    the bracket and reduce the residual.
    """
    if p < 1:
        raise ValueError("mode index must be >= 1")
    if not k0 * k0 * (eps1 - eps2) > 0:
        raise BelowCutoff("no guidance: k0^2 (eps1 - eps2) must be positive")
    lo, hi = _bracket(w, k0, eps1, eps2, p)
    res = lambda k: transverse_residual(k, w, k0, eps1, eps2, p, wall)  # noqa: E731
    f_lo, f_hi = res(lo), res(hi)
    if not (f_lo < 0.0 < f_hi):
        raise BelowCutoff(f"p={p}: no transverse root below V for w={w:g} m")
    scale = p * math.pi / w
    while hi - lo > 1e-12 * scale:
        mid = 0.5 * (lo + hi)
        fm = res(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    k = _newton_polish(k, res, lo - 1e-9 * scale, hi + 1e-9 * scale)
    gamma = math.sqrt(max(k0 * k0 * (eps1 - eps2) - k * k, 0.0))
    return k, gamma


def _newton_polish(k, res, lo, hi, steps=3):
    fk = res(k)
    for _ in range(steps):
        h = 1e-7 * max(abs(k), 1.0)
        d = (res(k + h) - res(k - h)) / (2 * h)
        if d <= 0.0:
            break
        k_new = k - fk / d
        if not (lo <= k_new <= hi):
            break
        f_new = res(k_new)
        if abs(f_new) >= abs(fk):
            break
        k, fk = k_new, f_new
    return k


def solve_marcatili(cs: CrossSection, f: float, family: Family | str = Family.Ex, p: int = 1, q: int = 1) -> MarcatiliMode:
    if f <= 0:
        raise InvalidGeometry("frequency must be positive")
    family = Family(family)
    k0 = k0_of(f)
    e1, e2 = cs.core.eps_r, cs.clad.eps_r
    wall_x, wall_y = walls_for(family)
    kx, gx = solve_transverse(cs.a, k0, e1, e2, p, wall_x)
    ky, gy = solve_transverse(cs.b, k0, e1, e2, q, wall_y)
    beta2 = k0 * k0 * e1 - kx * kx - ky * ky
    if beta2 <= k0 * k0 * (e2 + GUIDED_MARGIN):
        raise BelowCutoff(f"{family.value}_{p}{q} is below cutoff at {f / 1e9:g} GHz")
    beta = math.sqrt(beta2)
    return MarcatiliMode(family, p, q, kx, ky, gx, gy, beta, beta / k0, f, e1, e2, cs.a, cs.b)


def guided_marcatili_modes(cs: CrossSection, f: float, max_index: int = 12) -> list[MarcatiliMode]:
    """All guided (family, p, q) solutions with indices up to ``max_index``, by descending neff."""
    out = []
    for fam in Family:
        for p in range(1, max_index + 1):
            before = len(out)
            for q in range(1, max_index + 1):
                try:
                    out.append(solve_marcatili(cs, f, fam, p, q))
                except BelowCutoff:
                    break  # higher q only moves further below cutoff
            if len(out) == before:
                break
    out.sort(key=lambda m: -m.neff)
    return out


def _axis_profile(u: float, w: float, k: float, gamma: float, p: int, jump: float) -> float:
    """In-core cos/sin profile along one axis, with exponential tails outside."""
    half = w / 2
    phase = (p - 1) * math.pi / 2
    if abs(u) <= half:
        return math.cos(k * u - phase)
    edge = math.copysign(half, u)
    return jump * math.cos(k * edge - phase) * math.exp(-gamma * (abs(u) - half))


def wall_jump(mode: MarcatiliMode, axis: str) -> float:
    """Ratio outside/inside of the dominant E at a wall normal to ``axis``."""
    wall = mode.walls[0 if axis == "x" else 1]
    return mode.eps_core / mode.eps_clad if wall is Wall.TM_like else 1.0


def marcatili_field_at(mode: MarcatiliMode, x: float, y: float) -> float:
    """Dominant transverse E of the separable field, scaled so the in-core peak is 1.

    Where the dominant E is normal to a wall, the outside value carries the
    ``eps_core / eps_clad`` jump of the normal component.
    """
    fx = _axis_profile(x, mode.a, mode.kx, mode.gamma_x, mode.p, wall_jump(mode, "x"))
    fy = _axis_profile(y, mode.b, mode.ky, mode.gamma_y, mode.q, wall_jump(mode, "y"))
    return fx * fy
