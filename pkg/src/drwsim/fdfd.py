"""Full-vector finite-difference eigenmode solver on the staggered grid.

Fields vary as ``exp(j(omega t - beta z))``.  The eigenproblem acts on the
transverse pair ``(Ex, Ey)``::

    beta^2 e = ( k0^2 eps_t
               + [-Dy_hn; Dx_hn] [-Dy_nh, Dx_nh]
               + [Dx_nh; Dy_nh] eps_z^-1 [Dx_hn eps_x, Dy_hn eps_y] ) e

``D*_nh`` differentiate from node to half positions and ``D*_hn`` back.
The remaining components follow from the curl equations and from
``div(eps E) = 0``.  The outer box is a perfect electric conductor: E
tangential to it is pinned to zero by masking rows and columns, which only
adds harmless zero eigenvalues far from the shift.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridTooCoarse, IncompatibleGrids, NoGuidedMode
from .model import (
    MU0,
    CrossSection,
    Grid2D,
    build_grid,
    core_wavelength,
    k0_of,
)

COMPONENTS = ("Ex", "Ey", "Ez", "Hx", "Hy", "Hz")
MIN_CELLS_PER_WAVELENGTH = 20
SHIFT_FRACTION = 0.99
GUIDED_MARGIN = 1e-6
DEFAULT_THETA = 0.02
_V0_SEED = 20240229


class ModeLabel(enum.Enum):
    TEM = "TEM"
    TE = "TE"
    TM = "TM"
    LSE = "LSE"
    LSM = "LSM"
    HEM = "HEM"


@dataclass(frozen=True)
class ModeClass:
    label: ModeLabel
    rho_x: float
    sigma_x: float
    ez_fraction: float = 0.0
    hz_fraction: float = 0.0

    @property
    def minor_e_fraction(self) -> float:
        return min(self.rho_x, 1.0 - self.rho_x)


@dataclass(frozen=True, eq=False)
class ModeSolution:
    f: float
    beta: complex
    fields: dict
    grid: Grid2D
    power: float = 1.0
    mode_class: ModeClass | None = field(default=None)

    @property
    def k0(self) -> float:
        return k0_of(self.f)

    @property
    def neff(self) -> float:
        return float(np.real(self.beta)) / self.k0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.fields[name]


# ---------------------------------------------------------------- operators

def _axis_ops(edges: np.ndarray):
    """1-D node->half and half->node derivative matrices plus quadrature weights.

    Node ``i`` sits at ``edges[i]`` (node 0 is the wall, node ``n`` is the
    opposite wall and is not stored); half ``i`` sits at the center of cell ``i``.
    """
    d = np.diff(edges)
    n = d.size
    h = np.empty(n)
    h[0] = d[0] / 2
    h[1:] = 0.5 * (d[:-1] + d[1:])
    nh = sp.diags([-1.0 / d, 1.0 / d[:-1]], [0, 1], shape=(n, n), format="csr")
    hn_h = h.copy()
    hn_h[0] = d[0]
    hn = sp.diags([1.0 / hn_h, -1.0 / hn_h[1:]], [0, -1], shape=(n, n), format="csr")
    return nh, hn, d, h


@dataclass(frozen=True, eq=False)
class Operators:
    Dx_nh: sp.csr_matrix
    Dx_hn: sp.csr_matrix
    Dy_nh: sp.csr_matrix
    Dy_hn: sp.csr_matrix
    eps_x: np.ndarray
    eps_y: np.ndarray
    eps_z: np.ndarray
    mask_x: np.ndarray
    mask_y: np.ndarray
    mask_z: np.ndarray
    w_x: np.ndarray  # quadrature weight at Ex / Hy positions
    w_y: np.ndarray  # at Ey / Hx positions
    w_z: np.ndarray  # at Ez positions
    w_c: np.ndarray  # at Hz positions (cell centers)


def _staggered_eps(grid: Grid2D, eps: np.ndarray):
    dx, dy = grid.dx, grid.dy
    # Ex: x half, y node -> average over the two cells sharing the horizontal edge.
    below = np.concatenate([eps[:, :1], eps[:, :-1]], axis=1)
    wyb = np.concatenate([dy[:1], dy[:-1]])
    eps_x = (below * wyb + eps * dy) / (wyb + dy)
    left = np.concatenate([eps[:1, :], eps[:-1, :]], axis=0)
    wxl = np.concatenate([dx[:1], dx[:-1]])[:, None]
    eps_y = (left * wxl + eps * dx[:, None]) / (wxl + dx[:, None])
    corner = np.concatenate([left[:, :1], left[:, :-1]], axis=1)
    area = np.outer(dx, dy)
    area_l = np.concatenate([area[:1, :], area[:-1, :]], axis=0)
    area_b = np.concatenate([area[:, :1], area[:, :-1]], axis=1)
    area_c = np.concatenate([area_l[:, :1], area_l[:, :-1]], axis=1)
    eps_z = (eps * area + left * area_l + below * area_b + corner * area_c) / (area + area_l + area_b + area_c)
    return eps_x, eps_y, eps_z


def build_operators(grid: Grid2D, eps: np.ndarray | None = None) -> Operators:
    eps = grid.eps if eps is None else eps
    nx_nh, nx_hn, dx, hx = _axis_ops(grid.x_edges)
    ny_nh, ny_hn, dy, hy = _axis_ops(grid.y_edges)
    Ix, Iy = sp.identity(grid.nx, format="csr"), sp.identity(grid.ny, format="csr")
    eps_x, eps_y, eps_z = _staggered_eps(grid, eps)
    mask_x = np.ones(grid.shape)
    mask_x[:, 0] = 0.0
    mask_y = np.ones(grid.shape)
    mask_y[0, :] = 0.0
    mask_z = mask_x * mask_y
    return Operators(
        Dx_nh=sp.kron(nx_nh, Iy, format="csr"),
        Dx_hn=sp.kron(nx_hn, Iy, format="csr"),
        Dy_nh=sp.kron(Ix, ny_nh, format="csr"),
        Dy_hn=sp.kron(Ix, ny_hn, format="csr"),
        eps_x=eps_x, eps_y=eps_y, eps_z=eps_z,
        mask_x=mask_x, mask_y=mask_y, mask_z=mask_z,
        w_x=np.outer(dx, hy), w_y=np.outer(hx, dy), w_z=np.outer(hx, hy), w_c=np.outer(dx, dy),
    )


def _core_eps(grid: Grid2D) -> float:
    if grid.blocks:
        return max(float(np.real(b.eps)) for b in grid.blocks)
    return float(np.max(grid.eps))


def check_sampling(grid: Grid2D, f: float, cells_per_wavelength: int = MIN_CELLS_PER_WAVELENGTH):
    lam = core_wavelength(_core_eps(grid), f)
    if grid.max_cell > lam / cells_per_wavelength * (1 + 1e-9):
        raise GridTooCoarse(
            f"cell size {grid.max_cell * 1e6:.3g} um exceeds lambda_core/{cells_per_wavelength}"
            f" = {lam / cells_per_wavelength * 1e6:.3g} um at {f / 1e9:g} GHz"
        )


def assemble_eigenproblem(grid: Grid2D, f: float, *, lossy: bool = False, check: bool = True):
    """Sparse operator whose eigenvalues are ``beta**2``.

    Returns ``(A, ops)``; ``A`` has shape ``(2 nx ny, 2 nx ny)`` and acts on
    ``[Ex.ravel(), Ey.ravel()]``.  With ``lossy`` the per-cell loss tangents
    enter as a complex permittivity.
    """
    if check:
        check_sampling(grid, f)
    eps = grid.complex_eps if lossy else grid.eps
    ops = build_operators(grid, eps)
    k0 = k0_of(f)
    ex, ey, ez = (v.ravel() for v in (ops.eps_x, ops.eps_y, ops.eps_z))
    P = sp.diags(np.concatenate([ops.mask_x.ravel(), ops.mask_y.ravel()]))
    inv_ez = sp.diags(ops.mask_z.ravel() / ez)
    curl_t = sp.vstack([-ops.Dy_hn, ops.Dx_hn]) @ sp.hstack([-ops.Dy_nh, ops.Dx_nh])
    grad_div = sp.vstack([ops.Dx_nh, ops.Dy_nh]) @ inv_ez @ sp.hstack(
        [ops.Dx_hn @ sp.diags(ex), ops.Dy_hn @ sp.diags(ey)]
    )
    A = k0 * k0 * sp.diags(np.concatenate([ex, ey])) + curl_t + grad_div
    A = (P @ A @ P).tocsc()
    return A, ops


# ------------------------------------------------------------------ fields

def recover_fields(ops: Operators, shape, e: np.ndarray, beta: complex, f: float) -> dict:
    n = shape[0] * shape[1]
    Ex = e[:n] * ops.mask_x.ravel()
    Ey = e[n:] * ops.mask_y.ravel()
    omega = 2 * math.pi * f
    jb = 1j * beta
    div = ops.Dx_hn @ (ops.eps_x.ravel() * Ex) + ops.Dy_hn @ (ops.eps_y.ravel() * Ey)
    Ez = ops.mask_z.ravel() * div / (jb * ops.eps_z.ravel())
    c = -1j * omega * MU0
    Hx = (ops.Dy_nh @ Ez + jb * Ey) / c
    Hy = (-jb * Ex - ops.Dx_nh @ Ez) / c
    Hz = (ops.Dx_nh @ Ey - ops.Dy_nh @ Ex) / c
    return {k: np.asarray(v, dtype=complex).reshape(shape) for k, v in zip(COMPONENTS, (Ex, Ey, Ez, Hx, Hy, Hz))}


_WEIGHT = {"Ex": "w_x", "Hy": "w_x", "Ey": "w_y", "Hx": "w_y", "Ez": "w_z", "Hz": "w_c"}


def weights(grid: Grid2D) -> dict:
    ops = _weights_only(grid)
    return {k: ops[v] for k, v in _WEIGHT.items()}


def _weights_only(grid: Grid2D) -> dict:
    dx, dy = grid.dx, grid.dy
    hx = np.concatenate([dx[:1] / 2, 0.5 * (dx[:-1] + dx[1:])])
    hy = np.concatenate([dy[:1] / 2, 0.5 * (dy[:-1] + dy[1:])])
    return {"w_x": np.outer(dx, hy), "w_y": np.outer(hx, dy), "w_z": np.outer(hx, hy), "w_c": np.outer(dx, dy)}


def cross_integral(e_fields: dict, h_fields: dict, grid: Grid2D) -> complex:
    """``integral (E x H) . z dA`` without conjugation."""
    w = _weights_only(grid)
    return complex(
        np.sum(w["w_x"] * e_fields["Ex"] * h_fields["Hy"]) - np.sum(w["w_y"] * e_fields["Ey"] * h_fields["Hx"])
    )


def axial_power(fields: dict, grid: Grid2D) -> float:
    h_conj = {k: np.conj(v) for k, v in fields.items()}
    return 0.5 * float(np.real(cross_integral(fields, h_conj, grid)))


def component_energy(fields: dict, grid: Grid2D) -> dict:
    w = weights(grid)
    return {k: float(np.sum(w[k] * np.abs(fields[k]) ** 2)) for k in COMPONENTS}


def _sign_reference(fields: dict, grid: Grid2D) -> complex:
    """Projection on a fixed asymmetric weight, used to pin the mode phase.

    The weight is scaled by the mode's own RMS extent so the same physical
    mode gets the same sign on differently padded grids.
    """
    w = _weights_only(grid)
    xc, yn = grid.x_centers[:, None], grid.y_edges[:-1][None, :]
    xn, yc = grid.x_edges[:-1][:, None], grid.y_centers[None, :]
    px = w["w_x"] * np.abs(fields["Ex"]) ** 2
    py = w["w_y"] * np.abs(fields["Ey"]) ** 2
    tot = px.sum() + py.sum()
    sx = math.sqrt((np.sum(px * xc**2) + np.sum(py * xn**2)) / tot)
    sy = math.sqrt((np.sum(px * yn**2) + np.sum(py * yc**2)) / tot)

    def g(x, y):
        u, v = x / sx, y / sy
        return (1 + 0.37 * u) * (1 + 0.61 * v) * (1 + 0.23 * u * v)

    return complex(np.sum(w["w_x"] * g(xc, yn) * fields["Ex"]) + np.sum(w["w_y"] * g(xn, yc) * fields["Ey"]))


def normalize_fields(fields: dict, grid: Grid2D) -> dict:
    """Scale to unit axial power and rotate the phase so the sign reference is real positive."""
    p = axial_power(fields, grid)
    scale = 1.0 / math.sqrt(abs(p))
    ref = _sign_reference(fields, grid)
    if abs(ref) > 0:
        scale *= abs(ref) / ref
    return {k: v * scale for k, v in fields.items()}


# ------------------------------------------------------------------ solving

def _eigs(A, k: int, sigma: float):
    n = A.shape[0]
    v0 = np.random.default_rng(_V0_SEED).standard_normal(n)
    if np.iscomplexobj(A.data):
        v0 = v0.astype(complex)
    k = min(k, n - 2)
    vals, vecs = spla.eigs(A, k=k, sigma=sigma, v0=v0, which="LM", tol=1e-12, maxiter=20 * n)
    return vals, vecs


def _order_key(neff: float, rho_x: float):
    return (-float(f"{neff:.10g}"), -rho_x)


def solve_grid_modes(
    grid: Grid2D,
    f: float,
    n_modes: int,
    *,
    theta: float = DEFAULT_THETA,
    lossy: bool = False,
    check: bool = True,
    extra: int = 4,
) -> list[ModeSolution]:
    """Guided modes of an already discretized cross-section, by descending neff."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    A, ops = assemble_eigenproblem(grid, f, lossy=lossy, check=check)
    k0 = k0_of(f)
    sigma = k0 * k0 * SHIFT_FRACTION * float(np.max(grid.eps))
    vals, vecs = _eigs(A, n_modes + extra, sigma)
    threshold = k0 * k0 * (grid.eps_background + GUIDED_MARGIN)
    out = []
    for lam, vec in zip(vals, vecs.T):
        if not np.real(lam) > threshold:
            continue
        beta = np.sqrt(lam if lossy else complex(np.real(lam)))
        if not lossy:
            vec = np.real(vec)
        else:
            beta = complex(beta.real, -abs(beta.imag))
        fields = recover_fields(ops, grid.shape, vec, beta, f)
        fields = normalize_fields(fields, grid)
        ms = ModeSolution(f=f, beta=complex(beta), fields=fields, grid=grid, power=axial_power(fields, grid))
        out.append(replace(ms, mode_class=classify_mode(ms, theta)))
    if not out:
        raise NoGuidedMode(f"no guided mode at {f / 1e9:g} GHz")
    out.sort(key=lambda m: _order_key(m.neff, m.mode_class.rho_x))
    return out[:n_modes]


def solve_modes(
    cs: CrossSection,
    f: float,
    n_modes: int = 1,
    *,
    cells_per_wavelength: int = MIN_CELLS_PER_WAVELENGTH,
    grid: Grid2D | None = None,
    theta: float = DEFAULT_THETA,
) -> list[ModeSolution]:
    if grid is None:
        grid = build_grid(cs.lossless(), f, cells_per_wavelength)
    return solve_grid_modes(grid, f, n_modes, theta=theta)


# ---------------------------------------------------------- classification

def classify_fields(fields: dict, grid: Grid2D, theta: float = DEFAULT_THETA) -> ModeClass:
    en = component_energy(fields, grid)
    e_t = en["Ex"] + en["Ey"]
    h_t = en["Hx"] + en["Hy"]
    rho_x = en["Ex"] / e_t if e_t > 0 else 0.0
    sigma_x = en["Hx"] / h_t if h_t > 0 else 0.0
    e_tot = e_t + en["Ez"]
    h_tot = h_t + en["Hz"]
    ez = en["Ez"] / e_tot if e_tot > 0 else 0.0
    hz = en["Hz"] / h_tot if h_tot > 0 else 0.0
    no_ez, no_hz = ez < theta, hz < theta
    if no_ez and no_hz:
        label = ModeLabel.TEM
    elif no_ez:
        label = ModeLabel.TE
    elif no_hz:
        label = ModeLabel.TM
    elif min(rho_x, 1 - rho_x) < theta:
        label = ModeLabel.LSE
    elif min(sigma_x, 1 - sigma_x) < theta:
        label = ModeLabel.LSM
    else:
        label = ModeLabel.HEM
    return ModeClass(label, rho_x, sigma_x, ez, hz)


def classify_mode(ms: ModeSolution, theta: float = DEFAULT_THETA) -> ModeClass:
    """Table-style classification from component energy fractions.

    Axial components below ``theta`` of their field's energy count as absent
    (TEM/TE/TM); otherwise a transverse E component below ``theta`` makes the
    mode LSE, the same test on H makes it LSM, and anything else is HEM.
    """
    return classify_fields(ms.fields, ms.grid, theta)


# ----------------------------------------------------------------- overlaps

def _require_same_grid(m1: ModeSolution, m2: ModeSolution):
    if not m1.grid.same_as(m2.grid):
        raise IncompatibleGrids("modes live on different grids")


def mode_overlap(m1: ModeSolution, m2: ModeSolution) -> complex:
    """``(1/4) integral (E1 x H2* + E2* x H1) . z dA``; equals 1 for a unit-power mode with itself."""
    _require_same_grid(m1, m2)
    g = m1.grid
    h2c = {k: np.conj(v) for k, v in m2.fields.items()}
    e2c = {k: np.conj(v) for k, v in m2.fields.items()}
    return 0.25 * (cross_integral(m1.fields, h2c, g) + cross_integral(e2c, m1.fields, g))


def bilinear_overlap(m_e: ModeSolution, m_h: ModeSolution) -> complex:
    """Unconjugated ``(1/2) integral (E_a x H_b) . z dA`` used by mode matching."""
    _require_same_grid(m_e, m_h)
    return 0.5 * cross_integral(m_e.fields, m_h.fields, m_e.grid)


def overlap_matrix(left: list[ModeSolution], right: list[ModeSolution]) -> np.ndarray:
    """``O[i, j] = <E_left_i, H_right_j>`` (unconjugated, halved)."""
    return np.array([[bilinear_overlap(a, b) for b in right] for a in left], dtype=complex)


def field_centroid(ms: ModeSolution) -> tuple[float, float]:
    """Centroid of the transverse electric energy density."""
    g = ms.grid
    w = weights(g)
    ex = w["Ex"] * np.abs(ms["Ex"]) ** 2
    ey = w["Ey"] * np.abs(ms["Ey"]) ** 2
    xc, xn = g.x_centers, g.x_edges[:-1]
    yc, yn = g.y_centers, g.y_edges[:-1]
    tot = ex.sum() + ey.sum()
    xbar = (np.sum(ex * xc[:, None]) + np.sum(ey * xn[:, None])) / tot
    ybar = (np.sum(ex * yn[None, :]) + np.sum(ey * yc[None, :])) / tot
    return float(xbar), float(ybar)
