"""Butt-junction mode matching and Redheffer star products."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fdfd import ModeSolution, overlap_matrix


@dataclass(frozen=True, eq=False)
class ScatteringBlock:
    """Scattering matrix with ``n_left`` ports on the left and ``n_right`` on the right."""

    s: np.ndarray
    n_left: int
    n_right: int
    truncated: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def s11(self):
        return self.s[: self.n_left, : self.n_left]

    @property
    def s12(self):
        return self.s[: self.n_left, self.n_left:]

    @property
    def s21(self):
        return self.s[self.n_left:, : self.n_left]

    @property
    def s22(self):
        return self.s[self.n_left:, self.n_left:]

    @classmethod
    def from_blocks(cls, s11, s12, s21, s22, truncated=None) -> "ScatteringBlock":
        s = np.block([[s11, s12], [s21, s22]])
        return cls(s, s11.shape[0], s22.shape[0], np.zeros(0) if truncated is None else truncated)


def propagation(beta: np.ndarray, length: float, alpha: np.ndarray | None = None) -> ScatteringBlock:
    """Uniform section: each mode picks up ``exp(-(alpha + j beta) L)``, no reflection."""
    beta = np.asarray(beta, dtype=float)
    gamma = 1j * beta if alpha is None else np.asarray(alpha) + 1j * beta
    t = np.diag(np.exp(-gamma * length))
    z = np.zeros_like(t)
    return ScatteringBlock.from_blocks(z, t, t, z)


def identity_block(n: int) -> ScatteringBlock:
    return propagation(np.zeros(n), 0.0)


def star(a: ScatteringBlock, b: ScatteringBlock) -> ScatteringBlock:
    """Redheffer star product: ``a`` on the left, ``b`` on the right."""
    if a.n_right != b.n_left:
        raise ValueError(f"port mismatch: {a.n_right} != {b.n_left}")
    n = a.n_right
    eye = np.eye(n)
    m1 = np.linalg.solve(eye - b.s11 @ a.s22, b.s11)  # (I - B11 A22)^-1 B11
    m2 = np.linalg.solve(eye - a.s22 @ b.s11, a.s21)  # (I - A22 B11)^-1 A21
    m3 = np.linalg.solve(eye - b.s11 @ a.s22, b.s12)
    m4 = np.linalg.solve(eye - a.s22 @ b.s11, a.s22)
    s11 = a.s11 + a.s12 @ m1 @ a.s21
    s12 = a.s12 @ m3
    s21 = b.s21 @ m2
    s22 = b.s22 + b.s21 @ m4 @ b.s12
    trunc = np.concatenate([a.truncated, b.truncated])
    return ScatteringBlock.from_blocks(s11, s12, s21, s22, trunc)


def cascade_blocks(blocks) -> ScatteringBlock:
    blocks = list(blocks)
    out = blocks[0]
    for blk in blocks[1:]:
        out = star(out, blk)
    return out


def enforce_physical(s: np.ndarray) -> np.ndarray:
    """Nearest reciprocal matrix with singular values clipped to 1.

    Symmetrizing first and clipping in the SVD keeps the result symmetric up
    to roundoff; the final average removes that roundoff without raising the
    norm (a mean of two contractions is a contraction).
    """
    s = 0.5 * (s + s.T)
    u, sv, vh = np.linalg.svd(s)
    s = (u * np.minimum(sv, 1.0)) @ vh
    return 0.5 * (s + s.T)


def junction_scattering(left: list[ModeSolution], right: list[ModeSolution]) -> ScatteringBlock:
    """Mode-matched butt junction between two truncated guided bases on one grid.

    Continuity of transverse E and H is tested against the incident side's
    modes and solved in the least-squares sense; the raw matrix is then made
    reciprocal and passive by :func:`enforce_physical`.  ``truncated`` holds,
    for each port, the incident power not accounted for by the kept modes.
    """
    nl, nr = len(left), len(right)
    o_lr = overlap_matrix(left, right)   # <E_L i, H_R k>
    o_rl = overlap_matrix(right, left)   # <E_R k, H_L i>
    t_lr, r_ll = _match(o_rl.T, o_lr)
    t_rl, r_rr = _match(o_lr.T, o_rl)
    raw = np.block([[r_ll, t_rl], [t_lr, r_rr]])
    s = enforce_physical(raw)
    lost = 1.0 - np.sum(np.abs(s) ** 2, axis=0)
    return ScatteringBlock(s, nl, nr, np.maximum(lost, 0.0))


def _match(q: np.ndarray, o: np.ndarray):
    """Solve ``a + r = Q t`` and ``a - r = O t`` for every unit incidence ``a``."""
    n_in = q.shape[0]
    t = 2.0 * np.linalg.pinv(q + o) @ np.eye(n_in)
    r = q @ t - np.eye(n_in)
    return t, r
