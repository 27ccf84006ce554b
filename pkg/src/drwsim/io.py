"""Touchstone and CSV export."""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import SParameterSet
from .fdfd import COMPONENTS, ModeSolution

TOUCHSTONE_HEADER = "# GHz S RI R 50"


def fmt(v) -> str:
    """Shortest round-trip decimal for a real number."""
    return repr(float(v))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _order(n_ports: int):
    if n_ports == 1:
        return [(0, 0)]
    if n_ports == 2:
        return [(0, 0), (1, 0), (0, 1), (1, 1)]
    raise ValueError("only 1- and 2-port sets are supported")


def export_touchstone(sp: SParameterSet, path, comments: Sequence[str] = ()) -> Path:
    """Write a Touchstone v1.1 file (frequencies in GHz, real/imaginary pairs).

    The 50 ohm tag is nominal: the waves are power-normalized modal waves.
    """
    order = _order(sp.n_ports)
    idx = np.argsort(sp.frequencies, kind="stable")
    lines = [f"! {c}" for c in comments]
    lines.append("! waves are power-normalized modal amplitudes; the 50 ohm reference is nominal")
    lines.append(TOUCHSTONE_HEADER)
    for i in idx:
        vals = [fmt(sp.frequencies[i] / 1e9)]
        for r, c in order:
            z = sp.s[i, r, c]
            vals += [fmt(z.real), fmt(z.imag)]
        lines.append(" ".join(vals))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def read_touchstone(path, n_ports: int | None = None) -> SParameterSet:
    """Read RI, MA or DB formatted 1- or 2-port Touchstone v1 files."""
    path = Path(path)
    if n_ports is None:
        suffix = path.suffix.lower()
        n_ports = 1 if suffix == ".s1p" else 2
    scale, fmt_kind, z0 = 1e9, "MA", 50.0
    comments, data = [], []
    for raw in path.read_text().splitlines():
        line, _, comment = raw.partition("!")
        if comment and not line.strip():
            comments.append(comment.strip())
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].upper().split()
            for j, t in enumerate(tok):
                if t in _SCALE:
                    scale = _SCALE[t]
                elif t in ("RI", "MA", "DB"):
                    fmt_kind = t
                elif t == "R":
                    z0 = float(tok[j + 1])
            continue
        data.extend(float(v) for v in line.split())
    width = 1 + 2 * n_ports * n_ports
    if len(data) % width:
        raise ValueError(f"{path}: {len(data)} numbers do not fill rows of {width}")
    arr = np.array(data).reshape(-1, width)
    f = arr[:, 0] * scale
    a, b = arr[:, 1::2], arr[:, 2::2]
    if fmt_kind == "RI":
        z = a + 1j * b
    else:
        mag = a if fmt_kind == "MA" else 10.0 ** (a / 20.0)
        z = mag * np.exp(1j * np.deg2rad(b))
    s = np.zeros((f.size, n_ports, n_ports), dtype=complex)
    for k, (r, c) in enumerate(_order(n_ports)):
        s[:, r, c] = z[:, k]
    return SParameterSet(f, s, z0, {"comments": comments})


def _interp_axis(values: np.ndarray, pos: np.ndarray, target: np.ndarray, axis: int) -> np.ndarray:
    if np.array_equal(pos, target):
        return values
    moved = np.moveaxis(values, axis, 0)
    out = np.empty((target.size,) + moved.shape[1:], dtype=complex)
    flat = moved.reshape(moved.shape[0], -1)
    res = out.reshape(target.size, -1)
    for j in range(flat.shape[1]):
        res[:, j] = np.interp(target, pos, flat[:, j].real) + 1j * np.interp(target, pos, flat[:, j].imag)
    return np.moveaxis(out, 0, axis)


# (x position, y position) of each stored component: "c" cell center, "n" node
_STAGGER = {"Ex": "cn", "Ey": "nc", "Ez": "nn", "Hx": "nc", "Hy": "cn", "Hz": "cc"}


def fields_at_nodes(ms: ModeSolution) -> dict:
    """All six components linearly interpolated onto the grid nodes ``x_edges[:-1] x y_edges[:-1]``."""
    g = ms.grid
    xn, yn = g.x_edges[:-1], g.y_edges[:-1]
    pos = {"c": (g.x_centers, g.y_centers), "n": (xn, yn)}
    out = {}
    for comp in COMPONENTS:
        sx, sy = _STAGGER[comp]
        v = np.asarray(ms[comp], dtype=complex)
        v = _interp_axis(v, pos[sx][0], xn, 0)
        v = _interp_axis(v, pos[sy][1], yn, 1)
        out[comp] = v
    return out


def export_field_csv(ms: ModeSolution, path) -> Path:
    """One row per grid node (x outer, y inner) with every component and ``abs_E``."""
    g = ms.grid
    nodes = fields_at_nodes(ms)
    header = ["x_um", "y_um"]
    for c in COMPONENTS:
        header += [f"re_{c}", f"im_{c}"]
    header.append("abs_E")
    abs_e = np.sqrt(sum(np.abs(nodes[c]) ** 2 for c in ("Ex", "Ey", "Ez")))
    xn, yn = g.x_edges[:-1] * 1e6, g.y_edges[:-1] * 1e6

    def rows():
        for i in range(g.nx):
            for j in range(g.ny):
                row = [xn[i], yn[j]]
                for c in COMPONENTS:
                    z = nodes[c][i, j]
                    row += [z.real, z.imag]
                row.append(abs_e[i, j])
                yield row

    return write_csv(path, header, rows())


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path
