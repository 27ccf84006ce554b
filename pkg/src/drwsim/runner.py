"""Scenario execution: module pipelines, artifact writing and the run manifest."""

from __future__ import annotations

import hashlib
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bend import BendPlane, BendSpec, bend_loss_90, bend_mode_conversion, bend_modes, centerline_radius
from .channel import dispersion_profile, fundamental_modes, loss_table, np_per_m_to_db_per_mm, straight_channel
from .config import ScenarioConfig
from .crosstalk import ParallelPair, fext, fit_log_kappa
from .errors import StageError
from .fdfd import solve_modes
from .io import atomic_write_text, export_field_csv, export_touchstone, fmt, write_csv
from .parallel import map_ordered
from .taper import cascade, end_to_end_link, launch_cross_section, make_linear_taper

MANIFEST_NAME = "manifest.json"
DEFAULT_N_MODES = {"modes": 3, "bend-sweep": 6, "taper": 5, "link": 5}


@dataclass
class RunManifest:
    config_hash: str
    scenario: str
    artifacts: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    version: str = __version__
    timings: dict = field(default_factory=dict)
    status: str = "ok"
    error: dict | None = None

    def to_json(self) -> str:
        doc = {
            "config_hash": self.config_hash,
            "scenario": self.scenario,
            "version": self.version,
            "status": self.status,
            "settings": self.settings,
            "artifacts": self.artifacts,
            "timings_s": self.timings,
        }
        if self.error:
            doc["error"] = self.error
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Run:
    def __init__(self, cfg: ScenarioConfig, out: Path, workers: int, seed_metadata: bool):
        self.cfg = cfg
        self.out = out
        self.workers = workers
        self.seed_metadata = seed_metadata
        self.manifest = RunManifest(cfg.digest(), cfg.scenario)
        self.manifest.settings = {
            "cells_per_wavelength": cfg.cells_per_wavelength,
            "n_modes": n_modes_for(cfg),
            "theta": cfg.theta,
            "band_ghz": [cfg.band_start_ghz, cfg.band_stop_ghz, cfg.band_points],
            "sweep": {"variable": cfg.sweep_variable, "values": list(cfg.sweep_values)},
        }
        if not seed_metadata:
            self.manifest.settings["workers"] = workers

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        except Exception as exc:
            self.manifest.status = "error"
            self.manifest.error = {"stage": name, "type": type(exc).__name__, "message": str(exc)}
            raise StageError(name, exc) from exc
        finally:
            if not self.seed_metadata:
                self.manifest.timings[name] = round(time.perf_counter() - t0, 6)

    def add(self, path: Path) -> Path:
        self.manifest.artifacts.append(
            {"path": path.name, "bytes": path.stat().st_size, "sha256": _sha256(path)}
        )
        return path

    def touchstone(self, sp, name: str):
        return self.add(export_touchstone(sp, self.out / name, [f"config sha256 {self.manifest.config_hash}"]))

    def csv(self, name, header, rows):
        return self.add(write_csv(self.out / name, header, rows))

    def finish(self):
        atomic_write_text(self.out / MANIFEST_NAME, self.manifest.to_json())


def n_modes_for(cfg: ScenarioConfig) -> int:
    return cfg.n_modes if cfg.n_modes is not None else DEFAULT_N_MODES.get(cfg.scenario, 1)


def _tag(v) -> str:
    return fmt(v) if isinstance(v, float) else str(v)


def _ghz(f) -> float:
    return float(f) / 1e9


def run_scenario(
    cfg: ScenarioConfig,
    out_dir=None,
    *,
    workers: int | None = None,
    seed_metadata: bool = False,
) -> RunManifest:
    """Run ``cfg``, write its artifacts and ``manifest.json`` into ``out_dir``.

    A failing stage is recorded in the manifest and re-raised as
    :class:`StageError`.
    """
    out = Path(out_dir or cfg.output_directory or ".")
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, out, workers or cfg.workers, seed_metadata)
    try:
        _PIPELINES[cfg.scenario](run)
    finally:
        run.finish()
    return run.manifest


# --------------------------------------------------------------- pipelines

def _modes(run: _Run):
    cfg = run.cfg
    cs = cfg.cross_section
    n = n_modes_for(cfg)
    with run.stage("solve"):
        found = map_ordered(_solve_modes_point, [(cs, f, n, cfg.cells_per_wavelength, cfg.theta) for f in cfg.band], run.workers)
    with run.stage("export"):
        rows = []
        for f, modes in zip(cfg.band, found):
            for i, m in enumerate(modes):
                mc = m.mode_class
                rows.append([_ghz(f), i, m.neff, float(np.real(m.beta)), mc.label.value,
                             mc.rho_x, mc.sigma_x, mc.minor_e_fraction, mc.ez_fraction, mc.hz_fraction])
                run.add(export_field_csv(m, run.out / f"field_{_tag(_ghz(f))}GHz_mode{i}.csv"))
        run.csv("modes.csv", ["f_GHz", "index", "neff", "beta_per_m", "label", "rho_x", "sigma_x",
                              "minor_e_fraction", "ez_fraction", "hz_fraction"], rows)


def _solve_modes_point(args):
    cs, f, n, cpw, theta = args
    return solve_modes(cs, f, n, cells_per_wavelength=cpw, theta=theta)


def _straight(run: _Run):
    cfg = run.cfg
    f = cfg.band.array
    base = cfg.cross_section
    with run.stage("solve"):
        modes = fundamental_modes(base, f, cfg.cells_per_wavelength, run.workers)
    var = cfg.sweep_variable or "tan_delta"
    shown_values = cfg.sweep_values if cfg.sweep_variable else (cfg.effective_tan_delta,)
    rows = []
    with run.stage("channel"):
        for shown in shown_values:
            td, length = (shown, cfg.length_um / 1e6) if var == "tan_delta" else (cfg.effective_tan_delta, shown / 1e6)
            sp = straight_channel(length, base.with_tan_delta(td), f, modes=modes)
            run.touchstone(sp, f"straight_{var}_{_tag(shown)}.s2p")
            for k, fk in enumerate(f):
                rows.append([shown, _ghz(fk), float(sp.notes["beta"][k]) / modes[k].k0,
                             np_per_m_to_db_per_mm(float(sp.notes["alpha"][k])), float(sp.db(2, 1)[k])])
        head = "length_um" if var == "length" else "tan_delta"
        run.csv("straight.csv", [head, "f_GHz", "neff", "alpha_dB_per_mm", "s21_dB"], rows)
    if f.size >= 5:
        with run.stage("dispersion"):
            prof = dispersion_profile(base, f, cells_per_wavelength=cfg.cells_per_wavelength, workers=run.workers)
            run.csv("dispersion.csv", ["f_GHz", "beta_per_m", "group_index", "beta2_s2_per_m", "one_sided"],
                    [[_ghz(a), b, c, d, int(e)] for a, b, c, d, e in
                     zip(prof.frequencies, prof.beta, prof.group_index, prof.beta2, prof.one_sided)])


def _loss_table(run: _Run):
    cfg = run.cfg
    f = cfg.band.array
    with run.stage("loss-table"):
        table = loss_table(cfg.cross_section, f, cfg.sweep_si, cells_per_wavelength=cfg.cells_per_wavelength, workers=run.workers)
        header = ["tan_delta"] + [f"{_tag(_ghz(v))}GHz" for v in f]
        run.csv("loss_table.csv", header, [[td, *row] for td, row in zip(table.tan_deltas, table.db_per_mm)])


def _bend_point(args):
    cs, r_center, f, td, plane, cpw, n_modes = args
    m = bend_modes(cs, r_center, f, max(n_modes, 2), plane=plane, cells_per_wavelength=cpw)
    loss = bend_loss_90(cs, r_center, f, td, plane=plane, modes=m)
    conv = bend_mode_conversion(cs, r_center, f, len(m.straight), plane=plane, modes=m) if len(m.straight) > 1 else None
    return loss, conv


def _bend_radius(cfg: ScenarioConfig, r: float, cs) -> float:
    return centerline_radius(r, cs, cfg.bend_plane) if cfg.radius_reference == "inner" else r


def _bend_sweep(run: _Run):
    cfg = run.cfg
    cs = cfg.cross_section.lossless()
    plane = BendPlane(cfg.bend_plane)
    radii = cfg.sweep_si
    f = cfg.band.array
    n = n_modes_for(cfg)
    with run.stage("bend"):
        for r in radii:
            BendSpec(_bend_radius(cfg, r, cs), plane=plane).validate_for(cs)
        points = [(cs, _bend_radius(cfg, r, cs), float(fk), cfg.effective_tan_delta, plane, cfg.cells_per_wavelength, n)
                  for fk in f for r in radii]
        results = map_ordered(_bend_point, points, run.workers)
    with run.stage("export"):
        for i, fk in enumerate(f):
            rows = []
            for j, r in enumerate(cfg.sweep_values):
                loss, conv = results[i * len(radii) + j]
                rows.append([r, loss.radius * 1e6, loss.loss_db, loss.junction_db, loss.arc_db,
                             conv.converted if conv else math.nan, conv.unaccounted if conv else math.nan,
                             int(loss.flagged)])
            run.csv(f"bend_loss_{_tag(_ghz(fk))}GHz.csv",
                    [f"radius_{cfg.radius_reference}_um", "radius_centerline_um", "loss_dB", "junction_dB",
                     "arc_dB", "converted_fraction", "unaccounted_fraction", "flagged"], rows)


def _crosstalk(run: _Run):
    cfg = run.cfg
    cs = cfg.cross_section.lossless()
    f = cfg.band.array
    gaps = cfg.sweep_si
    length = cfg.coupled_length_um / 1e6
    with run.stage("crosstalk"):
        results = [fext(ParallelPair(cs, d, length), f, cells_per_wavelength=cfg.cells_per_wavelength,
                        workers=run.workers) for d in gaps]
    with run.stage("export"):
        rows = []
        for d, res in zip(cfg.sweep_values, results):
            for k, fk in enumerate(f):
                rows.append([d, _ghz(fk), float(res.kappa[k]), float(res.fext_db[k]),
                             float(res.through_db[k]), float(res.next_db[k])])
        run.csv("crosstalk.csv", ["gap_um", "f_GHz", "kappa_per_m", "fext_dB", "through_dB", "next_bound_dB"], rows)
        if len(gaps) >= 2:
            iso = fundamental_modes(cs, f, cfg.cells_per_wavelength, run.workers)
            fits = []
            for k, fk in enumerate(f):
                kap = [float(res.kappa[k]) for res in results]
                if min(kap) <= 0:
                    continue
                fit = fit_log_kappa(gaps, kap, cs, float(fk), float(np.real(iso[k].beta)))
                fits.append([_ghz(fk), fit.slope, fit.expected_slope, fit.r2])
            run.csv("crosstalk_fit.csv", ["f_GHz", "slope_per_m", "expected_slope_per_m", "r2"], fits)


def _launch(cfg: ScenarioConfig, cs):
    if cfg.launch_a_um is not None or cfg.launch_b_um is not None:
        a = (cfg.launch_a_um or cfg.a_um) / 1e6
        b = (cfg.launch_b_um or cfg.b_um) / 1e6
        return replace(cs, a=a, b=b)
    return launch_cross_section(cs, cfg.launch_area_ratio)


def _taper(run: _Run):
    cfg = run.cfg
    cs = cfg.cross_section
    f = cfg.band.array
    launch = _launch(cfg, cs)
    var = cfg.sweep_variable or "taper_length"
    shown_values = cfg.sweep_values if cfg.sweep_variable else (cfg.taper_length_um,)
    rows = []
    with run.stage("taper"):
        for shown in shown_values:
            length = (shown if var == "taper_length" else cfg.taper_length_um) / 1e6
            segs = int(shown) if var == "segments" else cfg.taper_segments
            prof = make_linear_taper(launch, cs, length, segs)
            sp, records = cascade(prof, f, n_modes_for(cfg), cells_per_wavelength=cfg.cells_per_wavelength,
                                  workers=run.workers)
            run.touchstone(sp, f"taper_{var}_{_tag(shown)}.s2p")
            for k, fk in enumerate(f):
                rows.append([shown, _ghz(fk), float(sp.db(1, 1)[k]), float(sp.db(2, 1)[k]),
                             float(np.max(records[k].truncated_power)) if records[k].truncated_power.size else 0.0])
        run.csv("taper.csv", ["taper_length_um" if var == "taper_length" else "segments", "f_GHz",
                              "s11_dB", "s21_dB", "max_truncated_fraction"], rows)


def _link(run: _Run):
    cfg = run.cfg
    cs = cfg.cross_section.lossless()
    f = cfg.band.array
    launch = _launch(cfg, cs)
    t_in = make_linear_taper(launch, cs, cfg.taper_length_um / 1e6, cfg.taper_segments)
    t_out = t_in.reversed()
    plane = BendPlane(cfg.bend_plane)
    bends = [BendSpec(_bend_radius(cfg, r / 1e6, cs), plane=plane) for r in cfg.bend_radii_um]
    values = cfg.sweep_si if cfg.sweep_variable else (cfg.effective_tan_delta,)
    rows = []
    with run.stage("link"):
        for td in values:
            sp = end_to_end_link(t_in, cfg.length_um / 1e6, bends, t_out, f, td, n_modes=n_modes_for(cfg),
                                 cells_per_wavelength=cfg.cells_per_wavelength, workers=run.workers)
            run.touchstone(sp, f"link_tan_delta_{_tag(td)}.s2p")
            for k, fk in enumerate(f):
                rows.append([td, _ghz(fk), float(sp.db(1, 1)[k]), float(sp.db(2, 1)[k])])
        run.csv("link.csv", ["tan_delta", "f_GHz", "s11_dB", "s21_dB"], rows)


_PIPELINES = {
    "modes": _modes,
    "straight": _straight,
    "loss-table": _loss_table,
    "bend-sweep": _bend_sweep,
    "crosstalk-sweep": _crosstalk,
    "taper": _taper,
    "link": _link,
}

