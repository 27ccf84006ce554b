"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line (shown in the terminal summary
and printed to stdout) and then asserts the same condition, so a failing
criterion is visible both in the summary and as a pytest failure.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from drwsim.bend import BendSpec, bend_loss_90, bend_mode_conversion, centerline_radius
from drwsim.channel import (
    SParameterSet,
    dielectric_attenuation,
    loss_table,
    straight_channel,
)
from drwsim.config import parse_config
from drwsim.crosstalk import ParallelPair, fext, fit_log_kappa, supermode_split
from drwsim.fdfd import ModeLabel, mode_overlap, solve_grid_modes, solve_modes
from drwsim.io import export_touchstone, read_touchstone
from drwsim.marcatili import solve_marcatili
from drwsim.model import Rect, paint, required_padding
from drwsim.runner import run_scenario
from drwsim.taper import cascade, end_to_end_link, launch_cross_section, make_linear_taper

import oracles

TABLE_F = (90e9, 110e9, 130e9, 150e9)
BAND = np.linspace(80e9, 160e9, 9)


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_1_cross_solver_agreement(cs):
    t0 = time.perf_counter()
    fd = solve_modes(cs, 110e9, 1)[0]
    ma = solve_marcatili(cs, 110e9)
    elapsed = time.perf_counter() - t0
    rel = abs(fd.neff - ma.neff) / ma.neff
    ok = rel <= 0.02 and elapsed < 30
    record(1, "Marcatili vs FDFD at 110 GHz", ok,
           f"neff FDFD {fd.neff:.5f}, Marcatili {ma.neff:.5f}, rel diff {rel:.2%} (<= 2%), {elapsed:.1f} s (< 30 s)")
    assert ok


def _quasi_slab(a, f, n_cells):
    h = a / n_cells
    px = math.ceil(required_padding(1000.0, 12.0, f) / h)
    nx = n_cells + 2 * px
    x = (np.arange(nx + 1) - nx / 2) * h
    y = np.linspace(-5 * a, 5 * a, 5)
    return paint(x, y, 12.0, [Rect(-a / 2, a / 2, -10 * a, 10 * a, 1000.0)])


def test_2_slab_oracle():
    a, f = 160e-6, 110e9
    ref = oracles.slab_te_neff(a, 1000.0, 12.0, f)
    coarse, fine = (solve_grid_modes(_quasi_slab(a, f, n), f, 1, check=False)[0].neff for n in (16, 32))
    extrap = oracles.richardson(coarse, fine)
    rel = abs(extrap - ref) / ref
    ok = rel < 0.005
    record(2, "quasi-slab FDFD vs analytic slab", ok,
           f"Richardson neff {extrap:.6f} vs bisection {ref:.6f}, rel err {rel:.2e} (< 0.5%)")
    assert ok


def test_3_loss_table(cs):
    targets = np.array([0.3, 0.5, 0.7, 0.5])
    t0 = time.perf_counter()
    table = loss_table(cs, TABLE_F, [0.0, 0.0005, 0.002])
    elapsed = time.perf_counter() - t0
    row = table.row(0.002)
    ratio = row / targets
    ok = bool(np.all((ratio >= 0.5) & (ratio <= 2.0)) and np.all(table.db_per_mm < 2.0) and elapsed < 120)
    record(3, "dielectric loss at tan d = 0.002", ok,
           "dB/mm " + ", ".join(f"{v:.3f}" for v in row)
           + " vs targets " + ", ".join(f"{v:g}" for v in targets)
           + f" (ratios {ratio.min():.2f}..{ratio.max():.2f}, within x2), max {table.db_per_mm.max():.3f} < 2, {elapsed:.1f} s")
    assert ok


def test_4_three_cm_channel(cs):
    sp = straight_channel(0.03, cs.with_tan_delta(0.002), [100e9])
    il = -float(sp.db(2, 1)[0])
    ok = 9.0 <= il <= 35.0
    record(4, "3 cm channel at 100 GHz, tan d = 0.002", ok, f"insertion loss {il:.2f} dB (in [9, 35])")
    assert ok


def test_5_bend_behavior(cs):
    """Radii are measured to the inner core edge; the loss is the excess over a straight arc."""
    radii = [25e-6, 50e-6, 100e-6, 200e-6, 400e-6]
    at100 = [bend_loss_90(cs, centerline_radius(r, cs), 100e9, 0.002).loss_db for r in radii]
    steps = np.diff(at100)
    bad = steps[steps > 0]
    monotone = bad.size == 0 or (bad.size == 1 and bad[0] < 0.02)
    worst_large = max(
        bend_loss_90(cs, centerline_radius(r, cs), f, 0.002).loss_db for r in (100e-6, 200e-6, 400e-6) for f in TABLE_F
    )
    large_ok = worst_large < 1.0
    conv = bend_mode_conversion(cs, centerline_radius(50e-6, cs), 100e9, 6)
    conv_ok = conv.converted > conv.unaccounted
    ok = monotone and large_ok and conv_ok
    record(5, "bend loss", ok,
           "loss(25..400 um) " + ", ".join(f"{v:.2f}" for v in at100) + f" dB monotone={monotone}; "
           f"max loss for R >= 100 um over 90-150 GHz {worst_large:.2f} dB (< 1: {large_ok}); "
           f"R = 50 um converted {conv.converted:.3f} vs unaccounted {conv.unaccounted:.3f} ({conv_ok})")
    assert ok


def test_6_crosstalk(cs):
    gaps = np.array([20e-6, 40e-6, 60e-6, 80e-6, 100e-6])
    splits = [supermode_split(ParallelPair(cs, d), 100e9) for d in gaps]
    kappa = [s.kappa for s in splits]
    beta = 0.5 * (splits[-1].even.beta.real + splits[-1].odd.beta.real)
    fit = fit_log_kappa(gaps, kappa, cs, 100e9, beta)
    slope_ratio = fit.slope / fit.expected_slope
    fit_ok = fit.r2 >= 0.98 and abs(slope_ratio - 1) <= 0.25
    far = fext(ParallelPair(cs, 100e-6, 1e-3), BAND)
    worst = float(np.max(far.fext_db))
    fext_ok = worst <= -55.0
    ok = fit_ok and fext_ok
    record(6, "crosstalk", ok,
           f"ln kappa fit over 20-100 um at 100 GHz R^2 {fit.r2:.4f} (>= 0.98), slope {fit.slope:.4g}/m vs "
           f"-gamma_clad {fit.expected_slope:.4g}/m (ratio {slope_ratio:.2f}, need 0.75-1.25); "
           f"worst FEXT at d = 100 um, L = 1 mm over 80-160 GHz {worst:.1f} dB (<= -55)")
    assert ok


@pytest.fixture(scope="module")
def taper_runs(cs):
    launch = launch_cross_section(cs)
    sp64, _ = cascade(make_linear_taper(launch, cs, 2e-3, 64), TABLE_F, 5)
    edges = [TABLE_F[0], TABLE_F[-1]]
    sp128, _ = cascade(make_linear_taper(launch, cs, 2e-3, 128), edges, 5)
    return sp64, sp128


def test_7_taper(taper_runs):
    sp64, sp128 = taper_runs
    s11, s21 = sp64.db(1, 1), sp64.db(2, 1)
    conv = np.abs(sp64.db(2, 1)[[0, -1]] - sp128.db(2, 1))
    ok = bool(np.all(s11 <= -20) and np.all(s21 >= -0.5) and np.all(conv < 0.05))
    record(7, "2 mm linear taper, 64 segments, 5 modes", ok,
           f"worst |S11| {s11.max():.1f} dB (<= -20), worst |S21| {s21.min():.4f} dB (>= -0.5), "
           f"64 -> 128 segment change {conv.max():.2e} dB (< 0.05)")
    assert ok


def test_8_classification(modes_110):
    mc = modes_110[0].mode_class
    n_guided = len(modes_110)
    ok = mc.label is ModeLabel.LSE and mc.minor_e_fraction < 0.02 and n_guided >= 3
    record(8, "mode classification at 110 GHz", ok,
           f"fundamental {mc.label.value}, minor transverse-E fraction {mc.minor_e_fraction:.4f} (< 0.02), "
           f"{n_guided} guided modes requested and found (>= 3)")
    assert ok


def test_9_property_suites(cs, modes_110, tmp_path):
    cross = max(abs(mode_overlap(a, b)) for i, a in enumerate(modes_110) for b in modes_110[i + 1:])
    ortho_ok = cross < 1e-4

    outputs = [
        straight_channel(0.03, cs.with_tan_delta(0.002), TABLE_F),
        cascade(make_linear_taper(launch_cross_section(cs), cs, 1e-3, 8), [100e9, 140e9], 3)[0],
        end_to_end_link(None, 0.01, [BendSpec(200e-6)], None, [100e9], 0.002, cs=cs),
    ]
    violation = max(max(sp.passivity_excess(), sp.reciprocity_error()) for sp in outputs)
    phys_ok = violation <= 1e-6

    m = modes_110[0]
    a1 = dielectric_attenuation(m, cs.with_tan_delta(0.0005))
    a2 = dielectric_attenuation(m, cs.with_tan_delta(0.002))
    lin = abs(a2 / (4 * a1) - 1)
    lin_ok = lin <= 1e-9

    cfg = parse_config("schema_version: 1\nscenario: loss-table\nband: {start: 90GHz, stop: 150GHz, points: 4}\n")
    runs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        run_scenario(cfg, out, workers=w, seed_metadata=True)
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    det_ok = runs[0] == runs[1]

    rng = np.random.default_rng(3)
    s = rng.standard_normal((5, 2, 2)) + 1j * rng.standard_normal((5, 2, 2))
    sp = SParameterSet(np.linspace(80e9, 160e9, 5), s)
    back = read_touchstone(export_touchstone(sp, tmp_path / "rt.s2p"))
    rt = float(np.max(np.abs(back.s - sp.s)))
    rt_ok = rt <= 1e-9 and np.allclose(back.frequencies, sp.frequencies, rtol=1e-12)

    ok = ortho_ok and phys_ok and lin_ok and det_ok and rt_ok
    record(9, "property suites", ok,
           f"max cross-power {cross:.1e} (< 1e-4); worst passivity/reciprocity violation {violation:.1e} (<= 1e-6); "
           f"alpha linearity error {lin:.1e} (<= 1e-9); 1 vs 2 workers identical={det_ok}; "
           f"Touchstone round-trip error {rt:.1e} (<= 1e-9)")
    assert ok
