"""Command line entry point: ``drwsim run|modes|sweep``.

Exit codes: 0 success, 2 configuration error, 3 solver or stage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import SCENARIOS, SWEEP_VARIABLES, ScenarioConfig, load_config, parse_config, serialize
from .errors import ConfigError, DRWError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

log = logging.getLogger("drwsim")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=None, help="worker processes for sweep points")
    p.add_argument("--seed-metadata", action="store_true",
                   help="omit wall-clock timings and worker count so the manifest is reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drwsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("--config", required=True)
    _common(run)

    modes = sub.add_parser("modes", help="solve guided modes of one cross-section")
    modes.add_argument("--a", default="160um", help="core width with unit")
    modes.add_argument("--b", default="80um", help="core height with unit")
    modes.add_argument("--freq", default="110GHz", help="frequency with unit")
    modes.add_argument("--n-modes", type=int, default=3)
    modes.add_argument("--cells-per-wavelength", type=int, default=20)
    _common(modes)

    sweep = sub.add_parser("sweep", help="run a sweep scenario with default settings")
    sweep.add_argument("scenario", choices=[s for s in SCENARIOS if s != "modes"])
    sweep.add_argument("--values", nargs="+", help="sweep values (lengths need units)")
    sweep.add_argument("--start", default=None, help="band start, e.g. 90GHz")
    sweep.add_argument("--stop", default=None, help="band stop, e.g. 150GHz")
    sweep.add_argument("--points", type=int, default=None)
    sweep.add_argument("--tan-delta", type=float, default=None)
    _common(sweep)
    return parser


def _modes_config(args) -> ScenarioConfig:
    text = (
        "schema_version: 1\nscenario: modes\n"
        f"geometry: {{a: {args.a}, b: {args.b}}}\n"
        f"band: {{start: {args.freq}, stop: {args.freq}, points: 1}}\n"
        f"solver: {{n_modes: {args.n_modes}, cells_per_wavelength: {args.cells_per_wavelength}}}\n"
    )
    return parse_config(text)


def _sweep_config(args) -> ScenarioConfig:
    lines = ["schema_version: 1", f"scenario: {args.scenario}"]
    band = {k: v for k, v in (("start", args.start), ("stop", args.stop), ("points", args.points)) if v is not None}
    if band:
        lines.append("band: {" + ", ".join(f"{k}: {v}" for k, v in band.items()) + "}")
    if args.tan_delta is not None:
        lines.append(f"channel: {{tan_delta: {args.tan_delta}}}")
    if args.values:
        var = SWEEP_VARIABLES[args.scenario][0]
        lines.append(f"sweep: {{variable: {var}, values: [{', '.join(args.values)}]}}")
    return parse_config("\n".join(lines) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    from .runner import run_scenario

    try:
        if args.command == "run":
            cfg = load_config(args.config)
        elif args.command == "modes":
            cfg = _modes_config(args)
        else:
            cfg = _sweep_config(args)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1", "--workers")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("running %s\n%s", cfg.scenario, serialize(cfg))
    try:
        manifest = run_scenario(cfg, args.out, workers=args.workers, seed_metadata=args.seed_metadata)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DRWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except Exception as exc:  # unexpected failures are still solver-side
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for art in manifest.artifacts:
        print(art["path"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
