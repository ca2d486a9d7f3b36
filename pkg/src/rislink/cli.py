"""Command-line front end: parameter sweeps, reproduction recipes, CSV output.

Exit codes: 0 on success, 1 when a reproduction check fails, 2 on invalid
input.  All SNR values are expressed in dB on the interface and converted
to linear exactly once.  The ``RISLINK_WORKERS`` environment variable sets
the Monte Carlo worker count (default 1); results do not depend on it.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from rislink import montecarlo, pathloss, report, sep
from rislink.link import ModulationSpec

__all__ = ["main"]


def _workers() -> int:
    raw = os.environ.get("RISLINK_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"RISLINK_WORKERS must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"RISLINK_WORKERS must be >= 1, got {value}")
    return value


def _read_config(path: str) -> dict[str, str]:
    """Key=value defaults file; blank lines and #-comments are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, _, value = text.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _snr_grid(args) -> list[float]:
    if args.snr_step <= 0.0:
        raise ValueError(f"snr-step must be positive, got {args.snr_step}")
    if args.snr_stop < args.snr_start:
        raise ValueError("snr-stop must be >= snr-start")
    count = int(round((args.snr_stop - args.snr_start) / args.snr_step)) + 1
    return [args.snr_start + i * args.snr_step for i in range(count)]


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(path: str, header: list[str], rows: list[list]) -> None:
    out, close = _open_out(path)
    try:
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(report.format_value(v) for v in row) + "\n")
    finally:
        if close:
            out.close()


def _cmd_pathloss(args) -> int:
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    if not models:
        raise ValueError("model list is empty")
    known = {"los", "two-ray", "ris", "relay"}
    for model in models:
        if model not in known:
            raise ValueError(f"unknown model {model!r}; choose from {sorted(known)}")
    if args.points < 2:
        raise ValueError(f"need at least 2 distance points, got {args.points}")
    if not 0 < args.d_start < args.d_stop:
        raise ValueError("distance range must satisfy 0 < d-start < d-stop")
    n = args.n if args.n is not None else 100
    distances = np.logspace(math.log10(args.d_start), math.log10(args.d_stop), args.points)

    rows = []
    for d in distances:
        geom = pathloss.TwoRayGeometry(h_t=args.ht, h_r=args.hr, d=float(d),
                                       wavelength=args.wavelength)
        los = pathloss.los_power(1.0, geom)
        for model in models:
            if model == "los":
                res, n_col = los, 0
            elif model == "two-ray":
                res, n_col = pathloss.two_ray_power(1.0, geom, reflection=-1.0), 0
            elif model == "ris":
                tiles = pathloss.TileSet.specular(geom, n)
                res, n_col = pathloss.ris_ground_power(1.0, geom, tiles, mode="optimal"), n
            else:
                res, n_col = pathloss.relay_power(1.0, float(d) / 2.0, float(d) / 2.0,
                                                  args.wavelength), 0
            gain = 10.0 * math.log10(res.p_r / los.p_r) if res.p_r > 0 else -math.inf
            rows.append([model, float(d), args.wavelength, args.ht, args.hr,
                         n_col, res.p_r, gain])
    _emit(args.out, ["model", "d_m", "lambda_m", "ht_m", "hr_m", "N",
                     "pr_watts", "gain_db_vs_los"], rows)
    return 0


def _theory_row(mode: str, n: int, m: int, family: str, snr_db: float) -> list:
    rho = 10.0 ** (snr_db / 10.0)
    pe_exact = sep.sep_exact(mode, n, m, family, rho)
    spec = sep.MgfSpec(mode, n, rho)
    pe_ub = sep.sep_mqam_ub(spec, m) if family == "qam" else sep.sep_mpsk_ub(spec, m)
    try:
        pe_waterfall = sep.sep_waterfall_approx(mode, n, rho, m)
    except ValueError:
        pe_waterfall = math.nan
    flag = "below_floor" if pe_exact < sep.SEP_FLOOR else sep.regime_flag(n, rho)
    return [mode, n, m, family, snr_db, pe_exact, pe_ub, pe_waterfall, flag]


def _cmd_sep_theory(args) -> int:
    tile_counts = args.n or [16, 32]
    ModulationSpec(args.family, args.m)  # validates order/family up front
    if args.mode == "transmitter" and args.family != "psk":
        raise ValueError("transmitter mode is PSK only")
    grid = _snr_grid(args)
    rows = [_theory_row(args.mode, n, args.m, args.family, snr_db)
            for n in tile_counts for snr_db in grid]
    _emit(args.out, ["mode", "N", "M", "family", "snr_db", "pe_exact", "pe_ub",
                     "pe_waterfall", "regime_flag"], rows)
    return 0


def _cmd_sep_sim(args) -> int:
    tile_counts = args.n or [32]
    spec = ModulationSpec(args.family, args.m)
    if args.mode == "transmitter" and args.family != "psk":
        raise ValueError("transmitter mode is PSK only")
    plan = montecarlo.TrialPlan(master_seed=args.seed, trials=args.trials)
    grid = _snr_grid(args)
    workers = _workers()

    rows = []
    for n in tile_counts:
        for snr_db in grid:
            rho = 10.0 ** (snr_db / 10.0)
            if args.mode == "reflector":
                est = montecarlo.simulate_reflector_sep(plan, n, spec, rho,
                                                        workers=workers, snr_db=snr_db)
            else:
                est = montecarlo.simulate_transmitter_sep(plan, n, args.m, rho,
                                                          workers=workers, snr_db=snr_db)
            pe_exact = sep.sep_exact(args.mode, n, args.m, args.family, rho)
            rows.append([args.mode, n, args.m, snr_db, est.trials, est.errors,
                         est.pe_hat, est.ci.low, est.ci.high, pe_exact])
    _emit(args.out, ["mode", "N", "M", "snr_db", "trials", "errors", "pe_hat",
                     "ci_low", "ci_high", "pe_exact"], rows)
    return 0


def _cmd_reproduce(args) -> int:
    files, checks = report.reproduce(args.figure, Path(args.out), trials=args.trials,
                                     seed=args.seed, workers=_workers())
    for check in checks:
        print(check.line())
    for path in files:
        print(f"wrote {path}")
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: " + ", ".join(c.name for c in failed))
        return 1
    return 0


def _build_parser(defaults: dict[str, str] | None = None,
                  command: str | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rislink",
        description="Link budgets and symbol error probabilities for "
                    "reconfigurable-surface-assisted radio links.")
    parser.add_argument("--config", help="key=value defaults file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, default_step):
        p.add_argument("--config", help=argparse.SUPPRESS)
        p.add_argument("--mode", choices=("reflector", "transmitter"), default="reflector")
        p.add_argument("--m", type=int, default=2, help="constellation order")
        p.add_argument("--family", choices=("psk", "qam"), default="psk")
        p.add_argument("--snr-start", type=float, default=-45.0, help="grid start [dB]")
        p.add_argument("--snr-stop", type=float, default=0.0, help="grid stop [dB]")
        p.add_argument("--snr-step", type=float, default=default_step, help="grid step [dB]")
        p.add_argument("--out", default="-", help="output CSV path, - for stdout")

    p = sub.add_parser("pathloss", help="received power vs distance for the link models")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("--models", default="los,two-ray,ris,relay",
                   help="comma-separated subset of los,two-ray,ris,relay")
    p.add_argument("--n", type=int, default=None, help="tile count of the ris model")
    p.add_argument("--d-start", type=float, default=10.0, help="first distance [m]")
    p.add_argument("--d-stop", type=float, default=10_000.0, help="last distance [m]")
    p.add_argument("--points", type=int, default=41, help="log-spaced distance count")
    p.add_argument("--ht", type=float, default=0.05, help="transmit height [m]")
    p.add_argument("--hr", type=float, default=0.05, help="receive height [m]")
    p.add_argument("--wavelength", type=float, default=0.01, help="carrier wavelength [m]")
    p.add_argument("--out", default="-", help="output CSV path, - for stdout")
    p.set_defaults(func=_cmd_pathloss)

    p = sub.add_parser("sep-theory", help="closed-form SEP sweep")
    add_common(p, 0.5)
    p.add_argument("--n", type=int, action="append", help="tile count (repeatable)")
    p.set_defaults(func=_cmd_sep_theory)

    p = sub.add_parser("sep-sim", help="Monte Carlo SEP sweep")
    add_common(p, 2.5)
    p.add_argument("--n", type=int, action="append", help="tile count (repeatable)")
    p.add_argument("--trials", type=int, default=100_000, help="trials per grid point")
    p.add_argument("--seed", type=int, default=1, help="master seed")
    p.set_defaults(func=_cmd_sep_sim)

    p = sub.add_parser("reproduce", help="bundled data/figure recipes with checks")
    p.add_argument("figure", choices=report.RECIPES)
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("--trials", type=int, default=1_000_000,
                   help="trials per point for simulated recipes")
    p.add_argument("--seed", type=int, default=1, help="master seed")
    p.add_argument("--out", default="reports", help="output directory")
    p.set_defaults(func=_cmd_reproduce)

    append_defaults = {}
    if defaults and command is not None:
        # config values become defaults of the invoked subcommand only;
        # explicit flags still win because they overwrite parsed defaults
        subparser = sub.choices.get(command)
        if subparser is None:
            raise ValueError(f"unknown command {command!r} for config defaults")
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(defaults) - known)
        if unknown:
            raise ValueError(f"config keys not understood by {command}: {', '.join(unknown)}")
        plain = {}
        for key, raw in defaults.items():
            value = _coerce(subparser, key, raw)
            # repeatable flags append to their default, so their config
            # value must be injected after parsing instead
            if isinstance(value, list):
                append_defaults[key] = value
            else:
                plain[key] = value
        subparser.set_defaults(**plain)
    return parser, append_defaults


def _coerce(subparser, dest: str, raw: str):
    for action in subparser._actions:
        if action.dest != dest:
            continue
        if isinstance(action, argparse._AppendAction):
            return [action.type(part) for part in raw.split(",")]
        if action.type is not None:
            return action.type(raw)
        return raw
    return raw


COMMANDS = ("pathloss", "sep-theory", "sep-sim", "reproduce")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    try:
        defaults = _read_config(known.config) if known.config else None
        parser, append_defaults = _build_parser(defaults, command)
        args = parser.parse_args(argv)
        for key, value in append_defaults.items():
            if getattr(args, key) is None:
                setattr(args, key, value)
        if args.command in ("sep-sim",) and args.trials < 1:
            raise ValueError(f"trials must be >= 1, got {args.trials}")
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
