"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 pipeline error, 4 tolerance
failure under ``--check``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import FORMATS, load_config
from .errors import ConfigError, TwirlSimError
from .experiments import TABLES, run_table
from .pauli import ModelParams
from .runner import oracle_table, render, run_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PIPELINE = 3
EXIT_CHECK = 4


def _positive_int(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed out of range: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--shots", type=_positive_int, help="shots per measurement setting")
    common.add_argument("--seed", type=_seed, help="root seed (default 0)")
    common.add_argument("--streams", type=_positive_int, help="parallel sampling partitions")
    common.add_argument("--exact", action="store_true", default=None, help="exact expectations instead of sampling")
    common.add_argument("--out", help="write results to this file instead of stdout")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")

    p = argparse.ArgumentParser(prog="twirlsim", description="Twirling-based eigenstate extraction and matrix elements.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], help="run a preset table")
    t.add_argument("table_id", metavar="ID", help=f"one of {', '.join(TABLES)}")
    t.add_argument("--repeats", type=_positive_int, help="independent repeats (t-based CI when > 1)")
    t.add_argument("--check", action="store_true", help="exit 4 if any row misses the preset tolerance")

    r = sub.add_parser("run", parents=[common], help="run a config file")
    r.add_argument("config", help="path to a key = value config")
    r.add_argument("--repeats", type=_positive_int)

    o = sub.add_parser("oracle", parents=[common], help="exact eigenpairs of a model")
    o.add_argument("model", choices=("single_qubit", "h2"))
    o.add_argument("--J", type=float, default=1.0, help="Z coefficient of the single-qubit model")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    fmt = args.format or "csv"
    try:
        if args.command == "table":
            key = args.table_id.strip().upper()
            if key not in TABLES:
                raise ConfigError(f"unknown table {args.table_id!r}; choose from {', '.join(TABLES)}")
            table = run_table(key, args.shots, args.seed or 0, args.streams or 1, bool(args.exact), args.repeats)
            _emit(render(table, fmt), args.out)
            if args.check and not args.exact:
                preset = TABLES[key]
                bad = table.check(preset.tolerance, preset.zero_tolerance)
                for line in bad:
                    print(f"check failed: {line}", file=sys.stderr)
                if bad:
                    return EXIT_CHECK
            return EXIT_OK
        if args.command == "run":
            cfg = load_config(args.config)
            table = run_config(cfg, shots=args.shots, seed=args.seed, streams=args.streams,
                               exact=args.exact, repeats=args.repeats)
            _emit(render(table, args.format or cfg.output_format), args.out or cfg.output_path)
            return EXIT_OK
        model = ModelParams.single_qubit(args.J) if args.model == "single_qubit" else ModelParams.h2()
        _emit(render(oracle_table(model), fmt), args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TwirlSimError, ValueError, OSError) as exc:
        print(f"pipeline error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
