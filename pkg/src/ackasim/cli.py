"""Command-line front end: run, security, analyze, sweep."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, parse_run_config
from .harness import (
    RUN_CSV_HEADER,
    analyze_transcripts,
    render_summary_text,
    run_and_write,
    summary_csv,
    sweep,
    sweep_text,
    write_sweep_outputs,
)
from .presets import PRESETS
from .security import (
    CSV_HEADER as SECURITY_CSV_HEADER,
    SecurityInputs,
    build_report,
    report_csv_row,
    report_text,
)
from .transcripts import TranscriptFormatError

OUTPUT_DIR_ENV = "ACKASIM_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ackasim",
        description="Anonymous conference key agreement simulator and analyzer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured protocol run")
    p_run.add_argument("config", help="run-configuration file")
    p_run.add_argument(
        "--output-dir",
        help=f"output directory (overrides ${OUTPUT_DIR_ENV} and the config file)",
    )
    p_run.set_defaults(func=cmd_run)

    p_sec = sub.add_parser("security", help="security report from explicit counts")
    p_sec.add_argument("--keygen", type=int, required=True)
    p_sec.add_argument("--verification", type=int, required=True)
    p_sec.add_argument("--failed", type=int, required=True)
    p_sec.add_argument("--fidelity", type=float, required=True)
    p_sec.add_argument("--raw-rate", type=float, default=None,
                       help="key-relevant events per second")
    p_sec.add_argument("--csv", default=None,
                       help="also write the report as CSV ('-' for stdout)")
    p_sec.set_defaults(func=cmd_security)

    p_an = sub.add_parser("analyze", help="recompute a summary from transcripts")
    p_an.add_argument("public", help="public transcript file")
    p_an.add_argument("private", nargs="?", default=None,
                      help="sender-private file (optional)")
    p_an.add_argument("--fidelity", type=float, default=None,
                      help="override the state fidelity used for the report")
    p_an.add_argument("--csv", default=None,
                      help="also write the summary as CSV ('-' for stdout)")
    p_an.set_defaults(func=cmd_analyze)

    p_sw = sub.add_parser("sweep", help="batch runs over presets and fidelities")
    p_sw.add_argument("--presets", default=",".join(PRESETS),
                      help="comma-separated preset labels (default: all)")
    p_sw.add_argument("--fidelities", default="1.0",
                      help="comma-separated fidelity targets")
    p_sw.add_argument("--repetitions", type=int, default=3)
    p_sw.add_argument("--seed", type=int, default=0)
    p_sw.add_argument("--rounds", type=int, default=10_000, dest="rounds")
    p_sw.add_argument("--security-parameter", type=int, default=20, dest="d")
    p_sw.add_argument("--jobs", type=int, default=1,
                      help="parallel workers; output is identical for any value")
    p_sw.add_argument("--output-dir", default=None)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def _resolve_output_dir(cli_value: str | None, config_value: str | None) -> str:
    if cli_value:
        return cli_value
    env_value = os.environ.get(OUTPUT_DIR_ENV)
    if env_value:
        return env_value
    if config_value:
        return config_value
    return "out"


def cmd_run(args: argparse.Namespace) -> int:
    settings = parse_run_config(args.config)
    outdir = _resolve_output_dir(args.output_dir, settings.output_dir)
    paths = run_and_write(settings, outdir)
    sys.stdout.write(paths["summary_text"].read_text())
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def cmd_security(args: argparse.Namespace) -> int:
    report = build_report(
        SecurityInputs(
            num_keygen=args.keygen,
            num_verification=args.verification,
            num_verification_failed=args.failed,
            fidelity_F=args.fidelity,
            raw_rate=args.raw_rate,
        )
    )
    print("security report:")
    print(report_text(report))
    if args.csv is not None:
        payload = SECURITY_CSV_HEADER + "\n" + report_csv_row(report) + "\n"
        if args.csv == "-":
            sys.stdout.write(payload)
        else:
            Path(args.csv).write_text(payload)
            print(f"wrote {args.csv}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    summary = analyze_transcripts(args.public, args.private, args.fidelity)
    sys.stdout.write(render_summary_text(summary))
    if args.csv is not None:
        payload = summary_csv(summary)
        if args.csv == "-":
            sys.stdout.write(payload)
        else:
            Path(args.csv).write_text(payload)
            print(f"wrote {args.csv}")
    return 0


def _parse_list(text: str, what: str) -> list[str]:
    items = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not items:
        raise ConfigError(f"empty {what} list")
    return items


def cmd_sweep(args: argparse.Namespace) -> int:
    labels = _parse_list(args.presets, "preset")
    try:
        fidelities = [float(tok) for tok in _parse_list(args.fidelities, "fidelity")]
    except ValueError as exc:
        raise ConfigError(f"bad fidelity list: {exc}") from None
    rows, cells = sweep(
        labels,
        fidelities,
        args.repetitions,
        base_seed=args.seed,
        D=args.d,
        L=args.rounds,
        jobs=args.jobs,
    )
    outdir = _resolve_output_dir(args.output_dir, None)
    paths = write_sweep_outputs(outdir, rows, cells)
    sys.stdout.write(sweep_text(cells))
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TranscriptFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
