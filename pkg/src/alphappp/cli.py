"""Command line front end for discovery, export, and the HTTP service.

Exit codes: 0 success, 2 input problems (missing or unparseable log),
3 configuration problems (bad flag values, unknown presets, conflicting
flags).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .discovery import (
    PRESETS,
    ConfigError,
    DfThreshold,
    DiscoveryConfig,
    discover_alpha_classic,
    discover_alphappp,
)
from .log import (
    CsvMapping,
    LogParseError,
    activity_multiset,
    filter_variants_coverage,
    filter_variants_top,
    parse_log_file,
)
from .petri import greedy_removal_order, net_to_dot, remove_transitions, to_pnml

EXIT_INPUT = 2
EXIT_CONFIG = 3

CONFIG_FLAGS = ("--d", "--d-mode", "--n", "--b", "--t", "--r", "--problem-threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphappp",
        description="Discover accepting Petri nets from event logs.",
    )
    parser.add_argument("--input", help="event log (.xes, .xes.gz, .csv, .json)")
    parser.add_argument(
        "--algorithm", choices=("alphappp", "alpha"), default="alphappp"
    )
    parser.add_argument("--preset", help="named parameter preset, e.g. 2.0/b0.5t0.5r0.5")
    parser.add_argument("--d", type=float, help="directly-follows threshold value")
    parser.add_argument(
        "--d-mode", choices=("absolute", "relative"), help="threshold interpretation"
    )
    parser.add_argument("--n", type=int, help="minimum absolute arc weight kept in the advising graph")
    parser.add_argument("--b", type=float, help="balance cutoff in [0, 1]")
    parser.add_argument("--t", type=float, help="fitness cutoff in [0, 1]")
    parser.add_argument("--r", type=float, help="replay cutoff in [0, 1]")
    parser.add_argument("--problem-threshold", type=float, help="activity problem score cutoff")
    parser.add_argument("--out", help="write the discovered net as PNML to this path")
    parser.add_argument("--dot", help="write a Graphviz rendering to this path")
    parser.add_argument("--report", help="write the stage report as JSON to this path")
    parser.add_argument(
        "--variant-filter",
        help="restrict the log before discovery: top:<k> or coverage:<fraction>",
    )
    parser.add_argument(
        "--remove-disconnected",
        help="drop disconnected transitions after discovery: greedy:<k>",
    )
    parser.add_argument("--serve", type=int, metavar="PORT", help="run the HTTP service")
    parser.add_argument("--data-dir", help="persistence directory for the HTTP service")
    parser.add_argument("--csv-case", help="CSV column holding the case id")
    parser.add_argument("--csv-activity", help="CSV column holding the activity name")
    parser.add_argument("--csv-timestamp", help="CSV column holding the timestamp")
    parser.add_argument("--csv-time-format", help="strptime format for --csv-timestamp")
    return parser


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _resolve_config(args) -> DiscoveryConfig:
    """Build the discovery configuration from --preset or individual flags."""
    individual = [f for f in CONFIG_FLAGS if getattr(args, f.lstrip("-").replace("-", "_")) is not None]
    if args.preset and individual:
        raise ConfigError(
            f"--preset conflicts with {', '.join(individual)}; pick one style"
        )
    if args.preset:
        if args.preset not in PRESETS:
            known = ", ".join(sorted(PRESETS))
            raise ConfigError(f"unknown preset {args.preset!r} (available: {known})")
        return PRESETS[args.preset]

    defaults = DiscoveryConfig()
    value = args.d if args.d is not None else defaults.df_threshold.value
    mode = args.d_mode if args.d_mode is not None else defaults.df_threshold.mode
    try:
        return DiscoveryConfig(
            df_threshold=DfThreshold(value, mode),
            arc_min=args.n if args.n is not None else defaults.arc_min,
            balance_cutoff=args.b if args.b is not None else defaults.balance_cutoff,
            fitness_cutoff=args.t if args.t is not None else defaults.fitness_cutoff,
            replay_cutoff=args.r if args.r is not None else defaults.replay_cutoff,
            problem_threshold=(
                args.problem_threshold
                if args.problem_threshold is not None
                else defaults.problem_threshold
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _apply_variant_filter(log, spec: str):
    kind, _, raw = spec.partition(":")
    if kind == "top":
        try:
            k = int(raw)
        except ValueError:
            raise ConfigError(f"--variant-filter top wants an integer, got {raw!r}") from None
        if k < 1:
            raise ConfigError("--variant-filter top wants a positive count")
        return filter_variants_top(log, k)
    if kind == "coverage":
        try:
            fraction = float(raw)
        except ValueError:
            raise ConfigError(f"--variant-filter coverage wants a number, got {raw!r}") from None
        if not 0 < fraction <= 1:
            raise ConfigError("--variant-filter coverage wants a fraction in (0, 1]")
        return filter_variants_coverage(log, fraction)
    raise ConfigError(f"unknown --variant-filter {spec!r} (expected top:<k> or coverage:<f>)")


def _parse_removal(spec: str) -> int:
    kind, _, raw = spec.partition(":")
    if kind != "greedy":
        raise ConfigError(f"unknown --remove-disconnected {spec!r} (expected greedy:<k>)")
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"--remove-disconnected greedy wants an integer, got {raw!r}") from None
    if k < 0:
        raise ConfigError("--remove-disconnected greedy wants a non-negative count")
    return k


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve is not None:
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(args.data_dir), host="127.0.0.1", port=args.serve)
        return 0

    if not args.input:
        return _fail(EXIT_CONFIG, "--input is required unless --serve is given")

    individual_flags = [
        f for f in CONFIG_FLAGS if getattr(args, f.lstrip("-").replace("-", "_")) is not None
    ]
    if args.algorithm == "alpha" and (args.preset or individual_flags):
        offenders = ", ".join(["--preset"] * bool(args.preset) + individual_flags)
        return _fail(EXIT_CONFIG, f"--algorithm alpha takes no thresholds; drop {offenders}")

    try:
        config = _resolve_config(args) if args.algorithm == "alphappp" else None
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    path = Path(args.input)
    if not path.exists():
        return _fail(EXIT_INPUT, f"input file {args.input!r} does not exist")
    mapping = None
    if path.name.lower().endswith((".csv", ".csv.gz")):
        mapping = CsvMapping(
            case_column=args.csv_case or "case",
            activity_column=args.csv_activity or "activity",
            timestamp_column=args.csv_timestamp,
            timestamp_format=args.csv_time_format,
        )
    try:
        log = parse_log_file(str(path), mapping)
    except LogParseError as exc:
        return _fail(EXIT_INPUT, str(exc))

    if args.variant_filter:
        try:
            log = _apply_variant_filter(log, args.variant_filter)
        except ConfigError as exc:
            return _fail(EXIT_CONFIG, str(exc))

    try:
        if args.algorithm == "alpha":
            accepting = discover_alpha_classic(log)
            report_json = None
            counts = activity_multiset(log)
        else:
            result = discover_alphappp(log, config)
            accepting = result.net
            report_json = result.report.to_json()
            counts = activity_multiset(result.repaired_log)
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))

    removed: list[str] = []
    if args.remove_disconnected:
        try:
            k = _parse_removal(args.remove_disconnected)
        except ConfigError as exc:
            return _fail(EXIT_CONFIG, str(exc))
        order = greedy_removal_order(accepting.net, counts)
        victims = order[:k]
        accepting = remove_transitions(accepting, victims)
        removed = [t.label or t.tid for t in victims]

    if args.out:
        Path(args.out).write_bytes(to_pnml(accepting))
    if args.dot:
        Path(args.dot).write_text(net_to_dot(accepting), encoding="utf-8")
    if args.report and report_json is not None:
        import json

        Path(args.report).write_text(json.dumps(report_json, indent=2), encoding="utf-8")

    net = accepting.net
    print(
        f"discovered net: {len(net.places)} places, {len(net.transitions)} transitions, "
        f"{len(net.arcs)} arcs"
    )
    if removed:
        print(f"removed disconnected transitions: {', '.join(removed)}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
