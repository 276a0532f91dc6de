"""Command-line pipelines: ingest | analyze | synth | version.

Configuration merges, lowest to highest precedence: JSON config file,
repeatable --set dotted.path=value overrides, dedicated flags, and for
the synth seed the DECENT_METER_SEED environment variable on top.

All declared outputs are computed fully in memory first, then written
via temp-file-plus-rename, so a failing run never leaves partial files.

Exit codes: 0 success, 1 operational error (bad paths, parse failures,
invalid config), 2 ingest found validation violations.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .allocation import (
    build_impact_matrix_dpos,
    build_impact_matrix_pow,
    extract_productions,
    extract_rewards,
)
from .election import EngineConfig, replay, snapshot_to_json
from .errors import DecentMeterError
from .events import parse_event_log, serialize_event_log, validate_event_log
from .fixedpoint import format_amount
from .metrics import (
    MetricConfig,
    capture_cost,
    mt_coefficient,
    normalize_rates,
    production_from_impact,
    production_matrix,
)
from .synth import SynthConfig, config_comment, generate_chain

SEED_ENV_VAR = "DECENT_METER_SEED"


class ConfigError(DecentMeterError):
    pass


@dataclass
class RunConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    metrics: MetricConfig = field(default_factory=MetricConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    mode: str = "dpos"
    input: str | None = None
    out: str = "out"
    jobs: int = 1
    emit_snapshots: bool = False
    figures: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("dpos", "pow"):
            raise ConfigError("mode must be 'dpos' or 'pow'")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


_SECTIONS = ("engine", "metrics", "synth")
_TOP_KEYS = _SECTIONS + ("mode", "input", "out", "jobs", "emit_snapshots", "figures")


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(config: dict, dotted: str) -> None:
    if "=" not in dotted:
        raise ConfigError(f"--set expects dotted.path=value, got {dotted!r}")
    path, _, raw = dotted.partition("=")
    keys = path.split(".")
    if not all(keys):
        raise ConfigError(f"--set has an empty path segment: {dotted!r}")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set path {path!r} crosses a non-object value")
    node[keys[-1]] = _parse_set_value(raw)


def _section(config: dict, name: str, cls):
    data = config.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError, DecentMeterError) as exc:
        raise ConfigError(f"invalid {name} config: {exc}") from exc


def load_run_config(args: argparse.Namespace) -> RunConfig:
    config: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            config = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    for dotted in getattr(args, "set", None) or []:
        _apply_override(config, dotted)

    unknown = set(config) - set(_TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    # Dedicated flags override both file and --set values.
    if getattr(args, "mode", None):
        config["mode"] = args.mode
        config.setdefault("synth", {})["mode"] = args.mode
    if getattr(args, "threshold", None) is not None:
        config.setdefault("metrics", {})["threshold"] = args.threshold
    if getattr(args, "top_l", None) is not None:
        config.setdefault("metrics", {})["top_l"] = args.top_l
    if getattr(args, "bucket_days", None) is not None:
        config.setdefault("metrics", {})["bucket_days"] = args.bucket_days
    if getattr(args, "committee_size", None) is not None:
        config.setdefault("engine", {})["committee_size"] = args.committee_size
        config.setdefault("synth", {})["committee_size"] = args.committee_size
    if getattr(args, "jobs", None) is not None:
        config["jobs"] = args.jobs
    if getattr(args, "out", None):
        config["out"] = args.out
    if getattr(args, "input", None):
        config["input"] = args.input
    if getattr(args, "seed", None) is not None:
        config.setdefault("synth", {})["seed"] = args.seed
    if getattr(args, "emit_snapshots", False):
        config["emit_snapshots"] = True
    if getattr(args, "figures", None) is not None:
        config["figures"] = args.figures

    # The environment seed outranks everything else.
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            config.setdefault("synth", {})["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from exc

    # Analyze mode and synth mode default to each other when only one is set.
    if "mode" in config and "mode" not in config.get("synth", {}):
        config.setdefault("synth", {})["mode"] = config["mode"]

    run = RunConfig(
        engine=_section(config, "engine", EngineConfig),
        metrics=_section(config, "metrics", MetricConfig),
        synth=_section(config, "synth", SynthConfig),
        mode=config.get("mode", "dpos"),
        input=config.get("input"),
        out=config.get("out", "out"),
        jobs=config.get("jobs", 1),
        emit_snapshots=bool(config.get("emit_snapshots", False)),
        figures=bool(config.get("figures", True)),
    )
    return run


def _write_outputs(out_dir: Path, outputs: dict[str, str | bytes]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, payload in outputs.items():
        final = out_dir / name
        tmp = out_dir / (name + ".tmp")
        if isinstance(payload, bytes):
            tmp.write_bytes(payload)
        else:
            with open(tmp, "w", newline="") as handle:
                handle.write(payload)
        os.replace(tmp, final)


def _read_log(input_path: str | None):
    if not input_path:
        raise ConfigError("no input path given (use --input or the config file)")
    path = Path(input_path)
    if not path.is_file():
        raise DecentMeterError(f"input file not found: {path}")
    return parse_event_log(path.read_text())


def cmd_ingest(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    log = _read_log(run.input)
    violations = validate_event_log(log)
    report_lines = ["index,kind"]
    report_lines.extend(f"{v.index},{v.kind}" for v in violations)
    outputs: dict[str, str | bytes] = {
        "normalized.jsonl": serialize_event_log(log),
        "violations.csv": "\n".join(report_lines) + "\n",
    }
    _write_outputs(Path(run.out), outputs)
    print(f"ingest: {len(log.events)} events, {len(violations)} violations")
    return 0 if not violations else 2


def _analyze_outputs(run: RunConfig) -> dict[str, str | bytes]:
    from . import figures

    log = _read_log(run.input)
    outputs: dict[str, str | bytes] = {}
    productions = extract_productions(log)
    if run.mode == "dpos":
        snapshots = replay(log, run.engine)
        impact = build_impact_matrix_dpos(snapshots, productions, run.engine)
        if run.emit_snapshots:
            outputs["snapshots.jsonl"] = "".join(snapshot_to_json(s) + "\n" for s in snapshots)
        seats_gov = min(run.metrics.approvals_needed, run.engine.committee_size)
        capture_rows = [
            (
                s.day,
                capture_cost(s, seats_gov, run.engine),
                capture_cost(s, run.engine.committee_size, run.engine),
            )
            for s in snapshots
        ]
        capture_lines = ["day,governance_capture,full_capture"]
        capture_lines.extend(
            f"{day},{format_amount(gov)},{format_amount(full)}" for day, gov, full in capture_rows
        )
        outputs["capture_cost.csv"] = "\n".join(capture_lines) + "\n"
        if run.figures and capture_rows:
            outputs["capture_cost.png"] = figures.render_capture_cost(capture_rows)
    else:
        impact = build_impact_matrix_pow(extract_rewards(log), days=log.horizon + 1)

    series = mt_coefficient(impact, run.metrics, jobs=run.jobs)
    producer_rates = normalize_rates(production_matrix(productions, run.metrics))
    individual_rates = normalize_rates(production_from_impact(impact, run.metrics))

    outputs["impact.csv"] = impact.to_csv()
    outputs["mt.csv"] = series.to_csv()
    outputs["heatmap_producers.csv"] = producer_rates.to_csv()
    outputs["heatmap_individuals.csv"] = individual_rates.to_csv()
    if run.figures:
        if series.values:
            outputs["mt.png"] = figures.render_mt_series(series)
        if producer_rates.values:
            outputs["heatmap_producers.png"] = figures.render_heatmap(producer_rates)
        if individual_rates.values:
            outputs["heatmap_individuals.png"] = figures.render_heatmap(individual_rates)
    return outputs


def cmd_analyze(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    outputs = _analyze_outputs(run)
    _write_outputs(Path(run.out), outputs)
    print(f"analyze: wrote {len(outputs)} files to {run.out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    run = load_run_config(args)
    log = generate_chain(run.synth)
    payload = config_comment(run.synth) + "\n" + serialize_event_log(log)
    _write_outputs(Path(run.out), {"events.jsonl": payload})
    print(f"synth: {len(log.events)} events, {run.synth.holders} holders, {run.synth.days} days")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decent-meter",
        description="Replay governance event logs and compute decentralization metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument(
            "--set",
            action="append",
            metavar="PATH=VALUE",
            help="override a config value by dotted path, e.g. synth.holders=50",
        )

    ingest = sub.add_parser("ingest", help="parse, validate and normalize an event log")
    add_common(ingest)
    ingest.add_argument("--input", help="event log (JSONL)")
    ingest.add_argument("--committee-size", type=int)

    analyze = sub.add_parser("analyze", help="replay a log and write metric reports")
    add_common(analyze)
    analyze.add_argument("--input", help="event log (JSONL)")
    analyze.add_argument("--mode", choices=("dpos", "pow"))
    analyze.add_argument("--threshold", help="impact share threshold in (0,1)")
    analyze.add_argument("--top-l", type=int, dest="top_l")
    analyze.add_argument("--bucket-days", type=int, dest="bucket_days")
    analyze.add_argument("--committee-size", type=int, dest="committee_size")
    analyze.add_argument("--jobs", type=int, help="parallel workers for per-day metrics")
    analyze.add_argument("--emit-snapshots", action="store_true", dest="emit_snapshots")
    analyze.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render PNG figures next to the CSV reports (default: on)",
    )

    synth = sub.add_parser("synth", help="generate a synthetic event log")
    add_common(synth)
    synth.add_argument("--mode", choices=("dpos", "pow"))
    synth.add_argument("--seed", type=int)
    synth.add_argument("--committee-size", type=int, dest="committee_size")

    sub.add_parser("version", help="print the package version")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    handlers = {"ingest": cmd_ingest, "analyze": cmd_analyze, "synth": cmd_synth}
    try:
        return handlers[args.command](args)
    except DecentMeterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
