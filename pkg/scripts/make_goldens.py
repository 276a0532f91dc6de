#!/usr/bin/env python3
"""Regenerate committed fixtures, goldens and frozen scenario expectations.

Run from the repository root:

    python3 scripts/make_goldens.py

Everything written here is a pure function of the configs below, so a
rerun on a clean tree must be a no-op (git diff stays empty). Scenario
expectations are computed with self-contained Fraction arithmetic over
the raw event logs, NOT with the library's metric implementations, so
the frozen numbers constitute an independent cross-check.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from decent_meter import parse_event_log, serialize_event_log  # noqa: E402
from decent_meter.cli import _analyze_outputs, RunConfig  # noqa: E402
from decent_meter.election import EngineConfig  # noqa: E402
from decent_meter.metrics import MetricConfig  # noqa: E402
from decent_meter.synth import SynthConfig, config_comment, generate_chain  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures" / "v1"

TINY_CFG = SynthConfig(holders=4, candidates=3, days=2, committee_size=3, seed=1)

SEED42_CFG = SynthConfig(
    holders=50,
    candidates=25,
    days=8,
    stake_zipf_s=1.5,
    proxy_prob=0.2,
    revote_prob=0.1,
    committee_size=21,
    seed=42,
)

HEATMAP_DPOS = SynthConfig(
    holders=200, candidates=21, days=91, stake_zipf_s=1.0, committee_size=21, seed=4242
)
HEATMAP_POW = SynthConfig(
    holders=200, candidates=10, days=91, stake_zipf_s=1.2, seed=4242, mode="pow"
)

CROSS_DPOS = SynthConfig(
    holders=1000,
    candidates=25,
    days=30,
    stake_zipf_s=1.5,
    proxy_prob=0.1,
    revote_prob=0.05,
    committee_size=21,
    seed=777,
)
CROSS_POW = SynthConfig(holders=1000, candidates=10, days=30, stake_zipf_s=0.5, seed=777, mode="pow")


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path.relative_to(REPO)}")


def synth_payload(cfg: SynthConfig) -> str:
    return config_comment(cfg) + "\n" + serialize_event_log(generate_chain(cfg))


# --- independent expectation arithmetic (no library metric code) -----------


def frac(text: str) -> Fraction:
    return Fraction(text)


def csv_matrix(text: str) -> tuple[list[str], list[list[Fraction]]]:
    lines = text.strip().splitlines()
    ids, rows = [], []
    for line in lines[1:]:
        cells = line.split(",")
        ids.append(cells[0])
        rows.append([frac(c) for c in cells[1:]])
    return ids, rows


def greedy_cover(column: list[Fraction], threshold: Fraction) -> int:
    total = sum(column)
    if total == 0:
        return 0
    running = Fraction(0)
    for k, value in enumerate(sorted(column, reverse=True), start=1):
        running += value
        if running > threshold * total:
            return k
    return len(column)


def mean_mt_from_impact_csv(text: str) -> Fraction:
    _, rows = csv_matrix(text)
    if not rows:
        return Fraction(0)
    days = len(rows[0])
    total = 0
    for j in range(days):
        total += greedy_cover([row[j] for row in rows], Fraction(1, 2))
    return Fraction(total, days)


def bucket_sums_from_log(payload: str, kind: str, bucket_days: int) -> dict[str, dict[int, Fraction]]:
    sums: dict[str, dict[int, Fraction]] = {}
    for line in payload.splitlines():
        if not line or line.startswith("#"):
            continue
        obj = json.loads(line)
        if obj["kind"] != kind:
            continue
        who = obj["target"] if kind == "BlockProduced" else obj["actor"]
        bucket = obj["day"] // bucket_days
        per = sums.setdefault(who, {})
        per[bucket] = per.get(bucket, Fraction(0)) + frac(obj["amount"])
    return sums


def heatmap_expectations() -> dict:
    bucket_days = MetricConfig().bucket_days
    top_l = MetricConfig().top_l

    dpos_payload = synth_payload(HEATMAP_DPOS)
    sums = bucket_sums_from_log(dpos_payload, "BlockProduced", bucket_days)
    assert len(sums) == HEATMAP_DPOS.committee_size
    buckets = max(b for per in sums.values() for b in per) + 1
    worst = Fraction(0)
    for b in range(buckets):
        col = [per.get(b, Fraction(0)) for per in sums.values()]
        spread = (max(col) - min(col)) / max(col)
        worst = max(worst, spread)

    pow_payload = synth_payload(HEATMAP_POW)
    sums = bucket_sums_from_log(pow_payload, "ParticipantReward", bucket_days)
    totals = {who: sum(per.values()) for who, per in sums.items()}
    ranked = sorted(totals, key=lambda w: (-totals[w], w))[:top_l]
    peak = max(v for who in ranked for v in sums[who].values())
    below_half = 0
    for who in ranked:
        row = [sums[who].get(b, Fraction(0)) for b in range(buckets)]
        if all(v < peak / 2 for v in row):
            below_half += 1

    return {
        "dpos": asdict(HEATMAP_DPOS),
        "pow": asdict(HEATMAP_POW),
        "expected": {
            "dpos_max_bucket_spread": str(worst),
            "pow_rows_below_half": below_half,
            "top_l": top_l,
        },
    }


def cross_expectations() -> dict:
    results = {}
    for name, cfg in (("dpos", CROSS_DPOS), ("pow", CROSS_POW)):
        payload = synth_payload(cfg)
        log_path = FIXTURES / f"_tmp_{name}.jsonl"
        write(log_path, payload)
        run = RunConfig(
            engine=EngineConfig(committee_size=cfg.committee_size),
            metrics=MetricConfig(),
            synth=cfg,
            mode=cfg.mode,
            input=str(log_path),
            out="unused",
            figures=False,
        )
        outputs = _analyze_outputs(run)
        results[name] = mean_mt_from_impact_csv(outputs["impact.csv"])
        log_path.unlink()
        print(f"cross-consensus {name}: mean MT = {results[name]} "
              f"(~{float(results[name]):.2f})")
    assert results["dpos"] < results["pow"]
    return {
        "dpos": asdict(CROSS_DPOS),
        "pow": asdict(CROSS_POW),
        "expected": {
            "dpos_mean": str(results["dpos"]),
            "pow_mean": str(results["pow"]),
        },
    }


def main() -> None:
    write(FIXTURES / "seed1_tiny.jsonl", synth_payload(TINY_CFG))

    seed42_payload = synth_payload(SEED42_CFG)
    write(FIXTURES / "seed42" / "events.jsonl", seed42_payload)

    run = RunConfig(
        engine=EngineConfig(committee_size=SEED42_CFG.committee_size),
        metrics=MetricConfig(),
        synth=SEED42_CFG,
        mode="dpos",
        input=str(FIXTURES / "seed42" / "events.jsonl"),
        out="unused",
        emit_snapshots=True,
        figures=False,
    )
    outputs = _analyze_outputs(run)
    for name in sorted(outputs):
        if name.endswith(".png"):
            continue
        write(FIXTURES / "seed42" / "golden" / name, outputs[name])

    # Sanity: the committed fixture parses and the tiny golden is stable.
    parse_event_log((FIXTURES / "seed42" / "events.jsonl").read_text())
    parse_event_log((FIXTURES / "seed1_tiny.jsonl").read_text())

    scenarios = {
        "heatmap": heatmap_expectations(),
        "cross_consensus": cross_expectations(),
    }
    write(FIXTURES / "scenarios.json", json.dumps(scenarios, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
