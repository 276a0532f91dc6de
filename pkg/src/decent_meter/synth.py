"""Synthetic event-log generation plus brute-force test oracles.

Randomness comes from numpy's default PCG64 bit generator, a named,
portable 64-bit PRNG whose streams are identical across platforms for a
given seed. The chain generator uses one stream seeded with cfg.seed;
per-day production and reward draws use independent streams seeded with
[cfg.seed, stream_tag, day] so they do not depend on how many draws the
setup consumed.

The oracles at the bottom deliberately share no helper code with the
allocation or metrics modules: they re-derive proxy resolution, micro
conversion and proportional splitting from scratch so tests compare two
independent routes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from decimal import Decimal
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .allocation import DailyProduction
from .election import DailySnapshot, EngineConfig, ReplayEngine
from .errors import DecentMeterError
from .events import ChainEvent, EventKind, EventLog
from .fixedpoint import from_micro

SLOTS_PER_DAY = 28_800  # one block every 3 seconds
ORACLE_LIMIT = 20

_PRODUCTION_STREAM = 1
_REWARD_STREAM = 2


class InvalidConfig(DecentMeterError):
    pass


class EmptyCommittee(DecentMeterError):
    pass


class TooLarge(DecentMeterError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    holders: int = 100
    candidates: int = 30
    days: int = 10
    stake_zipf_s: float = 1.0
    proxy_prob: float = 0.0
    revote_prob: float = 0.0
    committee_size: int = 21
    seed: int = 0
    mode: str = "dpos"

    def __post_init__(self) -> None:
        if self.holders < 1:
            raise InvalidConfig("holders must be >= 1")
        if self.candidates < 1:
            raise InvalidConfig("candidates must be >= 1")
        if self.days < 0:
            raise InvalidConfig("days must be >= 0")
        if self.stake_zipf_s < 0:
            raise InvalidConfig("stake_zipf_s must be >= 0")
        if not (0 <= self.proxy_prob <= 1):
            raise InvalidConfig("proxy_prob must lie in [0, 1]")
        if not (0 <= self.revote_prob <= 1):
            raise InvalidConfig("revote_prob must lie in [0, 1]")
        if self.committee_size < 1:
            raise InvalidConfig("committee_size must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.mode not in ("dpos", "pow"):
            raise InvalidConfig("mode must be 'dpos' or 'pow'")


def config_comment(cfg: SynthConfig) -> str:
    """Leading fixture comment recording the generating config."""
    return "#cfg:" + json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))


def _account_ids(prefix: str, count: int) -> list[str]:
    width = len(str(count))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def _zipf_micro(rank: int, s: float) -> int:
    # Base grant of 1000 units scaled by rank^(-s); floor of one micro so
    # every holder retains positive power.
    return max(1, round(1_000_000_000 * (rank + 1) ** (-s)))


def simulate_production(
    committee: Sequence, day: int, cfg: SynthConfig
) -> DailyProduction:
    """Deal 28,800 block slots in rounds over the committee.

    Every full round gives each member exactly one block, so only the
    final partial round needs the seeded shuffle: its first (slots mod
    len) members in shuffled order get one extra block. Counts therefore
    differ by at most 1 within a day.
    """
    if not committee:
        raise EmptyCommittee("cannot produce blocks with an empty committee")
    members = [m[0] if isinstance(m, tuple) else m for m in committee]
    full, extra = divmod(SLOTS_PER_DAY, len(members))
    counts = {m: full for m in members}
    if extra:
        rng = np.random.default_rng([cfg.seed, _PRODUCTION_STREAM, day])
        for idx in rng.permutation(len(members))[:extra]:
            counts[members[int(idx)]] += 1
    produced = {m: Decimal(counts[m]) for m in members}
    return DailyProduction(day=day, produced=produced)


def _setup_events_dpos(
    cfg: SynthConfig, rng: np.random.Generator, holders: list[str], candidates: list[str]
) -> tuple[list[ChainEvent], dict[str, set[str]]]:
    events: list[ChainEvent] = []
    seq = 0
    for candidate in candidates:
        events.append(
            ChainEvent(day=0, seq=seq, kind=EventKind.REGISTER_CANDIDATE, actor=candidate)
        )
        seq += 1
    for i, holder in enumerate(holders):
        amount = from_micro(_zipf_micro(i, cfg.stake_zipf_s))
        events.append(
            ChainEvent(day=0, seq=seq, kind=EventKind.FREEZE_STAKE, actor=holder, amount=amount)
        )
        seq += 1
    votes: dict[str, set[str]] = {}
    k = min(30, cfg.committee_size, cfg.candidates)
    for i, holder in enumerate(holders):
        # Holder 0 always votes directly so the committee is never empty;
        # proxies point to lower-index holders only, which rules out cycles.
        if i > 0 and rng.random() < cfg.proxy_prob:
            target = holders[int(rng.integers(0, i))]
            events.append(
                ChainEvent(day=0, seq=seq, kind=EventKind.SET_PROXY, actor=holder, target=target)
            )
            seq += 1
            continue
        picks = sorted(candidates[int(j)] for j in rng.choice(cfg.candidates, size=k, replace=False))
        votes[holder] = set(picks)
        for target in picks:
            events.append(
                ChainEvent(day=0, seq=seq, kind=EventKind.CAST_VOTE, actor=holder, target=target)
            )
            seq += 1
    return events, votes


def _revote_events(
    cfg: SynthConfig,
    rng: np.random.Generator,
    day: int,
    seq: int,
    holders: list[str],
    candidates: list[str],
    votes: dict[str, set[str]],
) -> tuple[list[ChainEvent], int]:
    events: list[ChainEvent] = []
    k = min(30, cfg.committee_size, cfg.candidates)
    for holder in holders:
        if holder not in votes:
            continue
        if rng.random() >= cfg.revote_prob:
            continue
        fresh = {candidates[int(j)] for j in rng.choice(cfg.candidates, size=k, replace=False)}
        old = votes[holder]
        # Retract before casting so the live vote set never exceeds k.
        for target in sorted(old - fresh):
            events.append(
                ChainEvent(day=day, seq=seq, kind=EventKind.RETRACT_VOTE, actor=holder, target=target)
            )
            seq += 1
        for target in sorted(fresh - old):
            events.append(
                ChainEvent(day=day, seq=seq, kind=EventKind.CAST_VOTE, actor=holder, target=target)
            )
            seq += 1
        votes[holder] = fresh
    return events, seq


def _generate_dpos(cfg: SynthConfig) -> EventLog:
    rng = np.random.default_rng(cfg.seed)
    holders = _account_ids("h", cfg.holders)
    candidates = _account_ids("c", cfg.candidates)
    events, votes = _setup_events_dpos(cfg, rng, holders, candidates)
    engine = ReplayEngine(EngineConfig(committee_size=cfg.committee_size))
    for event in events:
        engine.apply_event(event)
    for day in range(1, cfg.days):
        committee = engine.snapshot(day - 1).committee
        day_events, seq = _revote_events(cfg, rng, day, 0, holders, candidates, votes)
        production = simulate_production(committee, day, cfg)
        for producer in sorted(production.produced):
            day_events.append(
                ChainEvent(
                    day=day,
                    seq=seq,
                    kind=EventKind.BLOCK_PRODUCED,
                    actor=producer,
                    target=producer,
                    amount=production.produced[producer],
                )
            )
            seq += 1
        for event in day_events:
            engine.apply_event(event)
        events.extend(day_events)
    horizon = events[-1].day if events else 0
    return EventLog(events=tuple(events), horizon=horizon)


def _generate_pow(cfg: SynthConfig) -> EventLog:
    participants = _account_ids("h", cfg.holders)
    pools = _account_ids("p", cfg.candidates)
    events: list[ChainEvent] = []
    for day in range(1, cfg.days):
        rng = np.random.default_rng([cfg.seed, _REWARD_STREAM, day])
        for i, participant in enumerate(participants):
            noise = 0.9 + 0.2 * rng.random()
            micro = max(1, round(1_000_000_000 * (i + 1) ** (-cfg.stake_zipf_s) * noise))
            events.append(
                ChainEvent(
                    day=day,
                    seq=i,
                    kind=EventKind.PARTICIPANT_REWARD,
                    actor=participant,
                    target=pools[i % cfg.candidates],
                    amount=from_micro(micro),
                )
            )
    horizon = events[-1].day if events else 0
    return EventLog(events=tuple(events), horizon=horizon)


def generate_chain(cfg: SynthConfig) -> EventLog:
    """Deterministic synthetic event log; see module docstring for the
    stream layout. DPoS mode: day 0 registers candidates, freezes
    Zipf-distributed stakes and casts initial votes or proxies; each
    later day carries optional revotes plus that day's block production
    by the committee elected the previous day. PoW mode: per-day
    Zipf-distributed pool payouts with 10% multiplicative noise."""
    if cfg.mode == "pow":
        return _generate_pow(cfg)
    return _generate_dpos(cfg)


def oracle_min_subset(values: Sequence[Decimal], threshold) -> int:
    """Exhaustive minimum subset size with sum strictly above threshold.

    threshold is an absolute quantity (already scaled), not a fraction.
    Returns len(values) + 1 as the NotAchievable sentinel when no subset
    qualifies. Exponential: refuses more than 20 values.
    """
    if len(values) > ORACLE_LIMIT:
        raise TooLarge(f"{len(values)} values; oracle limit is {ORACLE_LIMIT}")
    bound = Fraction(threshold)
    exact = sorted((Fraction(v) for v in values), reverse=True)
    if 0 > bound:
        return 0
    for k in range(1, len(exact) + 1):
        for combo in combinations(exact, k):
            if sum(combo) > bound:
                return k
    return len(values) + 1


def oracle_allocation(
    snapshot: DailySnapshot, production: DailyProduction
) -> dict[str, Decimal]:
    """Naive reference allocation, re-derived from first principles.

    Walks proxy chains step by step (16-hop budget, matching the engine
    default), splits each producer's blocks with Fraction arithmetic,
    floors to micro-units and hands the flooring remainder to the
    largest-power supporter, ties broken by ascending id. Test-only.
    """

    def walk(account: str) -> str | None:
        seen = {account}
        node = account
        for _ in range(16):
            step = snapshot.proxy.get(node)
            if step is None:
                return node
            if step in seen:
                return None
            seen.add(step)
            node = step
        return node if snapshot.proxy.get(node) is None else None

    def micro(value: Decimal) -> int:
        scaled = value.scaleb(6)
        assert scaled == int(scaled)
        return int(scaled)

    totals: dict[str, int] = {}
    for producer in sorted(production.produced):
        blocks = micro(production.produced[producer])
        if blocks == 0 or producer not in snapshot.candidates:
            continue
        supporters: dict[str, int] = {}
        for account, held in snapshot.power.items():
            if held <= 0:
                continue
            voter = walk(account)
            if voter is not None and producer in snapshot.votes.get(voter, ()):
                supporters[account] = micro(held)
        weight = sum(supporters.values())
        if weight == 0:
            continue
        handed = 0
        for account, held_micro in supporters.items():
            exact = Fraction(blocks) * Fraction(held_micro, weight)
            floored = exact.numerator // exact.denominator
            handed += floored
            if floored:
                totals[account] = totals.get(account, 0) + floored
        leftover = blocks - handed
        if leftover:
            best = min(supporters, key=lambda a: (-supporters[a], a))
            totals[best] = totals.get(best, 0) + leftover
    return {a: Decimal(m).scaleb(-6).quantize(Decimal("0.000001")) for a, m in totals.items()}
