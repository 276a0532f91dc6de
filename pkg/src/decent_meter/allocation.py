"""Individual impact matrices.

DPoS: blocks produced by committee members are pushed down to the coin
holders whose (possibly proxied) votes elected them, proportional to
frozen stake. PoW: per-day pool payouts to participants are taken as
impact directly. Either way the result is an ImpactMatrix with one row
per individual and one column per day.

All splits run on integer micro-units so conservation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from .errors import DecentMeterError
from .election import DailySnapshot, EngineConfig, UnregisteredCandidate, _resolve
from .events import ChainEvent, EventKind, EventLog
from .fixedpoint import ZERO, format_amount, from_micro, to_micro


class DayMismatch(DecentMeterError):
    pass


class MisalignedDays(DecentMeterError):
    pass


class WrongEventKind(DecentMeterError):
    pass


@dataclass(frozen=True)
class DailyProduction:
    day: int
    produced: Mapping[str, Decimal]

    def __post_init__(self) -> None:
        for producer, count in self.produced.items():
            if count < 0:
                raise ValueError(f"negative production for {producer}")


@dataclass(frozen=True)
class DayAllocation:
    """Per-holder block shares for one day plus the unallocatable residual
    (blocks from producers nobody with power supports)."""

    day: int
    shares: Mapping[str, Decimal]
    residual: Decimal


@dataclass(frozen=True)
class ImpactMatrix:
    individuals: tuple[str, ...]
    days: int
    values: tuple[tuple[Decimal, ...], ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.individuals):
            raise ValueError("row count does not match individuals")
        for row in self.values:
            if len(row) != self.days:
                raise ValueError("column count does not match day span")
            for v in row:
                if v < 0:
                    raise ValueError("negative impact value")

    def column(self, day: int) -> dict[str, Decimal]:
        return {ind: self.values[i][day] for i, ind in enumerate(self.individuals)}

    def to_csv(self) -> str:
        header = "account"
        if self.days:
            header += "," + ",".join(f"d{j}" for j in range(self.days))
        lines = [header]
        for ind, row in zip(self.individuals, self.values):
            lines.append(ind + "," + ",".join(format_amount(v) for v in row))
        return "\n".join(lines) + "\n"


def supportive_holders(
    snapshot: DailySnapshot, candidate: str, cfg: EngineConfig | None = None
) -> dict[str, Decimal]:
    """Every positive-power account whose resolved direct voter voted for
    candidate, mapped to its full power."""
    cfg = cfg or EngineConfig()
    if candidate not in snapshot.candidates:
        raise UnregisteredCandidate(candidate)
    holders: dict[str, Decimal] = {}
    for account, held in snapshot.power.items():
        if held <= 0:
            continue
        voter = _resolve(snapshot.proxy, account, cfg.max_proxy_depth)
        if voter is None:
            continue
        if candidate in snapshot.votes.get(voter, ()):
            holders[account] = held
    return holders


def allocate_dpos_day(
    snapshot: DailySnapshot, production: DailyProduction, cfg: EngineConfig | None = None
) -> DayAllocation:
    """Split each producer's blocks across its supportive holders by power.

    Shares are floored to micro-units; the flooring remainder goes to the
    largest-power holder (ties broken by ascending id) so that
    sum(shares) + residual == sum(produced) holds exactly.
    """
    cfg = cfg or EngineConfig()
    if production.day != snapshot.day:
        raise DayMismatch(f"production day {production.day} vs snapshot day {snapshot.day}")
    totals_micro: dict[str, int] = {}
    residual_micro = 0
    for producer in sorted(production.produced):
        produced_micro = to_micro(production.produced[producer])
        if produced_micro == 0:
            continue
        if producer not in snapshot.candidates:
            residual_micro += produced_micro
            continue
        holders = supportive_holders(snapshot, producer, cfg)
        weight_micro = sum(to_micro(p) for p in holders.values())
        if weight_micro == 0:
            residual_micro += produced_micro
            continue
        assigned = 0
        for account in sorted(holders):
            share = produced_micro * to_micro(holders[account]) // weight_micro
            assigned += share
            if share:
                totals_micro[account] = totals_micro.get(account, 0) + share
        remainder = produced_micro - assigned
        if remainder:
            top = min(holders, key=lambda a: (-to_micro(holders[a]), a))
            totals_micro[top] = totals_micro.get(top, 0) + remainder
    shares = {a: from_micro(m) for a, m in totals_micro.items()}
    return DayAllocation(day=production.day, shares=shares, residual=from_micro(residual_micro))


def _order_individuals(totals: Mapping[str, Decimal]) -> tuple[str, ...]:
    # Row order: total impact descending, then ascending id.
    return tuple(sorted(totals, key=lambda a: (-totals[a], a)))


def _assemble(per_day: Sequence[Mapping[str, Decimal]]) -> ImpactMatrix:
    totals: dict[str, Decimal] = {}
    for shares in per_day:
        for account, value in shares.items():
            if value > 0:
                totals[account] = totals.get(account, ZERO) + value
    individuals = _order_individuals(totals)
    values = tuple(
        tuple(shares.get(ind, ZERO) for shares in per_day) for ind in individuals
    )
    return ImpactMatrix(individuals=individuals, days=len(per_day), values=values)


def build_impact_matrix_dpos(
    snapshots: Sequence[DailySnapshot],
    productions: Sequence[DailyProduction],
    cfg: EngineConfig | None = None,
) -> ImpactMatrix:
    if len(snapshots) != len(productions) or any(
        s.day != p.day for s, p in zip(snapshots, productions)
    ):
        raise MisalignedDays("snapshots and productions must cover the same days")
    allocations = [
        allocate_dpos_day(s, p, cfg).shares for s, p in zip(snapshots, productions)
    ]
    return _assemble(allocations)


def build_impact_matrix_pow(
    rewards: Iterable[ChainEvent], days: int | None = None
) -> ImpactMatrix:
    """Impact = per-day reward totals by participant (event actor).

    days pads the column span; by default it is last reward day + 1.
    """
    events = list(rewards)
    for event in events:
        if event.kind is not EventKind.PARTICIPANT_REWARD:
            raise WrongEventKind(f"expected ParticipantReward, got {event.kind.value}")
    span = days if days is not None else (events[-1].day + 1 if events else 0)
    per_day: list[dict[str, Decimal]] = [{} for _ in range(span)]
    for event in events:
        bucket = per_day[event.day]
        bucket[event.actor] = bucket.get(event.actor, ZERO) + event.amount
    return _assemble(per_day)


def extract_productions(log: EventLog) -> list[DailyProduction]:
    """Dense per-day block counts from BlockProduced events, one entry per
    day in [0, horizon]. The producer is the target when present."""
    per_day: list[dict[str, Decimal]] = [{} for _ in range(log.horizon + 1)]
    for event in log.events:
        if event.kind is not EventKind.BLOCK_PRODUCED:
            continue
        producer = event.target if event.target is not None else event.actor
        bucket = per_day[event.day]
        bucket[producer] = bucket.get(producer, ZERO) + event.amount
    return [DailyProduction(day=d, produced=m) for d, m in enumerate(per_day)]


def extract_rewards(log: EventLog) -> list[ChainEvent]:
    return [e for e in log.events if e.kind is EventKind.PARTICIPANT_REWARD]
