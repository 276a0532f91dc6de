"""Replay of governance events into per-day election snapshots.

The engine folds events into a stake ledger (frozen balances, scheduled
withdrawals, liquid balances) and an election state (vote sets, proxy
edges, registered candidates). Snapshots are end-of-day copies plus the
committee ranking derived from them.

Rules enforced as hard errors here are the same ones validate_event_log
reports as advisory findings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping

from .errors import DecentMeterError
from .events import ChainEvent, EventKind, EventLog
from .fixedpoint import ZERO, format_amount, from_micro, to_micro

VOTE_CAP = 30
WITHDRAWAL_TRANCHES = 13
TRANCHE_INTERVAL_DAYS = 7


class ReplayError(DecentMeterError):
    pass


class InsufficientFrozenStake(ReplayError):
    pass


class VoteCapExceeded(ReplayError):
    pass


class UnregisteredCandidate(ReplayError):
    pass


class SelfProxy(ReplayError):
    pass


@dataclass
class EngineConfig:
    committee_size: int = 21
    max_proxy_depth: int = 16

    def __post_init__(self) -> None:
        if self.committee_size < 1:
            raise ValueError("committee_size must be >= 1")
        if self.max_proxy_depth < 1:
            raise ValueError("max_proxy_depth must be >= 1")


@dataclass
class StakeLedger:
    """Voting-power bookkeeping. Unfreezing removes power immediately; the
    13-tranche schedule only feeds the informational liquid balance."""

    frozen: dict[str, Decimal] = field(default_factory=dict)
    pending_withdrawals: dict[str, list[tuple[int, Decimal]]] = field(default_factory=dict)
    liquid: dict[str, Decimal] = field(default_factory=dict)

    def freeze(self, account: str, amount: Decimal) -> None:
        # liquid is an unconstrained source: it may go negative.
        self.liquid[account] = self.liquid.get(account, ZERO) - amount
        self.frozen[account] = self.frozen.get(account, ZERO) + amount

    def unfreeze(self, account: str, amount: Decimal, day: int) -> None:
        balance = self.frozen.get(account, ZERO)
        if amount > balance:
            raise InsufficientFrozenStake(
                f"{account} unfreezes {format_amount(amount)} with only {format_amount(balance)} frozen"
            )
        self.frozen[account] = balance - amount
        amount_micro = to_micro(amount)
        tranche_micro = amount_micro // WITHDRAWAL_TRANCHES
        last_micro = amount_micro - (WITHDRAWAL_TRANCHES - 1) * tranche_micro
        schedule = self.pending_withdrawals.setdefault(account, [])
        for i in range(1, WITHDRAWAL_TRANCHES + 1):
            release_day = day + i * TRANCHE_INTERVAL_DAYS
            micro = tranche_micro if i < WITHDRAWAL_TRANCHES else last_micro
            schedule.append((release_day, from_micro(micro)))

    def release_due(self, day: int) -> None:
        for account in list(self.pending_withdrawals):
            schedule = self.pending_withdrawals[account]
            due = [t for t in schedule if t[0] <= day]
            if not due:
                continue
            remaining = [t for t in schedule if t[0] > day]
            released = sum((amt for _, amt in due), ZERO)
            self.liquid[account] = self.liquid.get(account, ZERO) + released
            if remaining:
                self.pending_withdrawals[account] = remaining
            else:
                del self.pending_withdrawals[account]


@dataclass
class ElectionState:
    votes: dict[str, set[str]] = field(default_factory=dict)
    proxy: dict[str, str] = field(default_factory=dict)
    candidates: set[str] = field(default_factory=set)

    def register(self, account: str) -> None:
        self.candidates.add(account)

    def cast_vote(self, actor: str, target: str) -> None:
        if target not in self.candidates:
            raise UnregisteredCandidate(f"{actor} votes for unregistered {target}")
        current = self.votes.get(actor, set())
        if target not in current and len(current) >= VOTE_CAP:
            raise VoteCapExceeded(f"{actor} already holds {VOTE_CAP} votes")
        # Casting a vote dissolves any proxy appointment.
        self.proxy.pop(actor, None)
        self.votes.setdefault(actor, set()).add(target)

    def retract_vote(self, actor: str, target: str) -> None:
        current = self.votes.get(actor)
        if current is not None:
            current.discard(target)
            if not current:
                del self.votes[actor]

    def set_proxy(self, actor: str, target: str) -> None:
        if target == actor:
            raise SelfProxy(f"{actor} proxies to itself")
        # Appointing a proxy clears the actor's own votes.
        self.votes.pop(actor, None)
        self.proxy[actor] = target

    def clear_proxy(self, actor: str) -> None:
        self.proxy.pop(actor, None)


@dataclass(frozen=True)
class DailySnapshot:
    """End-of-day election state. Treat all containers as read-only."""

    day: int
    power: Mapping[str, Decimal]
    votes: Mapping[str, frozenset[str]]
    proxy: Mapping[str, str]
    candidates: frozenset[str]
    committee: tuple[tuple[str, Decimal], ...]


def _resolve(proxy: Mapping[str, str], account: str, max_depth: int) -> str | None:
    """Terminal of the proxy chain, or None on a cycle / over-deep chain."""
    current = account
    visited = {account}
    for _ in range(max_depth):
        nxt = proxy.get(current)
        if nxt is None:
            return current
        if nxt in visited:
            return None
        visited.add(nxt)
        current = nxt
    return current if proxy.get(current) is None else None


def _candidate_weights(
    power: Mapping[str, Decimal],
    votes: Mapping[str, frozenset[str] | set[str]],
    proxy: Mapping[str, str],
    candidates: Iterable[str],
    max_depth: int,
) -> dict[str, Decimal]:
    weights: dict[str, Decimal] = {c: ZERO for c in candidates}
    for account, held in power.items():
        if held <= 0:
            continue
        voter = _resolve(proxy, account, max_depth)
        if voter is None:
            continue
        for candidate in votes.get(voter, ()):
            # Approval voting: each vote carries the holder's full power.
            if candidate in weights:
                weights[candidate] = weights[candidate] + held
    return weights


def compute_committee(
    power: Mapping[str, Decimal],
    votes: Mapping[str, frozenset[str] | set[str]],
    proxy: Mapping[str, str],
    candidates: Iterable[str],
    cfg: EngineConfig,
) -> tuple[tuple[str, Decimal], ...]:
    """Top committee_size candidates by weight, ties broken by ascending id."""
    weights = _candidate_weights(power, votes, proxy, candidates, cfg.max_proxy_depth)
    ranked = sorted(weights.items(), key=lambda item: (-item[1], item[0]))
    return tuple(ranked[: cfg.committee_size])


def make_snapshot(
    day: int,
    power: Mapping[str, Decimal],
    votes: Mapping[str, frozenset[str] | set[str]],
    proxy: Mapping[str, str],
    candidates: Iterable[str],
    cfg: EngineConfig,
) -> DailySnapshot:
    """Freeze the given state into a snapshot with its committee ranking."""
    frozen_votes = {a: frozenset(s) for a, s in votes.items() if s}
    cand = frozenset(candidates)
    return DailySnapshot(
        day=day,
        power=dict(power),
        votes=frozen_votes,
        proxy=dict(proxy),
        candidates=cand,
        committee=compute_committee(power, frozen_votes, proxy, cand, cfg),
    )


class ReplayEngine:
    """Stateful, strictly sequential fold over governance events."""

    def __init__(self, cfg: EngineConfig | None = None):
        self.cfg = cfg or EngineConfig()
        self.ledger = StakeLedger()
        self.election = ElectionState()
        self._day = 0

    def advance_to(self, day: int) -> None:
        if day > self._day:
            self._day = day
        self.ledger.release_due(self._day)

    def apply_event(self, event: ChainEvent) -> None:
        self.advance_to(event.day)
        kind = event.kind
        if kind is EventKind.FREEZE_STAKE:
            self.ledger.freeze(event.actor, event.amount)
        elif kind is EventKind.UNFREEZE_STAKE:
            self.ledger.unfreeze(event.actor, event.amount, event.day)
        elif kind is EventKind.REGISTER_CANDIDATE:
            self.election.register(event.actor)
        elif kind is EventKind.CAST_VOTE:
            self.election.cast_vote(event.actor, event.target)
        elif kind is EventKind.RETRACT_VOTE:
            self.election.retract_vote(event.actor, event.target)
        elif kind is EventKind.SET_PROXY:
            self.election.set_proxy(event.actor, event.target)
        elif kind is EventKind.CLEAR_PROXY:
            self.election.clear_proxy(event.actor)
        # BlockProduced / ParticipantReward carry no election-state effect.

    def snapshot(self, day: int) -> DailySnapshot:
        return emit_snapshot(self, day)


def emit_snapshot(engine: ReplayEngine, day: int, cfg: EngineConfig | None = None) -> DailySnapshot:
    """Snapshot of the engine's current state as of end of `day`.

    Callers must have applied every event with event.day <= day; matured
    withdrawal tranches are released here before the copy is taken.
    """
    engine.advance_to(day)
    return make_snapshot(
        day,
        engine.ledger.frozen,
        engine.election.votes,
        engine.election.proxy,
        engine.election.candidates,
        cfg or engine.cfg,
    )


def replay(log: EventLog, cfg: EngineConfig | None = None) -> list[DailySnapshot]:
    """Emit one end-of-day snapshot for every day in [0, horizon]."""
    engine = ReplayEngine(cfg)
    snapshots: list[DailySnapshot] = []
    pos = 0
    events = log.events
    for day in range(log.horizon + 1):
        engine.advance_to(day)
        while pos < len(events) and events[pos].day == day:
            engine.apply_event(events[pos])
            pos += 1
        snapshots.append(engine.snapshot(day))
    return snapshots


def resolve_direct_voter(
    snapshot: DailySnapshot, account: str, cfg: EngineConfig | None = None
) -> str | None:
    cfg = cfg or EngineConfig()
    return _resolve(snapshot.proxy, account, cfg.max_proxy_depth)


def candidate_weight(
    snapshot: DailySnapshot, candidate: str, cfg: EngineConfig | None = None
) -> Decimal:
    cfg = cfg or EngineConfig()
    if candidate not in snapshot.candidates:
        raise UnregisteredCandidate(candidate)
    weights = _candidate_weights(
        snapshot.power, snapshot.votes, snapshot.proxy, [candidate], cfg.max_proxy_depth
    )
    return weights[candidate]


def snapshot_to_json(snapshot: DailySnapshot) -> str:
    """One-line JSON dump with decimals as text, keys sorted for determinism."""
    import json

    obj = {
        "day": snapshot.day,
        "power": {a: format_amount(v) for a, v in snapshot.power.items()},
        "votes": {a: sorted(s) for a, s in snapshot.votes.items()},
        "proxy": dict(snapshot.proxy),
        "committee": [[c, format_amount(w)] for c, w in snapshot.committee],
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
