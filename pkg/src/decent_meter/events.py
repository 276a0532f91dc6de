"""Canonical event-log schema: parsing, validation and serialization.

Wire format is UTF-8 JSON lines. Each record carries exactly the fields

    {"day": int, "seq": int, "kind": str, "actor": str,
     "target": str (optional), "amount": str (optional)}

with ``amount`` as plain decimal text ("10.500000", six fractional digits
at most, no sign, no exponent). Lines starting with ``#`` are comments and
blank lines are ignored; both are dropped on re-serialization. Records must
be strictly ascending by (day, seq) -- out-of-order input is rejected, not
reordered.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from decimal import Decimal
from typing import IO, Iterable

from .errors import DecentMeterError
from .fixedpoint import format_amount, parse_amount, quantize

MAX_ACCOUNT_LEN = 64
_ACCOUNT_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789.-")


class EventKind(str, enum.Enum):
    FREEZE_STAKE = "FreezeStake"
    UNFREEZE_STAKE = "UnfreezeStake"
    REGISTER_CANDIDATE = "RegisterCandidate"
    CAST_VOTE = "CastVote"
    RETRACT_VOTE = "RetractVote"
    SET_PROXY = "SetProxy"
    CLEAR_PROXY = "ClearProxy"
    BLOCK_PRODUCED = "BlockProduced"
    PARTICIPANT_REWARD = "ParticipantReward"


KINDS_REQUIRING_AMOUNT = frozenset(
    {
        EventKind.FREEZE_STAKE,
        EventKind.UNFREEZE_STAKE,
        EventKind.BLOCK_PRODUCED,
        EventKind.PARTICIPANT_REWARD,
    }
)
KINDS_REQUIRING_TARGET = frozenset(
    {
        EventKind.CAST_VOTE,
        EventKind.RETRACT_VOTE,
        EventKind.SET_PROXY,
        EventKind.PARTICIPANT_REWARD,
    }
)

_FIELD_ORDER = ("day", "seq", "kind", "actor", "target", "amount")
_KNOWN_FIELDS = frozenset(_FIELD_ORDER)


class ParseError(DecentMeterError):
    """Base for event-file rejections; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedLine(ParseError):
    pass


class OutOfOrder(ParseError):
    def __init__(self, line: int):
        super().__init__("records not strictly ascending by (day, seq)", line)


class SchemaViolation(ParseError):
    def __init__(self, field_name: str, line: int, detail: str = ""):
        suffix = f": {detail}" if detail else ""
        super().__init__(f"field {field_name!r} violates schema{suffix}", line)
        self.field = field_name


def is_valid_account(account: str) -> bool:
    return (
        isinstance(account, str)
        and 0 < len(account) <= MAX_ACCOUNT_LEN
        and set(account) <= _ACCOUNT_CHARS
    )


@dataclass(frozen=True)
class ChainEvent:
    """One governance or production record, normalized to the 6-digit grid."""

    day: int
    seq: int
    kind: EventKind
    actor: str
    target: str | None = None
    amount: Decimal | None = None

    def __post_init__(self) -> None:
        if self.day < 0 or self.seq < 0:
            raise ValueError("day and seq must be non-negative")
        if not is_valid_account(self.actor):
            raise ValueError(f"bad actor id: {self.actor!r}")
        if self.target is not None and not is_valid_account(self.target):
            raise ValueError(f"bad target id: {self.target!r}")
        if self.kind in KINDS_REQUIRING_TARGET and self.target is None:
            raise ValueError(f"{self.kind.value} requires a target")
        if self.kind in KINDS_REQUIRING_AMOUNT and self.amount is None:
            raise ValueError(f"{self.kind.value} requires an amount")
        if self.kind is EventKind.SET_PROXY and self.target == self.actor:
            raise ValueError("SetProxy must not target the actor itself")
        if self.amount is not None:
            if self.amount < 0:
                raise ValueError("amount must be non-negative")
            object.__setattr__(self, "amount", quantize(self.amount))


@dataclass(frozen=True)
class EventLog:
    """Immutable, strictly (day, seq)-ordered event sequence."""

    events: tuple[ChainEvent, ...] = ()
    horizon: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        prev: tuple[int, int] | None = None
        for ev in self.events:
            key = (ev.day, ev.seq)
            if prev is not None and key <= prev:
                raise ValueError(f"events out of order at (day={ev.day}, seq={ev.seq})")
            prev = key
        if self.events and self.horizon < self.events[-1].day:
            raise ValueError("horizon below last event day")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")


@dataclass(frozen=True)
class Violation:
    """One advisory finding from validate_event_log."""

    index: int
    kind: str


def _iter_lines(source: bytes | str | IO | Iterable[str]) -> Iterable[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").splitlines()
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return data.splitlines()
    return source


def _parse_line(raw: str, lineno: int) -> ChainEvent:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedLine(f"invalid JSON ({exc.msg})", lineno) from exc
    if not isinstance(obj, dict):
        raise MalformedLine("record is not a JSON object", lineno)

    unknown = set(obj) - _KNOWN_FIELDS
    if unknown:
        raise SchemaViolation(sorted(unknown)[0], lineno, "unknown field")
    for name in ("day", "seq", "kind", "actor"):
        if name not in obj:
            raise SchemaViolation(name, lineno, "missing")

    day, seq = obj["day"], obj["seq"]
    for name, value in (("day", day), ("seq", seq)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise SchemaViolation(name, lineno, "must be a non-negative integer")

    try:
        kind = EventKind(obj["kind"])
    except ValueError:
        raise SchemaViolation("kind", lineno, f"unknown kind {obj['kind']!r}") from None

    actor = obj["actor"]
    if not is_valid_account(actor):
        raise SchemaViolation("actor", lineno, "bad account id")

    target = obj.get("target")
    if target is not None and not is_valid_account(target):
        raise SchemaViolation("target", lineno, "bad account id")
    if kind in KINDS_REQUIRING_TARGET and target is None:
        raise SchemaViolation("target", lineno, f"required for {kind.value}")
    if kind is EventKind.SET_PROXY and target == actor:
        raise SchemaViolation("target", lineno, "proxy target equals actor")

    amount_text = obj.get("amount")
    amount: Decimal | None = None
    if amount_text is not None:
        try:
            amount = parse_amount(amount_text)
        except ValueError:
            raise SchemaViolation("amount", lineno, "bad decimal text") from None
    elif kind in KINDS_REQUIRING_AMOUNT:
        raise SchemaViolation("amount", lineno, f"required for {kind.value}")

    return ChainEvent(day=day, seq=seq, kind=kind, actor=actor, target=target, amount=amount)


def parse_event_log(source: bytes | str | IO | Iterable[str]) -> EventLog:
    """Parse line-delimited records into an EventLog, rejecting bad input.

    Raises MalformedLine / SchemaViolation / OutOfOrder with the offending
    physical line number (comments and blank lines still count).
    """
    events: list[ChainEvent] = []
    prev: tuple[int, int] | None = None
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        ev = _parse_line(stripped, lineno)
        key = (ev.day, ev.seq)
        if prev is not None and key <= prev:
            raise OutOfOrder(lineno)
        prev = key
        events.append(ev)
    horizon = events[-1].day if events else 0
    return EventLog(events=tuple(events), horizon=horizon)


def event_to_json(event: ChainEvent) -> str:
    obj: dict[str, object] = {"day": event.day, "seq": event.seq, "kind": event.kind.value, "actor": event.actor}
    if event.target is not None:
        obj["target"] = event.target
    if event.amount is not None:
        obj["amount"] = format_amount(event.amount)
    return json.dumps(obj, separators=(",", ":"))


def serialize_event_log(log: EventLog) -> str:
    """Canonical JSONL text; parse_event_log(serialize_event_log(log)) == log."""
    return "".join(event_to_json(ev) + "\n" for ev in log.events)


def validate_event_log(log: EventLog) -> list[Violation]:
    """Advisory semantic check: replays the log, collecting the violations the
    replay engine would raise, and skipping each violating event's effect.

    Pure: the log is not mutated, and the result does not depend on horizon
    padding. An empty list means the log replays cleanly.
    """
    from .election import EngineConfig, ReplayEngine, ReplayError

    engine = ReplayEngine(EngineConfig())
    report: list[Violation] = []
    for index, event in enumerate(log.events):
        try:
            engine.apply_event(event)
        except ReplayError as exc:
            report.append(Violation(index=index, kind=type(exc).__name__))
    return report
