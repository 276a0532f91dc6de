import json
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decent_meter import (
    ChainEvent,
    EventKind,
    EventLog,
    MalformedLine,
    OutOfOrder,
    ParseError,
    SchemaViolation,
    Violation,
    parse_event_log,
    serialize_event_log,
    validate_event_log,
)


def line(day, seq, kind, actor, **extra):
    obj = {"day": day, "seq": seq, "kind": kind, "actor": actor}
    obj.update(extra)
    return json.dumps(obj)


class TestParse:
    def test_empty_input(self):
        log = parse_event_log("")
        assert log.events == ()
        assert log.horizon == 0

    def test_single_record(self):
        log = parse_event_log(line(0, 0, "FreezeStake", "a", amount="10"))
        assert len(log.events) == 1
        assert log.horizon == 0
        ev = log.events[0]
        assert ev.kind is EventKind.FREEZE_STAKE
        assert ev.amount == Decimal("10")

    def test_out_of_order_reports_line_two(self):
        text = line(1, 0, "RegisterCandidate", "a") + "\n" + line(0, 0, "RegisterCandidate", "b")
        with pytest.raises(OutOfOrder) as err:
            parse_event_log(text)
        assert err.value.line == 2

    def test_duplicate_key_rejected(self):
        text = line(0, 3, "RegisterCandidate", "a") + "\n" + line(0, 3, "RegisterCandidate", "b")
        with pytest.raises(OutOfOrder):
            parse_event_log(text)

    def test_comments_and_blanks_skipped_but_counted(self):
        text = "\n".join(
            [
                '#cfg:{"seed":1}',
                "",
                line(0, 0, "RegisterCandidate", "a"),
                "not json at all",
            ]
        )
        with pytest.raises(MalformedLine) as err:
            parse_event_log(text)
        assert err.value.line == 4

    def test_unknown_field_rejected(self):
        with pytest.raises(SchemaViolation) as err:
            parse_event_log(line(0, 0, "RegisterCandidate", "a", note="hi"))
        assert err.value.field == "note"

    def test_missing_required_field(self):
        with pytest.raises(SchemaViolation) as err:
            parse_event_log('{"day":0,"seq":0,"kind":"RegisterCandidate"}')
        assert err.value.field == "actor"

    def test_bool_day_rejected(self):
        with pytest.raises(SchemaViolation):
            parse_event_log('{"day":true,"seq":0,"kind":"RegisterCandidate","actor":"a"}')

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaViolation) as err:
            parse_event_log(line(0, 0, "Mint", "a"))
        assert err.value.field == "kind"

    def test_bad_account_charset(self):
        with pytest.raises(SchemaViolation):
            parse_event_log(line(0, 0, "RegisterCandidate", "UPPER"))
        with pytest.raises(SchemaViolation):
            parse_event_log(line(0, 0, "RegisterCandidate", "a" * 65))

    @pytest.mark.parametrize("amount", ["01", "1.", ".5", "1.0000000", "1e3", "-1", "10,0"])
    def test_bad_amount_grammar(self, amount):
        with pytest.raises(SchemaViolation) as err:
            parse_event_log(line(0, 0, "FreezeStake", "a", amount=amount))
        assert err.value.field == "amount"

    def test_missing_amount_for_freeze(self):
        with pytest.raises(SchemaViolation):
            parse_event_log(line(0, 0, "FreezeStake", "a"))

    def test_missing_target_for_vote(self):
        with pytest.raises(SchemaViolation):
            parse_event_log(line(0, 0, "CastVote", "a"))

    def test_self_proxy_rejected_at_parse(self):
        with pytest.raises(SchemaViolation):
            parse_event_log(line(0, 0, "SetProxy", "a", target="a"))

    def test_accepts_bytes_and_file_objects(self, tmp_path):
        text = line(0, 0, "RegisterCandidate", "a") + "\n"
        assert len(parse_event_log(text.encode()).events) == 1
        path = tmp_path / "log.jsonl"
        path.write_text(text)
        with open(path) as handle:
            assert len(parse_event_log(handle).events) == 1

    def test_horizon_is_last_event_day(self):
        text = line(0, 0, "RegisterCandidate", "a") + "\n" + line(5, 0, "RegisterCandidate", "b")
        assert parse_event_log(text).horizon == 5


class TestEventLogInvariants:
    def test_constructor_rejects_unsorted(self):
        a = ChainEvent(day=1, seq=0, kind=EventKind.REGISTER_CANDIDATE, actor="a")
        b = ChainEvent(day=0, seq=0, kind=EventKind.REGISTER_CANDIDATE, actor="b")
        with pytest.raises(ValueError):
            EventLog(events=(a, b), horizon=1)

    def test_horizon_must_cover_events(self):
        a = ChainEvent(day=3, seq=0, kind=EventKind.REGISTER_CANDIDATE, actor="a")
        with pytest.raises(ValueError):
            EventLog(events=(a,), horizon=2)

    def test_horizon_padding_allowed(self):
        a = ChainEvent(day=0, seq=0, kind=EventKind.REGISTER_CANDIDATE, actor="a")
        assert EventLog(events=(a,), horizon=9).horizon == 9

    def test_amount_normalized_to_six_digits(self):
        ev = ChainEvent(
            day=0, seq=0, kind=EventKind.FREEZE_STAKE, actor="a", amount=Decimal("1.5")
        )
        assert str(ev.amount) == "1.500000"


def _random_log(seed: int) -> EventLog:
    rng = np.random.default_rng(seed)
    events = []
    day, seq = 0, 0
    for _ in range(int(rng.integers(0, 40))):
        if rng.random() < 0.3:
            day += int(rng.integers(1, 3))
            seq = 0
        actor = f"acc{int(rng.integers(0, 5))}"
        kind = rng.choice(["RegisterCandidate", "FreezeStake", "ClearProxy", "BlockProduced"])
        extra = {}
        if kind in ("FreezeStake", "BlockProduced"):
            extra["amount"] = Decimal(int(rng.integers(0, 10**9))).scaleb(-6)
        if kind == "BlockProduced":
            extra["target"] = actor
        events.append(
            ChainEvent(day=day, seq=seq, kind=EventKind(kind), actor=actor, **extra)
        )
        seq += 1
    horizon = events[-1].day if events else 0
    return EventLog(events=tuple(events), horizon=horizon)


@given(st.integers(min_value=0, max_value=10**6))
def test_parse_serialize_round_trip(seed):
    log = _random_log(seed)
    assert parse_event_log(serialize_event_log(log)) == log


def test_serialized_amounts_are_decimal_text():
    ev = ChainEvent(
        day=0, seq=0, kind=EventKind.FREEZE_STAKE, actor="a", amount=Decimal("10.5")
    )
    log = EventLog(events=(ev,), horizon=0)
    assert '"amount":"10.500000"' in serialize_event_log(log)


class TestValidate:
    def test_clean_log_empty_report(self):
        log = parse_event_log(line(0, 0, "FreezeStake", "a", amount="10"))
        assert validate_event_log(log) == []

    def test_unfreeze_without_balance(self):
        log = parse_event_log(line(0, 0, "UnfreezeStake", "a", amount="5"))
        assert validate_event_log(log) == [Violation(index=0, kind="InsufficientFrozenStake")]

    def test_thirty_first_vote_flagged(self):
        lines = []
        seq = 0
        for i in range(31):
            lines.append(line(0, seq, "RegisterCandidate", f"c{i:02d}"))
            seq += 1
        for i in range(31):
            lines.append(line(0, seq, "CastVote", "voter", target=f"c{i:02d}"))
            seq += 1
        report = validate_event_log(parse_event_log("\n".join(lines)))
        assert report == [Violation(index=61, kind="VoteCapExceeded")]

    def test_unregistered_vote_and_recovery(self):
        # The violating event is skipped; later valid events still apply.
        lines = [
            line(0, 0, "CastVote", "a", target="ghost"),
            line(0, 1, "RegisterCandidate", "c"),
            line(0, 2, "CastVote", "a", target="c"),
        ]
        report = validate_event_log(parse_event_log("\n".join(lines)))
        assert report == [Violation(index=0, kind="UnregisteredCandidate")]

    def test_report_independent_of_horizon_padding(self):
        ev = ChainEvent(
            day=0, seq=0, kind=EventKind.UNFREEZE_STAKE, actor="a", amount=Decimal(1)
        )
        short = EventLog(events=(ev,), horizon=0)
        padded = EventLog(events=(ev,), horizon=30)
        assert validate_event_log(short) == validate_event_log(padded)

    def test_parse_error_is_decent_meter_error(self):
        with pytest.raises(ParseError):
            parse_event_log("{broken")
