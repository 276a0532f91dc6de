"""Decentralization measurement toolkit.

Replays delegated-proof-of-stake governance event logs into daily
election snapshots, allocates produced blocks down to the coin holders
whose votes elected each producer, ingests proof-of-work pool payouts,
and computes comparable decentralization metrics over both.
"""

from .allocation import (
    DailyProduction,
    DayAllocation,
    DayMismatch,
    ImpactMatrix,
    MisalignedDays,
    WrongEventKind,
    allocate_dpos_day,
    build_impact_matrix_dpos,
    build_impact_matrix_pow,
    extract_productions,
    extract_rewards,
    supportive_holders,
)
from .election import (
    DailySnapshot,
    EngineConfig,
    InsufficientFrozenStake,
    ReplayEngine,
    ReplayError,
    SelfProxy,
    UnregisteredCandidate,
    VoteCapExceeded,
    candidate_weight,
    compute_committee,
    emit_snapshot,
    make_snapshot,
    replay,
    resolve_direct_voter,
    snapshot_to_json,
)
from .errors import DecentMeterError
from .events import (
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
from .fixedpoint import format_amount, parse_amount, quantize
from .metrics import (
    MetricConfig,
    MtSeries,
    NormalizedRateMatrix,
    ProductionMatrix,
    SeatsOutOfRange,
    capture_cost,
    mt_coefficient,
    nakamoto_coefficient,
    normalize_rates,
    production_from_impact,
    production_matrix,
)
from .synth import (
    EmptyCommittee,
    InvalidConfig,
    SynthConfig,
    TooLarge,
    generate_chain,
    oracle_allocation,
    oracle_min_subset,
    simulate_production,
)

__version__ = "0.1.0"

__all__ = [
    "ChainEvent",
    "DailyProduction",
    "DailySnapshot",
    "DayAllocation",
    "DayMismatch",
    "DecentMeterError",
    "EmptyCommittee",
    "EngineConfig",
    "EventKind",
    "EventLog",
    "ImpactMatrix",
    "InsufficientFrozenStake",
    "InvalidConfig",
    "MalformedLine",
    "MetricConfig",
    "MisalignedDays",
    "MtSeries",
    "NormalizedRateMatrix",
    "OutOfOrder",
    "ParseError",
    "ProductionMatrix",
    "ReplayEngine",
    "ReplayError",
    "SchemaViolation",
    "SeatsOutOfRange",
    "SelfProxy",
    "SynthConfig",
    "TooLarge",
    "UnregisteredCandidate",
    "Violation",
    "VoteCapExceeded",
    "WrongEventKind",
    "allocate_dpos_day",
    "build_impact_matrix_dpos",
    "build_impact_matrix_pow",
    "candidate_weight",
    "capture_cost",
    "compute_committee",
    "emit_snapshot",
    "extract_productions",
    "extract_rewards",
    "format_amount",
    "generate_chain",
    "make_snapshot",
    "mt_coefficient",
    "nakamoto_coefficient",
    "normalize_rates",
    "oracle_allocation",
    "oracle_min_subset",
    "parse_amount",
    "parse_event_log",
    "production_from_impact",
    "production_matrix",
    "quantize",
    "replay",
    "resolve_direct_voter",
    "serialize_event_log",
    "simulate_production",
    "snapshot_to_json",
    "supportive_holders",
    "validate_event_log",
    "__version__",
]
