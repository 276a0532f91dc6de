"""Decentralization metrics over impact and production matrices.

The day-level quantity is the minimum number of individuals whose
combined impact strictly exceeds a threshold share of that day's total.
At t = 0.5 over one day this is the Nakamoto coefficient. Threshold
comparisons are exact: integer micro sums cross-multiplied against the
threshold as a rational number, so no float ever decides a boundary.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Mapping, Sequence

from .allocation import DailyProduction, ImpactMatrix
from .election import DailySnapshot, EngineConfig
from .errors import DecentMeterError
from .fixedpoint import FRACTIONAL_DIGITS, MICRO, ZERO, format_amount, to_micro


class SeatsOutOfRange(DecentMeterError):
    pass


@dataclass
class MetricConfig:
    threshold: Decimal = Decimal("0.5")
    top_l: int = 50
    bucket_days: int = 30
    approvals_needed: int = 17

    def __post_init__(self) -> None:
        if not isinstance(self.threshold, Decimal):
            self.threshold = Decimal(str(self.threshold))
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must lie in (0, 1)")
        if self.top_l < 1:
            raise ValueError("top_l must be >= 1")
        if self.bucket_days < 1:
            raise ValueError("bucket_days must be >= 1")
        if self.approvals_needed < 1:
            raise ValueError("approvals_needed must be >= 1")


@dataclass(frozen=True)
class MtSeries:
    values: tuple[int, ...]

    def to_csv(self) -> str:
        lines = ["day,f"]
        lines.extend(f"{day},{f}" for day, f in enumerate(self.values))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ProductionMatrix:
    producers: tuple[str, ...]
    buckets: int
    values: tuple[tuple[Decimal, ...], ...]


@dataclass(frozen=True)
class NormalizedRateMatrix:
    producers: tuple[str, ...]
    values: tuple[tuple[Decimal, ...], ...]

    def to_csv(self) -> str:
        buckets = len(self.values[0]) if self.values else 0
        header = "producer"
        if buckets:
            header += "," + ",".join(f"b{j}" for j in range(buckets))
        lines = [header]
        for producer, row in zip(self.producers, self.values):
            lines.append(producer + "," + ",".join(format_amount(v) for v in row))
        return "\n".join(lines) + "\n"


def _min_cover(values_micro: Sequence[int], threshold: Fraction) -> int:
    """Smallest k with top-k sum strictly above threshold * total; 0 for an
    all-zero column. Greedy largest-first is optimal for this objective."""
    total = sum(values_micro)
    if total == 0:
        return 0
    running = 0
    for k, value in enumerate(sorted(values_micro, reverse=True), start=1):
        running += value
        if running * threshold.denominator > threshold.numerator * total:
            return k
    return len(values_micro)


def mt_coefficient(impacts: ImpactMatrix, cfg: MetricConfig, jobs: int = 1) -> MtSeries:
    threshold = Fraction(cfg.threshold)
    columns = [
        [to_micro(impacts.values[i][j]) for i in range(len(impacts.individuals))]
        for j in range(impacts.days)
    ]
    if jobs > 1 and columns:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = tuple(pool.map(lambda col: _min_cover(col, threshold), columns))
    else:
        values = tuple(_min_cover(col, threshold) for col in columns)
    return MtSeries(values=values)


def nakamoto_coefficient(day_impacts: Mapping[str, Decimal]) -> int:
    micro = []
    for account, value in day_impacts.items():
        if value < 0:
            raise ValueError(f"negative impact for {account}")
        micro.append(to_micro(value))
    return _min_cover(micro, Fraction(1, 2))


def production_matrix(
    productions: Sequence[DailyProduction], cfg: MetricConfig
) -> ProductionMatrix:
    """Bucket per-day block counts into bucket_days-wide periods for the
    top_l producers by all-time total (ties broken by ascending id)."""
    totals: dict[str, Decimal] = {}
    for production in productions:
        for producer, count in production.produced.items():
            totals[producer] = totals.get(producer, ZERO) + count
    producers = tuple(sorted(totals, key=lambda p: (-totals[p], p))[: cfg.top_l])
    if not productions:
        return ProductionMatrix(producers=producers, buckets=0, values=tuple(() for _ in producers))
    buckets = max(p.day for p in productions) // cfg.bucket_days + 1
    grid = {p: [ZERO] * buckets for p in producers}
    for production in productions:
        bucket = production.day // cfg.bucket_days
        for producer, count in production.produced.items():
            if producer in grid:
                grid[producer][bucket] += count
    values = tuple(tuple(grid[p]) for p in producers)
    return ProductionMatrix(producers=producers, buckets=buckets, values=values)


def production_from_impact(impacts: ImpactMatrix, cfg: MetricConfig) -> ProductionMatrix:
    """Impact matrix reshaped as per-individual bucketed totals, so the
    same heatmap pipeline covers both producers and individuals."""
    productions = [
        DailyProduction(day=j, produced=impacts.column(j)) for j in range(impacts.days)
    ]
    return production_matrix(productions, cfg)


def normalize_rates(matrix: ProductionMatrix) -> NormalizedRateMatrix:
    """Divide every entry by the global maximum, rounded to 6 fractional
    digits (half-even). An all-zero matrix stays all-zero."""
    peak = max((v for row in matrix.values for v in row), default=ZERO)
    if peak == 0:
        return NormalizedRateMatrix(producers=matrix.producers, values=matrix.values)
    exponent = Decimal(1).scaleb(-FRACTIONAL_DIGITS)
    with localcontext() as ctx:
        ctx.prec = 50
        values = tuple(
            tuple((v / peak).quantize(exponent, rounding=ROUND_HALF_EVEN) for v in row)
            for row in matrix.values
        )
    return NormalizedRateMatrix(producers=matrix.producers, values=values)


def capture_cost(
    snapshot: DailySnapshot, seats: int, cfg: EngineConfig | None = None
) -> Decimal:
    """Minimum power P such that `seats` fresh candidates, each approved
    with P by one attacker account, all enter the committee.

    The attacker must out-rank the incumbent currently holding the last
    seat it needs, i.e. rank committee_size - seats + 1; strictly more
    than that incumbent's weight suffices because ties would sort the
    incumbent (an earlier registrant is not guaranteed, so strictness is
    required). With fewer incumbents than that rank the seats are free
    and any positive power wins them.
    """
    cfg = cfg or EngineConfig()
    if seats < 1 or seats > cfg.committee_size:
        raise SeatsOutOfRange(f"seats must lie in [1, {cfg.committee_size}]")
    rank = cfg.committee_size - seats + 1
    if len(snapshot.committee) < rank:
        return MICRO
    return snapshot.committee[rank - 1][1] + MICRO
