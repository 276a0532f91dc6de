"""Exact fixed-point arithmetic helpers (6 fractional digits).

All stake, block and reward quantities travel as `decimal.Decimal` values
quantized to six fractional digits. Where division is needed, callers work
on integer micro-units so results are exact (no context-precision rounding).
"""

from __future__ import annotations

import re
from decimal import Decimal

FRACTIONAL_DIGITS = 6
SCALE = 10**FRACTIONAL_DIGITS
MICRO = Decimal(1).scaleb(-FRACTIONAL_DIGITS)  # smallest positive unit
ZERO = Decimal("0.000000")

# Plain non-negative decimal text, at most 6 fractional digits, no exponent.
_AMOUNT_RE = re.compile(r"^(0|[1-9][0-9]*)(\.[0-9]{1,6})?$")


def quantize(value: Decimal | int) -> Decimal:
    """Force a value onto the 6-digit grid; raises if it does not fit exactly.

    Accepts int for convenience; floats are deliberately rejected."""
    if isinstance(value, int) and not isinstance(value, bool):
        value = Decimal(value)
    if not isinstance(value, Decimal):
        raise ValueError(f"expected Decimal or int, got {type(value).__name__}")
    q = value.quantize(MICRO)
    if q != value:
        raise ValueError(f"not representable at {FRACTIONAL_DIGITS} fractional digits: {value}")
    return q


def parse_amount(text: str) -> Decimal:
    """Parse decimal text like "10.500000" into an exact non-negative amount."""
    if not isinstance(text, str) or not _AMOUNT_RE.match(text):
        raise ValueError(f"bad amount text: {text!r}")
    return quantize(Decimal(text))


def format_amount(value: Decimal) -> str:
    """Render with exactly 6 fractional digits and no exponent."""
    return str(quantize(value))


def to_micro(value: Decimal | int) -> int:
    """Exact integer micro-units of a 6-digit value."""
    if isinstance(value, int) and not isinstance(value, bool):
        return value * SCALE
    scaled = value.scaleb(FRACTIONAL_DIGITS)
    micro = int(scaled)
    if scaled != micro:
        raise ValueError(f"not on the fixed-point grid: {value}")
    return micro


def from_micro(micro: int) -> Decimal:
    return Decimal(micro).scaleb(-FRACTIONAL_DIGITS).quantize(MICRO)
