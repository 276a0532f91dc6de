"""PNG rendering for analysis reports.

Every renderer returns raw PNG bytes so callers control file placement
and can write atomically. The Agg backend plus a cleared Software
metadata field keep output byte-stable for identical inputs.
"""

from __future__ import annotations

import io
from decimal import Decimal
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MtSeries, NormalizedRateMatrix

_PNG_METADATA = {"Software": None}


def _to_png(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)
    return buf.getvalue()


def render_mt_series(series: MtSeries) -> bytes:
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(range(len(series.values)), series.values, drawstyle="steps-mid", color="tab:blue")
    ax.set_xlabel("day")
    ax.set_ylabel("minimum covering individuals")
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _to_png(fig)


def render_heatmap(matrix: NormalizedRateMatrix) -> bytes:
    grid = np.array([[float(v) for v in row] for row in matrix.values], dtype=float)
    fig, ax = plt.subplots(figsize=(8, 6))
    image = ax.imshow(grid, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0, interpolation="nearest")
    ax.set_xlabel("bucket")
    ax.set_ylabel("producer rank")
    if len(matrix.producers) <= 25:
        ax.set_yticks(range(len(matrix.producers)))
        ax.set_yticklabels(matrix.producers, fontsize=6)
    fig.colorbar(image, ax=ax, label="normalized block rate")
    fig.tight_layout()
    return _to_png(fig)


def render_capture_cost(rows: Sequence[tuple[int, Decimal, Decimal]]) -> bytes:
    days = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(days, [float(r[1]) for r in rows], label="governance capture", color="tab:orange")
    ax.plot(days, [float(r[2]) for r in rows], label="full capture", color="tab:red")
    ax.set_xlabel("day")
    ax.set_ylabel("stake units")
    ax.set_ylim(bottom=0)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _to_png(fig)
