"""Binary PPM (P6) heatmaps of one scalar field of a scan.

Pixel (row i, column j) is cell (i, j). Values map linearly from [lo, hi]
onto the ramp (255 t, 0, 255 (1 - t)): blue at lo, red at hi. Missing or
non-numeric values are drawn mid gray.
"""
from __future__ import annotations

import math
import os
from typing import Any, Iterable, Optional, Sequence

from ..errors import MixedGrids
from ..models import ScanRecord

GRAY = (128, 128, 128)


def field_value(record: ScanRecord | dict, path: str) -> float:
    """Follow a dotted path (``cascade.levels.3``) into a record; NaN if absent."""
    node: Any = record.model_dump(mode="json") if isinstance(record, ScanRecord) else record
    for part in path.split("."):
        if isinstance(node, dict):
            node = node.get(part)
        elif isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                return math.nan
        else:
            return math.nan
    if isinstance(node, bool):
        return float(node)
    if isinstance(node, (int, float)):
        return float(node)
    return math.nan


def _ramp(t: float) -> tuple[int, int, int]:
    return (round(255 * t), 0, round(255 * (1 - t)))


def heatmap(
    records: Sequence[ScanRecord],
    field: str,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
) -> bytes:
    if not records:
        raise MixedGrids("no records to draw")
    grids = {tuple(r.grid) for r in records}
    if len(grids) != 1:
        raise MixedGrids("records come from different grids", grids=sorted(grids))
    rows, cols = grids.pop()
    values = {tuple(r.cell_id): field_value(r, field) for r in records}
    finite = [v for v in values.values() if math.isfinite(v)]
    if lo is None:
        lo = min(finite) if finite else 0.0
    if hi is None:
        hi = max(finite) if finite else 1.0
    span = hi - lo
    pixels = bytearray()
    for i in range(rows):
        for j in range(cols):
            v = values.get((i, j), math.nan)
            if not math.isfinite(v):
                pixels.extend(GRAY)
                continue
            t = 0.0 if span <= 0 else min(1.0, max(0.0, (v - lo) / span))
            pixels.extend(_ramp(t))
    return f"P6\n{cols} {rows}\n255\n".encode("ascii") + bytes(pixels)


def write_heatmap(
    path: str | os.PathLike[str], records: Iterable[ScanRecord], field: str, **kw: Any
) -> int:
    data = heatmap(list(records), field, **kw)
    with open(path, "wb") as f:
        f.write(data)
    return len(data)
