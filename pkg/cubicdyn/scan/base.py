"""Interface for per-cell scan probes.

A probe takes one grid cell and returns a JSON-ready summary dict with a
``status`` key. Probes must be pure: the same cell and config give the same
dict, whichever worker runs them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Protocol

from ..models import ParameterQuadruple, RunConfig


@dataclass(frozen=True)
class Cell:
    index: int  # row-major position, also the merge key
    cell_id: tuple[int, int]
    values: tuple[float, ...]
    params: ParameterQuadruple
    seed: int
    dm_a: Optional[float] = None  # set for dm families, shifted or not


class CellProbe(Protocol):
    """Protocol all scan probes follow."""

    name: str  # key in ScanRecord and in RunConfig.probes

    def run(self, cell: Cell, config: RunConfig) -> Dict[str, Any]:  # pragma: no cover
        raise NotImplementedError
