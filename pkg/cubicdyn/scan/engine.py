"""Parameter-slice scanner.

Cells run in a process pool and are flushed strictly in row-major order, so
the output does not depend on the worker count or on completion order.
"""
from __future__ import annotations

import time
from concurrent.futures import Future, ProcessPoolExecutor, as_completed
from typing import Any, Dict, Iterable, Iterator, Optional, Sequence

from ..console import get_logger
from ..errors import CubicDynError
from ..models import ParameterQuadruple, RunConfig, ScanRecord
from ..surface import dm_params, parse_family
from .base import Cell
from .probes import PROBES

log = get_logger(__name__)


def _base_dm_a(config: RunConfig) -> Optional[float]:
    name, _, body = config.family.partition(":")
    if name.lower() != "dm":
        return None
    return float(body) if body else 0.0


def cell_params(config: RunConfig, values: Sequence[float]) -> tuple[ParameterQuadruple, Optional[float]]:
    """Parameters of the cell at axis ``values`` (and its DM a, if any)."""
    dm_a = _base_dm_a(config)
    for axis, v in zip(config.axes, values):
        if axis.target == "dm_a":
            dm_a = v
    p = dm_params(dm_a) if dm_a is not None else parse_family(config.family)
    offsets: Dict[str, complex] = {}
    for axis, v in zip(config.axes, values):
        if axis.target in ("A", "B", "C", "D"):
            offsets[axis.target] = offsets.get(axis.target, 0) + v
        elif axis.target == "D_imag":
            offsets["D"] = offsets.get("D", 0) + 1j * v
        elif axis.target == "ABC":
            for k in ("A", "B", "C"):
                offsets[k] = offsets.get(k, 0) + v
    if offsets:
        p = p.shifted(**offsets)
    return p, dm_a


def grid_cells(config: RunConfig) -> list[Cell]:
    n0, n1 = config.grid_shape
    v0 = config.axes[0].values()
    v1 = config.axes[1].values() if len(config.axes) > 1 else [None]
    cells = []
    for i in range(n0):
        for j in range(n1):
            values = (v0[i],) if v1[j] is None else (v0[i], v1[j])
            p, dm_a = cell_params(config, values)
            index = i * n1 + j
            cells.append(
                Cell(
                    index=index,
                    cell_id=(i, j),
                    values=values,
                    params=p,
                    seed=config.seed + index,
                    dm_a=dm_a,
                )
            )
    return cells


def run_cell(cell: Cell, config: RunConfig) -> ScanRecord:
    """Run every configured probe on one cell; failures become error dicts."""
    start = time.perf_counter()
    results: Dict[str, Any] = {}
    for name in config.probes:
        try:
            results[name] = PROBES[name].run(cell, config)
        except CubicDynError as e:
            results[name] = {"status": "error", "error": type(e).__name__, "detail": str(e)}
        except (ArithmeticError, ValueError, AssertionError) as e:
            log.debug("cell %s probe %s crashed", cell.cell_id, name, exc_info=True)
            results[name] = {"status": "error", "error": type(e).__name__, "detail": str(e)}
    return ScanRecord(
        cell_id=list(cell.cell_id),
        grid=list(config.grid_shape),
        values=list(cell.values),
        params=cell.params,
        wall_time=round(time.perf_counter() - start, 3) if config.record_timing else None,
        **results,
    )


class ScanEngine:
    """Run a RunConfig over its grid and yield records in cell order."""

    def __init__(self, config: RunConfig, workers: int = 1):
        self.config = config
        self.workers = max(1, workers)
        self.cells = grid_cells(config)

    def pending(self, done: Iterable[int] = ()) -> list[Cell]:
        skip = set(done)
        return [c for c in self.cells if c.index not in skip]

    def run(self, done: Iterable[int] = ()) -> Iterator[ScanRecord]:
        todo = self.pending(done)
        log.info("%d cells to run (%d already stored)", len(todo), len(self.cells) - len(todo))
        if self.workers == 1 or len(todo) <= 1:
            for cell in todo:
                yield run_cell(cell, self.config)
            return
        yield from self._run_pool(todo)

    def _run_pool(self, todo: list[Cell]) -> Iterator[ScanRecord]:
        buffered: Dict[int, ScanRecord] = {}
        position = 0
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            futures: Dict[Future[ScanRecord], int] = {
                pool.submit(run_cell, cell, self.config): k for k, cell in enumerate(todo)
            }
            for fut in as_completed(futures):
                buffered[futures[fut]] = fut.result()
                while position in buffered:
                    yield buffered.pop(position)
                    position += 1
