"""Parameter-space scans: engine, probes, JSONL records and heatmaps."""
from .base import Cell, CellProbe
from .engine import ScanEngine, cell_params, grid_cells, run_cell
from .heatmap import field_value, heatmap, write_heatmap
from .records import append_record, prepare_resume, read_records, write_header

__all__ = [
    "Cell",
    "CellProbe",
    "ScanEngine",
    "append_record",
    "cell_params",
    "field_value",
    "grid_cells",
    "heatmap",
    "prepare_resume",
    "read_records",
    "run_cell",
    "write_header",
    "write_heatmap",
]
