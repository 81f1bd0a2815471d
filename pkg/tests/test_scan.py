"""Tests for the parameter scanner, its record store and heatmaps."""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

import pytest

from cubicdyn.errors import ConfigError, MixedGrids, NoEscapeRoot
from cubicdyn.models import RunConfig, ScanRecord
from cubicdyn.scan import (
    ScanEngine,
    append_record,
    cell_params,
    field_value,
    grid_cells,
    heatmap,
    prepare_resume,
    read_records,
    run_cell,
    write_header,
    write_heatmap,
)
from cubicdyn.scan.probes import PROBES
from cubicdyn.surface import dm_params, torus_params


class StubProbe:
    """Reports the cell's D and fails on request."""

    name = "fatou"

    def __init__(self, fail_at=None):
        self.fail_at = fail_at

    def run(self, cell, config):
        if cell.index == self.fail_at:
            raise NoEscapeRoot("no root", D=cell.params.D)
        return {"status": "ok", "D": cell.params.D.real, "seed": cell.seed}


def make_config(**kw):
    data = {
        "family": "markoff",
        "axes": [
            {"target": "D", "start": 0, "stop": 1, "num": 3},
            {"target": "ABC", "start": -0.5, "stop": 0.5, "num": 2},
        ],
        "probes": ["fatou"],
    }
    data.update(kw)
    return RunConfig(**data)


@pytest.fixture
def stub(monkeypatch):
    probe = StubProbe()
    monkeypatch.setitem(PROBES, "fatou", probe)
    return probe


def test_cell_params_offsets():
    cfg = make_config()
    p, dm_a = cell_params(cfg, (0.5, 0.25))
    assert dm_a is None
    assert p.D == 0.5
    assert p.A == p.B == p.C == 0.25
    assert p.label is None


def test_cell_params_dm_axis():
    cfg = RunConfig(
        family="dm:0",
        axes=[
            {"target": "dm_a", "start": -1, "stop": 1, "num": 3},
            {"target": "D_imag", "start": 0, "stop": 0.1, "num": 2},
        ],
    )
    p, dm_a = cell_params(cfg, (1.0, 0.1))
    assert dm_a == 1.0
    base = dm_params(1.0)
    assert p.A == base.A
    assert p.D == pytest.approx(base.D + 0.1j)


def test_grid_cells_row_major():
    cfg = make_config(seed=10)
    cells = grid_cells(cfg)
    assert [c.index for c in cells] == list(range(6))
    assert cells[3].cell_id == (1, 1)
    assert cells[3].seed == 13
    assert cells[3].values == (0.5, 0.5)


def test_run_cell_records_errors(stub):
    stub.fail_at = 0
    cfg = make_config()
    rec = run_cell(grid_cells(cfg)[0], cfg)
    assert rec.fatou["status"] == "error"
    assert rec.fatou["error"] == "NoEscapeRoot"
    assert rec.wall_time is None


def test_run_cell_timing_opt_in(stub):
    cfg = make_config(record_timing=True)
    rec = run_cell(grid_cells(cfg)[0], cfg)
    assert rec.wall_time is not None


def test_engine_sequential_order(stub):
    cfg = make_config()
    records = list(ScanEngine(cfg, workers=1).run())
    assert [r.index for r in records] == list(range(6))
    assert records[2].fatou["D"] == pytest.approx(0.5)


def test_engine_skips_done_cells(stub):
    cfg = make_config()
    engine = ScanEngine(cfg, workers=1)
    assert [c.index for c in engine.pending({0, 1, 4})] == [2, 3, 5]


@patch('cubicdyn.scan.engine.ProcessPoolExecutor', ThreadPoolExecutor)
def test_engine_pool_keeps_cell_order(stub):
    cfg = make_config()
    pooled = list(ScanEngine(cfg, workers=3).run())
    sequential = list(ScanEngine(cfg, workers=1).run())
    assert [r.index for r in pooled] == list(range(6))
    assert [r.model_dump() for r in pooled] == [r.model_dump() for r in sequential]


def _write_scan(path, cfg):
    with open(path, "w", encoding="utf-8") as f:
        write_header(f, cfg)
        for rec in ScanEngine(cfg).run():
            append_record(f, rec)


def test_store_roundtrip(stub, tmp_path):
    cfg = make_config()
    out = tmp_path / "scan.jsonl"
    _write_scan(out, cfg)
    header, records = read_records(out)
    assert header["config_hash"] == cfg.config_hash()
    assert header["grid"] == [3, 2]
    assert "host" not in header
    assert len(records) == 6
    first = json.loads(out.read_text(encoding="utf-8").splitlines()[1])
    assert list(first) == sorted(first)


def test_store_is_deterministic(stub, tmp_path):
    cfg = make_config()
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    _write_scan(a, cfg)
    _write_scan(b, cfg)
    assert a.read_bytes() == b.read_bytes()


def test_resume_truncates_torn_line(stub, tmp_path):
    cfg = make_config()
    out = tmp_path / "scan.jsonl"
    _write_scan(out, cfg)
    lines = out.read_text(encoding="utf-8").splitlines(keepends=True)
    out.write_text("".join(lines[:4]) + lines[4][:20], encoding="utf-8")
    done = prepare_resume(out, cfg)
    assert done == {0, 1, 2}
    assert out.read_text(encoding="utf-8") == "".join(lines[:4])
    with open(out, "a", encoding="utf-8") as f:
        for rec in ScanEngine(cfg).run(done):
            append_record(f, rec)
    fresh = tmp_path / "fresh.jsonl"
    _write_scan(fresh, cfg)
    assert out.read_bytes() == fresh.read_bytes()


def test_resume_rejects_other_config(stub, tmp_path):
    out = tmp_path / "scan.jsonl"
    _write_scan(out, make_config())
    with pytest.raises(ConfigError):
        prepare_resume(out, make_config(seed=99))


def test_read_requires_header(tmp_path):
    out = tmp_path / "bare.jsonl"
    out.write_text("", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_records(out)


def test_torus_line_flags_the_boundary():
    cfg = RunConfig(
        family="torus:0",
        axes=[{"target": "D", "start": 0, "stop": 8, "num": 3}],
        probes=["fatou"],
        fatou_depth=4,
    )
    records = list(ScanEngine(cfg).run())
    assert records[1].params == torus_params(4).shifted()
    assert records[1].fatou["error"] == "NoEscapeRoot"
    assert records[0].fatou["status"] in ("Certified", "FailedWithWitness", "Inconclusive")


def _record(i, j, value, grid=(2, 2)):
    return ScanRecord(
        cell_id=[i, j],
        grid=list(grid),
        values=[0.0, 0.0],
        params=dm_params(0.0),
        fatou={"status": "ok", "depth": value},
    )


def test_field_value_paths():
    rec = _record(0, 0, 3)
    assert field_value(rec, "fatou.depth") == 3.0
    assert math.isnan(field_value(rec, "fatou.status"))
    assert math.isnan(field_value(rec, "cascade.levels.2"))
    assert field_value({"levels": [1.5, 2.5]}, "levels.1") == 2.5


def test_heatmap_pixels():
    records = [_record(0, 0, 0), _record(0, 1, 1), _record(1, 0, None)]
    data = heatmap(records, "fatou.depth")
    head = b"P6\n2 2\n255\n"
    assert data.startswith(head)
    pixels = data[len(head):]
    assert len(pixels) == 12
    assert pixels[0:3] == bytes((0, 0, 255))
    assert pixels[3:6] == bytes((255, 0, 0))
    assert pixels[6:9] == bytes((128, 128, 128))
    assert pixels[9:12] == bytes((128, 128, 128))


def test_heatmap_constant_field_is_blue():
    data = heatmap([_record(0, 0, 5, (1, 1))], "fatou.depth")
    assert data.endswith(bytes((0, 0, 255)))


def test_heatmap_rejects_mixed_grids():
    with pytest.raises(MixedGrids):
        heatmap([_record(0, 0, 1), _record(0, 0, 1, (3, 3))], "fatou.depth")
    with pytest.raises(MixedGrids):
        heatmap([], "fatou.depth")


def test_write_heatmap(tmp_path):
    out = tmp_path / "map.ppm"
    n = write_heatmap(out, [_record(0, 0, 1, (1, 1))], "fatou.depth", lo=0, hi=2)
    assert out.read_bytes()[-3:] == bytes((128, 0, 128))
    assert n == out.stat().st_size


def test_engine_single_cell_skips_pool(stub, mocker):
    pool = mocker.patch('cubicdyn.scan.engine.ProcessPoolExecutor')
    cfg = make_config(axes=[{"target": "D", "start": 0, "stop": 0, "num": 1}])
    records = list(ScanEngine(cfg, workers=4).run())
    assert len(records) == 1
    pool.assert_not_called()
