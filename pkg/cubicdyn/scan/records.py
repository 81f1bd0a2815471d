"""Line-delimited JSON store for scan records.

The first line is a header ``{"kind": "header", "config_hash": ..., "config":
..., "grid": [n0, n1]}``; every further line is one ScanRecord. Keys are
sorted so identical runs produce identical bytes.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, IO, Optional

from ..errors import ConfigError
from ..health import host_snapshot
from ..models import RunConfig, ScanRecord

HEADER_KIND = "header"


def _default(obj: Any) -> Any:
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def dumps(obj: Dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def header_for(config: RunConfig) -> Dict[str, Any]:
    header: Dict[str, Any] = {
        "kind": HEADER_KIND,
        "config_hash": config.config_hash(),
        "config": config.hash_payload(),
        "grid": list(config.grid_shape),
    }
    if config.record_timing:
        header["host"] = host_snapshot()
    return header


def write_header(f: IO[str], config: RunConfig) -> None:
    f.write(dumps(header_for(config)) + "\n")
    f.flush()


def append_record(f: IO[str], record: ScanRecord) -> None:
    f.write(dumps(record.model_dump(mode="json")) + "\n")
    f.flush()


def read_records(path: str | os.PathLike[str]) -> tuple[Dict[str, Any], list[ScanRecord]]:
    """Header and complete records; a torn final line is ignored."""
    header: Optional[Dict[str, Any]] = None
    records: list[ScanRecord] = []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    for n, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            if n == len(lines) - 1:
                break
            raise ConfigError(f"{path}: line {n + 1} is not JSON", line=n + 1) from e
        if data.get("kind") == HEADER_KIND:
            header = data
            continue
        records.append(ScanRecord(**data))
    if header is None:
        raise ConfigError(f"{path}: missing header line", path=str(path))
    return header, records


def prepare_resume(path: str | os.PathLike[str], config: RunConfig) -> set[int]:
    """Cell indices already stored in ``path``.

    Truncates a partially written last line and refuses a file written by a
    different configuration.
    """
    path = Path(path)
    raw = path.read_bytes()
    cut = raw.rfind(b"\n") + 1
    if cut != len(raw):
        with open(path, "r+b") as f:
            f.truncate(cut)
    header, records = read_records(path)
    expected = config.config_hash()
    if header.get("config_hash") != expected:
        raise ConfigError(
            "resume file was written by a different config",
            found=header.get("config_hash"),
            expected=expected,
        )
    return {rec.index for rec in records}
