"""Host snapshot and worker defaults."""
from __future__ import annotations

import platform
from typing import Any, Dict

import psutil


def host_snapshot() -> Dict[str, Any]:
    """Current host facts; only written to scan headers when timing is recorded."""
    snap: Dict[str, Any] = {}
    snap["cpu_count"] = psutil.cpu_count(logical=False)
    snap["logical_cpus"] = psutil.cpu_count(logical=True)

    memory = psutil.virtual_memory()
    snap["ram_total_gb"] = round(memory.total / 2**30, 2)
    snap["ram_percent"] = memory.percent

    snap["python"] = platform.python_version()
    return snap


def default_workers() -> int:
    # cpu_count(logical=False) returns None on some platforms.
    physical = psutil.cpu_count(logical=False)
    if not physical:
        physical = psutil.cpu_count(logical=True) or 1
    return max(1, int(physical))
