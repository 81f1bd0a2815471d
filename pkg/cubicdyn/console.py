"""Logging and status output.

Library modules log through ``get_logger(__name__)``; nothing is emitted
until :func:`configure_logging` attaches a rich handler (the CLI does this).
Status lines for humans go to stderr with the ``[cubicdyn]`` prefix so that
stdout stays clean for JSON / CSV / JSONL payloads.
"""
from __future__ import annotations

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

PREFIX = "[cubicdyn]"
LOG_ENV = "CUBICDYN_LOG_LEVEL"

err_console = Console(stderr=True, highlight=False, soft_wrap=True)

_ROOT = "cubicdyn"


def get_logger(name: str) -> logging.Logger:
    if not name.startswith(_ROOT):
        name = f"{_ROOT}.{name}"
    return logging.getLogger(name)


def _resolve_level(verbosity: int) -> int:
    if verbosity >= 2:
        return logging.DEBUG
    if verbosity == 1:
        return logging.INFO
    env = os.environ.get(LOG_ENV)
    if env:
        level = logging.getLevelName(env.strip().upper())
        if isinstance(level, int):
            return level
    return logging.WARNING


def configure_logging(verbosity: int = 0) -> int:
    """Attach a single RichHandler to the package logger; returns the level."""
    level = _resolve_level(verbosity)
    logger = logging.getLogger(_ROOT)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=err_console,
        show_path=False,
        rich_tracebacks=False,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return level


def status(message: str) -> None:
    err_console.print(f"{PREFIX} {message}", markup=False)
