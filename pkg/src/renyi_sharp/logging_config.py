"""Logging for renyi-sharp.

Result rows own stdout, so the Rich console handler writes to stderr. Sweep
cells tag their records with a thread-local prefix such as ``0.5 1.1``.
"""

import itertools
import logging
import os
import threading
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional

from rich.console import Console
from rich.highlighter import NullHighlighter
from rich.logging import RichHandler
from rich.text import Text

LOG_ENV_VARS = ("RENYI_SHARP_LOG", "LOG_LEVEL")

LEVEL_NAMES: Dict[str, int] = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARN": logging.WARNING,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}

FILE_FORMAT = (
    "%(asctime)s\t%(name)s\t%(levelname)s\t%(message)s\t%(basename)s:%(lineno)d"
)

_cell = threading.local()


def get_log_prefix() -> str:
    """Prefix of the sweep cell running on this thread, or ''."""
    return getattr(_cell, "prefix", "")


def set_log_prefix(prefix: str) -> None:
    _cell.prefix = prefix


@contextmanager
def cell_prefix(prefix: str) -> Iterator[None]:
    """Tag records logged inside the block with prefix, then clear it."""
    set_log_prefix(prefix)
    try:
        yield
    finally:
        set_log_prefix("")


class _Palette:
    """Stable colour per prefix, assigned in order of first use."""

    def __init__(self, colors: List[str]) -> None:
        self._cycle = itertools.cycle(colors)
        self._assigned: Dict[str, str] = {}
        self._lock = threading.Lock()

    def color(self, prefix: str) -> str:
        with self._lock:
            if prefix not in self._assigned:
                self._assigned[prefix] = next(self._cycle)
            return self._assigned[prefix]


_palette = _Palette(
    ["cyan", "magenta", "yellow", "green", "blue", "bright_cyan", "bright_magenta"]
)


class PrefixFilter(logging.Filter):
    """Prepend the cell prefix, as Rich markup, to the logger name.

    Shared by all handlers, so a record is tagged once.
    """

    def filter(self, record: logging.LogRecord) -> bool:
        if getattr(record, "cell_prefix", None) is not None:
            return True
        prefix = get_log_prefix()
        record.cell_prefix = prefix
        if prefix:
            color = _palette.color(prefix)
            record.name = f"[bold {color}]\\[{prefix}][/] {record.name}"
        return True


def _plain(markup: str) -> str:
    try:
        return Text.from_markup(markup).plain
    except Exception:
        return markup


class PlainTextFormatter(logging.Formatter):
    """File formatter: Rich markup removed from the name and message."""

    def format(self, record: logging.LogRecord) -> str:
        record.msg = _plain(record.getMessage())
        record.args = None
        record.name = _plain(record.name)
        record.basename = os.path.basename(record.pathname)
        return super().format(record)


def _parse_log_level(level_str: str) -> int:
    """Level from a name (error, warn, info, debug, ...) or a number.

    Raises:
        ValueError: If the level is not recognised
    """
    text = level_str.strip().upper()
    if text in LEVEL_NAMES:
        return LEVEL_NAMES[text]
    if text.isdigit():
        return int(text)
    raise ValueError(
        f"Invalid log level: '{level_str}'. Supported values: error, warn, info, debug"
    )


def _level_from_env() -> Optional[int]:
    for name in LOG_ENV_VARS:
        value = os.getenv(name)
        if value:
            return _parse_log_level(value)
    return None


def setup_logging(
    level: Optional[int] = None,
    show_path: bool = False,
    log_file: Optional[str] = None,
    log_file_level: Optional[str] = None,
) -> None:
    """Install the stderr console handler and an optional plain-text file.

    Args:
        level: Console level; RENYI_SHARP_LOG, then LOG_LEVEL, then WARNING
        show_path: Show source locations in console records
        log_file: Also write records to this file
        log_file_level: Level name for the file, default debug

    Raises:
        ValueError: If a level name is invalid
    """
    if level is None:
        level = _level_from_env() or logging.WARNING

    prefix_filter = PrefixFilter()
    console = RichHandler(
        console=Console(stderr=True),
        rich_tracebacks=True,
        show_path=show_path,
        markup=True,
        omit_repeated_times=False,
        highlighter=NullHighlighter(),
    )
    console.setLevel(level)
    console.addFilter(prefix_filter)
    handlers: List[logging.Handler] = [console]

    root_level = level
    if log_file:
        file_level = (
            _parse_log_level(log_file_level) if log_file_level else logging.DEBUG
        )
        to_file = logging.FileHandler(log_file)
        to_file.setLevel(file_level)
        to_file.addFilter(prefix_filter)
        to_file.setFormatter(PlainTextFormatter(FILE_FORMAT))
        handlers.append(to_file)
        root_level = min(level, file_level)

    logging.basicConfig(
        level=root_level,
        format="%(name)s: %(message)s",
        datefmt="[%X]",
        handlers=handlers,
        force=True,
    )
