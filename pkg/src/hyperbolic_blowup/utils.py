"""
Common utility functions for hyperbolic-blowup.
"""

import logging
import math
from collections.abc import Iterable
from pathlib import Path

from hyperbolic_blowup.constants import SIGNIFICANT_DIGITS

logger = logging.getLogger(__name__)


def format_float(value: float | None) -> str:
    """Format a number losslessly for text output.

    Args:
        value: The number to format. ``None`` and NaN become an empty field.

    Returns:
        The value with 17 significant digits, or ``""`` for absent values.
    """
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def read_key_values(path: Path) -> dict[str, str]:
    """Read a flat ``key=value`` text file.

    Blank lines and lines starting with ``#`` are skipped. Later keys win.

    Args:
        path: File to read.

    Returns:
        Mapping of dotted keys to raw string values.

    Raises:
        ValueError: If a non-comment line has no ``=``.
        OSError: If the file cannot be read.
    """
    entries: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def write_key_values(path: Path, entries: Iterable[tuple[str, str]]) -> None:
    """Write a flat ``key=value`` text file.

    Args:
        path: File to write.
        entries: Key/value pairs, written in the given order.
    """
    with path.open("w", encoding="utf-8") as f:
        for key, value in entries:
            f.write(f"{key}={value}\n")
    logger.debug(f"Wrote {path}")
