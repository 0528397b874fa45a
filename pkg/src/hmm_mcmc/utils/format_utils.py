"""
Text formatting utilities for reports and CLI output
"""

import logging
import re
from typing import Any, List, Sequence

logger = logging.getLogger(__name__)


def format_value(value: Any, precision: int = 4) -> str:
    """Format a table cell; floats use significant digits"""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value:
            return "nan"
        return f"{value:.{precision}g}"
    return str(value)


def create_text_table(headers: List[str], rows: Sequence[Sequence[Any]],
                      precision: int = 4) -> str:
    """Create an aligned plain-text table from headers and rows"""
    if not headers or not rows:
        return ""

    cells = []
    for row in rows:
        # Adjust row length to match headers
        row_data = [format_value(cell, precision) for cell in list(row)[:len(headers)]]
        row_data.extend([""] * (len(headers) - len(row_data)))
        cells.append(row_data)

    widths = [
        max(len(headers[i]), *(len(r[i]) for r in cells))
        for i in range(len(headers))
    ]

    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row_data in cells:
        lines.append("  ".join(c.rjust(w) for c, w in zip(row_data, widths)).rstrip())

    return "\n".join(lines) + "\n"


def format_seconds(seconds: float) -> str:
    """Format a duration in human readable form"""
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60.0:
        return f"{seconds:.2f} s"
    minutes, secs = divmod(seconds, 60.0)
    if minutes < 60:
        return f"{int(minutes)} min {secs:.0f} s"
    hours, minutes = divmod(minutes, 60)
    return f"{int(hours)} h {int(minutes)} min"


def sanitize_filename(filename: str) -> str:
    """Sanitize a run or strategy name for use as a directory name"""
    # Remove unsafe characters
    filename = re.sub(r'[<>:"/\\|?*\s]', '_', filename)

    # Remove consecutive underscores
    filename = re.sub(r'_+', '_', filename)

    return filename.strip('_')
