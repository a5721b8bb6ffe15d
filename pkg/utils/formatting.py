#!/usr/bin/env python3
# utils/formatting.py - Terminal tables and number formatting for sievelab

import math
import shutil
from typing import Any, Dict, List, Sequence, Tuple

from utils.colors import (
    ANSI_RESET,
    FAIL_COLOR,
    PASS_COLOR,
    PROMPT_TEXT_COLOR,
    TABLE_HEADER_COLOR,
    TABLE_ROW_COLOR,
    WARN_COLOR,
    colorize,
)


def get_terminal_width() -> int:
    """Terminal width, never below 80 columns"""
    try:
        columns, _ = shutil.get_terminal_size()
        return max(columns, 80)
    except Exception:
        return 80


def horizontal_line(char="=") -> str:
    return char * get_terminal_width()


def format_number(value: Any, digits: int = 6) -> str:
    """Compact numeric cell: integers as-is, floats with `digits` significant digits."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else ("yes" if value else "no")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{digits}g}"
    try:
        return format_number(float(value), digits)
    except (TypeError, ValueError):
        return str(value)


def format_duration(seconds: float) -> str:
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 120:
        return f"{seconds:.1f} s"
    minutes, sec = divmod(int(round(seconds)), 60)
    return f"{minutes}m {sec:02d}s"


def format_check(passed: bool) -> str:
    return colorize("PASS", PASS_COLOR) if passed else colorize("FAIL", FAIL_COLOR)


def format_warning(text: str) -> str:
    return colorize(text, WARN_COLOR)


def truncate_cell(text: str, width: int) -> str:
    """Truncate text with an ellipsis so it fits a column of the given width"""
    if len(text) <= width:
        return text
    if width <= 1:
        return text[:max(width, 0)]
    return text[: width - 1] + "…"


def create_table_layout(headers: List[str], rows: List[List[Any]], padding: int = 2) -> Dict:
    """Column widths sized to content, scaled down proportionally to fit the terminal.

    Returns a dict with column_widths, format_str, total_width and padding.
    """
    column_widths = []
    for i, header in enumerate(headers):
        widest = max([len(str(header))] + [len(str(row[i])) for row in rows if i < len(row)])
        column_widths.append(widest + padding)

    total_width = sum(column_widths)
    terminal_width = get_terminal_width()
    if total_width > terminal_width:
        scale = (terminal_width - len(headers) * padding) / (total_width - len(headers) * padding)
        column_widths = [
            max(int(width * scale), len(str(header)) + padding)
            for width, header in zip(column_widths, headers)
        ]
        total_width = sum(column_widths)

    return {
        "column_widths": column_widths,
        "format_str": "".join(f"{{:{width}}}" for width in column_widths),
        "total_width": total_width,
        "padding": padding,
    }


def print_table(headers: List[str], rows: List[List[Any]], title: str = None) -> None:
    """Print a colored table; short rows are padded and overwide cells truncated."""
    if not rows:
        if title:
            print(f"\n{title}:")
        print("No data found")
        return

    layout = create_table_layout(headers, rows)
    format_str = layout["format_str"]

    if title:
        print(f"\n{title}:")
        print()

    print(f"{TABLE_HEADER_COLOR}{format_str.format(*headers)}{ANSI_RESET}")
    print(f"{PROMPT_TEXT_COLOR}{horizontal_line('-')[:layout['total_width']]}{ANSI_RESET}")

    for row in rows:
        padded = list(row) + [""] * (len(headers) - len(row))
        cells = [
            truncate_cell(str(cell), layout["column_widths"][i] - layout["padding"])
            for i, cell in enumerate(padded[:len(headers)])
        ]
        print(f"{TABLE_ROW_COLOR}{format_str.format(*cells)}{ANSI_RESET}")


def print_rows(rows: Sequence[Dict[str, Any]], title: str = None, columns: Sequence[str] = None) -> None:
    """print_table over dict rows, numbers compacted."""
    if columns is None:
        seen: Dict[str, None] = {}
        for row in rows:
            for key in row:
                seen.setdefault(key, None)
        columns = list(seen)
    table = [[format_number(row.get(c)) if c in row else "" for c in columns] for row in rows]
    print_table(list(columns), table, title)


def print_fields(pairs: Sequence[Tuple[str, Any]], width: int = 17) -> None:
    """Aligned 'Label:    value' lines."""
    for label, value in pairs:
        print(f"{label + ':':<{width}}{value}")
