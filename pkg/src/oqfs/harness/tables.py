"""Aligned-column text tables for run reports."""

from __future__ import annotations


def format_table(headers: list[str], rows: list[list]) -> str:
    """First column left-aligned, the rest right-aligned; floats at 0.1f."""

    def cell(value) -> str:
        if isinstance(value, float):
            return f"{value:.1f}"
        return str(value)

    grid = [[cell(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in grid:
        for i, text in enumerate(row):
            widths[i] = max(widths[i], len(text))

    def line(cells: list[str]) -> str:
        parts = [cells[0].ljust(widths[0])]
        parts.extend(c.rjust(w) for c, w in zip(cells[1:], widths[1:]))
        return "  ".join(parts).rstrip()

    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in grid)
    return "\n".join(out)
