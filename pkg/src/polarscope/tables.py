"""CSV output helpers: provenance comment line, stable float formatting."""

from __future__ import annotations

import csv
from pathlib import Path


def fmt(value) -> str:
    """Render a cell; floats use shortest round-trip repr, None is blank."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, header: list[str], rows: list[list], config_hash: str) -> Path:
    """Write a table with a leading "# config=<hash>" provenance comment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config={config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Read a table written by write_csv; comment lines are skipped."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    rows = [dict(zip(header, row)) for row in reader]
    return header, rows


def parse_cell(text: str) -> float | None:
    return None if text == "" else float(text)
