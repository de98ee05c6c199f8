"""Versioned CSV artifacts with replay-fidelity float formatting."""

from __future__ import annotations

from pathlib import Path

CSV_VERSION = "eqsentinel-csv v1"


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, schema: str, columns: list[str], rows) -> Path:
    """Write rows with a version/schema comment line above the header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {CSV_VERSION} schema={schema}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_summary(path: Path, schema: str, entries: dict) -> Path:
    return write_csv(
        path, schema, ["key", "value"], [(k, v) for k, v in entries.items()]
    )


def write_figure_data(path: Path, header: list[str], rows) -> Path:
    """Whitespace-delimited data file, one block per figure."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: Path) -> tuple[str, list[str], list[list[str]]]:
    """Read back a versioned CSV as (schema line, columns, raw rows)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path} is missing its version line")
    columns = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return lines[0], columns, rows
