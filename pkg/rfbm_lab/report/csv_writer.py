from __future__ import annotations

import csv
import io
from collections.abc import Mapping, Sequence
from pathlib import Path

from .json_writer import atomic_write_text


def render_csv(columns: Sequence[str], rows: Sequence[Mapping[str, object]], header: Mapping[str, object] | None = None) -> str:
    """CSV text with the column header always present.

    ``header`` entries become leading ``# key=value`` comment lines.
    """
    buffer = io.StringIO()
    for key in sorted(header or {}):
        buffer.write(f"# {key}={_format(header[key])}\n")  # type: ignore[index]
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _format(row.get(key)) for key in columns})
    return buffer.getvalue()


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Sequence[Mapping[str, object]],
    header: Mapping[str, object] | None = None,
) -> None:
    atomic_write_text(path, render_csv(columns, rows, header))
