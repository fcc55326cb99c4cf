"""CSV emission and parsing for sweep records and summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, fields
from os import PathLike
from typing import Iterable, Type, Union

from ..errors import DomainError, OutputError
from .sweep import SummaryRow, TradeoffRecord

__all__ = ["format_value", "emit_csv", "read_records"]


def format_value(value) -> str:
    """Render one cell: floats with 9 significant digits in scientific notation."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.8e}"
    return str(value)


def emit_csv(
    rows: Iterable[Union[TradeoffRecord, SummaryRow]],
    path: Union[str, PathLike],
    row_type: Type = TradeoffRecord,
) -> int:
    """Write rows as UTF-8 CSV with LF line endings.

    The header follows the field order of ``row_type``; an empty input
    yields a header-only file. Returns the number of data rows written.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    header = [f.name for f in fields(row_type)]
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if not isinstance(row, row_type):
                    raise DomainError(f"expected {row_type.__name__}, got {type(row).__name__}")
                writer.writerow([format_value(v) for v in astuple(row)])
                count += 1
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return count


def read_records(path: Union[str, PathLike]) -> list[TradeoffRecord]:
    """Parse a record CSV written by :func:`emit_csv`."""
    types = {f.name: f.type for f in fields(TradeoffRecord)}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(types):
            raise DomainError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for raw in reader:
            values = {}
            for name, kind in types.items():
                cell = raw[name]
                values[name] = int(cell) if kind in (int, "int") else float(cell) if kind in (float, "float") else cell
            out.append(TradeoffRecord(**values))
    return out
