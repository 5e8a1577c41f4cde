"""CSV dialect shared by every command: header row, comma separator, '.' decimal."""

from __future__ import annotations

import csv
import io
from typing import Iterable, List, Sequence

from ..errors import ConfigurationError


def fmt(x) -> str:
    """Summary values: 9 significant digits."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".9g")


def fmt_exact(x: float) -> str:
    """Per-reading values: shortest round-trip representation."""
    return repr(float(x))


def write_rows(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def read_column(path, column: str) -> List[float]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ConfigurationError(f"{path}: no {column!r} column")
        try:
            return [float(row[column]) for row in reader]
        except ValueError as exc:
            raise ConfigurationError(f"{path}: {exc}") from exc
