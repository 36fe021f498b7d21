"""CSV writers for the study outputs, plus a reader that round-trips them."""

from __future__ import annotations

import csv
from typing import IO, Iterable, Sequence

CONVERGENCE_HEADER = ("n", "h", "eta", "l2", "linf", "case", "strategy")
SPECTRUM_HEADER = ("index", "lambda", "branch")
EIGDIST_HEADER = ("n", "h", "mode", "l2", "linf")


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_rows(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _convert(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_rows(fh: IO[str]) -> list[dict]:
    """Parse a CSV written by this package; numeric fields become int/float."""
    return [{k: _convert(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]
