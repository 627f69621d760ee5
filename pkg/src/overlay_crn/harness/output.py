"""CSV and plot-data writers.

Floats are written with ``repr`` (shortest round-trip form), missing values
as empty fields, and the column order is fixed by the rows, so the same rows
always give the same bytes.  Wall-clock timings are only written on request.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path
from typing import Iterable, Optional

from .runner import ResultRow

__all__ = ["row_columns", "emit_csv", "emit_plotdata", "read_csv", "format_value"]


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def row_columns(rows: list[ResultRow], sweep_name: str = "sweep",
                series_name: Optional[str] = None) -> tuple[list[str], list[str]]:
    """(axis columns, value columns) in output order."""
    if rows:
        sweep_name = rows[0].sweep_name
        series_name = rows[0].series_name
    axes = ([series_name] if series_name else []) + [sweep_name]
    values: list[str] = []
    for r in rows:
        for k in r.values:
            if k not in values:
                values.append(k)
    return axes, values


def _write_csv(rows, fh, timings, sweep_name, series_name):
    axes, values = row_columns(rows, sweep_name, series_name)
    header = axes + values + (["wall_time"] if timings else []) + ["error"]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        cells = ([r.series] if r.series_name else []) + [r.sweep] + [r.values.get(k) for k in values]
        line = [format_value(v) for v in cells]
        if timings:
            line.append(format_value(r.wall_time))
        line.append(r.error)
        w.writerow(line)


def emit_csv(rows: Iterable[ResultRow], path, timings: bool = False, sweep_name: str = "sweep",
             series_name: Optional[str] = None):
    """Write rows to ``path`` (a file name or an open text stream)."""
    rows = list(rows)
    if hasattr(path, "write"):
        _write_csv(rows, path, timings, sweep_name, series_name)
        return path
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        _write_csv(rows, fh, timings, sweep_name, series_name)
    return path


def _parse(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> list[dict]:
    """Rows as dicts, numbers parsed back to int or float."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return [{k: _parse(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]


def _slug(v) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", format_value(v))


def emit_plotdata(rows: Iterable[ResultRow], directory, stem: str = "series") -> list[Path]:
    """One whitespace-separated file per series, numeric columns only."""
    rows = list(rows)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    _, values = row_columns(rows)
    value_cols = [c for c in values
                  if all(isinstance(r.values.get(c, 0.0), (int, float)) for r in rows)]
    groups: dict = {}
    for r in rows:
        groups.setdefault(r.series, []).append(r)
    paths = []
    for key, group in groups.items():
        name = stem if rows[0].series_name is None else f"{stem}_{rows[0].series_name}-{_slug(key)}"
        path = directory / f"{name}.dat"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("# " + " ".join([rows[0].sweep_name] + value_cols) + "\n")
            for r in group:
                vals = [r.sweep] + [r.values.get(c) for c in value_cols]
                fh.write(" ".join(format_value(v) if v is not None else "nan" for v in vals) + "\n")
        paths.append(path)
    return paths
