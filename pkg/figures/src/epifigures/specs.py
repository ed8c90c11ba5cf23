"""Figure specifications: which CSV files feed which panels.

The engine's `experiment` command writes one timeseries CSV per plotted
curve plus a manifest (figure, label, file names, thresholds). A FigureSpec
is assembled from those manifest rows; rendering consumes nothing but CSVs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path


class FigureDataError(Exception):
    """A referenced CSV file or column is missing."""


@dataclass
class SeriesSpec:
    label: str
    timeseries_csv: str
    positions_csv: str = ""
    t_lock: float | None = None
    t_open: float | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class FigureSpec:
    figure: str
    series: list[SeriesSpec]
    base_dir: Path
    output_path: Path

    def threshold_lines(self) -> tuple[list[float], list[float]]:
        """(dashed lock thresholds, dash-dotted reopen/recalibrated lines).

        Reopen levels equal to a lock threshold (reopen-at-trigger rules)
        are not drawn twice.
        """
        locks, opens = [], []
        for s in self.series:
            if s.t_lock is not None and s.t_lock not in locks:
                locks.append(s.t_lock)
            target = s.extra.get("target")
            if target is not None and float(target) not in opens:
                opens.append(float(target))
            if s.t_open is not None and s.t_open not in opens:
                opens.append(s.t_open)
        opens = [level for level in opens if level not in locks]
        return locks, opens


def _parse_extra(text: str) -> dict:
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if "=" in part:
            key, _, value = part.partition("=")
            out[key.strip()] = value.strip()
    return out


def load_manifest(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise FigureDataError(f"manifest not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def spec_from_manifest(manifest_path, figure: str, output_dir=None,
                       image_format: str = "png") -> FigureSpec:
    rows = [r for r in load_manifest(manifest_path) if r.get("figure") == figure]
    if not rows:
        raise FigureDataError(f"manifest {manifest_path} has no rows for figure {figure!r}")
    base = Path(manifest_path).parent
    series = []
    for r in rows:
        series.append(SeriesSpec(
            label=r.get("label", ""),
            timeseries_csv=r.get("timeseries_csv", ""),
            positions_csv=r.get("positions_csv", "") or "",
            t_lock=float(r["t_lock"]) if r.get("t_lock") else None,
            t_open=float(r["t_open"]) if r.get("t_open") else None,
            extra=_parse_extra(r.get("extra", "") or ""),
        ))
    out_dir = Path(output_dir) if output_dir else base
    return FigureSpec(figure=figure, series=series, base_dir=base,
                      output_path=out_dir / f"{figure}.{image_format}")


def read_csv_columns(path, columns) -> dict:
    """Read named columns from a CSV; missing files or columns raise a
    diagnostic naming both."""
    path = Path(path)
    if not path.exists():
        raise FigureDataError(f"input CSV not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise FigureDataError(f"{path}: missing column {col!r}")
        data = {col: [] for col in columns}
        for row in reader:
            for col in columns:
                data[col].append(float(row[col]))
    return {col: values for col, values in data.items()}
