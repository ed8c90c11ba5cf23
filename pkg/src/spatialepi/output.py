"""CSV emission: fixed column orders, UTF-8, LF line endings, 6 significant
digits. The figure package depends on these schemas bit-exactly."""

from __future__ import annotations

import numpy as np

from .dynamics import STATE_NAMES
from .scenarios import GROUPS, AveragedSeries, ScenarioResult

TIMESERIES_COLUMNS = (
    ["day"]
    + [f"{g}_{s}" for g in GROUPS for s in STATE_NAMES]
    + ["active_all", "stay_home_frac", "firms_closed_frac", "locked_units",
       "cuminf_city", "cuminf_work", "cuminf_home"]
)

STEADY_COLUMNS = ["group", "inf_share_city", "inf_share_work", "inf_share_home",
                  "d", "r", "peak_active", "warning"]

EVENTS_COLUMNS = ["day", "unit", "event"]

POSITIONS_COLUMNS = ["agent_id", "x", "y", "state", "neighborhood"]

CALIBRATION_COLUMNS = ["parameter", "target", "achieved", "tolerance", "trials"]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".6g")


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_timeseries_csv(path, avg: AveragedSeries) -> None:
    rows = []
    for t in range(len(avg.days)):
        row = [int(avg.days[t])]
        for g in range(4):
            row.extend(avg.frac[t, g, :].tolist())
        row.extend([avg.active[t, 0], avg.stay_home[t], avg.firms_closed[t],
                    avg.locked_units[t], avg.cuminf[t, 0], avg.cuminf[t, 1],
                    avg.cuminf[t, 2]])
        rows.append(row)
    _write_rows(path, TIMESERIES_COLUMNS, rows)


def write_steady_csv(path, result: ScenarioResult) -> None:
    rows = []
    for row in result.steady:
        warnings = []
        if row.empty_denominator:
            warnings.append("empty_denominator")
        if result.nonconverged:
            warnings.append(f"nonconverged:{result.nonconverged}")
        rows.append([row.group, row.share_city, row.share_work, row.share_home,
                     row.d, row.r, row.peak_active, ";".join(warnings)])
    _write_rows(path, STEADY_COLUMNS, rows)


def write_events_csv(path, events) -> None:
    _write_rows(path, EVENTS_COLUMNS, [[d, u, kind] for d, u, kind in events])


def write_positions_csv(path, snapshot: dict) -> None:
    """Day-snapshot of agent positions and states (for the scatter maps)."""
    pos = snapshot["positions"]
    state = snapshot["state"]
    nb = snapshot["neighborhood"]
    rows = [[i, pos[i, 0], pos[i, 1], int(state[i]), int(nb[i])]
            for i in range(len(state))]
    _write_rows(path, POSITIONS_COLUMNS, rows)


def write_calibration_csv(path, rows) -> None:
    """rows: iterable of (parameter, target, achieved, tolerance, trials)."""
    _write_rows(path, CALIBRATION_COLUMNS, rows)


def write_manifest_csv(path, entries) -> None:
    """One row per plotted curve: figure, label, file names, threshold lines.

    `entries`: dicts with keys figure, label, timeseries_csv, steady_csv,
    events_csv, t_lock, t_open, extra (blank strings where not applicable).
    """
    header = ["figure", "label", "timeseries_csv", "steady_csv", "events_csv",
              "positions_csv", "t_lock", "t_open", "extra"]
    rows = [[e.get(col, "") for col in header] for e in entries]
    _write_rows(path, header, rows)
