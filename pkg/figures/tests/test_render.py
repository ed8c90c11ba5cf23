import csv

import numpy as np
import pytest

from epifigures import FigureDataError, build_figure, render, spec_from_manifest
from epifigures.cli import main as cli_main

# the engine's CSV interface, reproduced verbatim (the packages only share files)
GROUPS = ("all", "young", "notemp", "old")
STATES = ("s", "a", "y", "r", "d")
TS_COLUMNS = (
    ["day"]
    + [f"{g}_{s}" for g in GROUPS for s in STATES]
    + ["active_all", "stay_home_frac", "firms_closed_frac", "locked_units",
       "cuminf_city", "cuminf_work", "cuminf_home"]
)
MANIFEST_COLUMNS = ["figure", "label", "timeseries_csv", "steady_csv", "events_csv",
                    "t_lock", "t_open", "extra"]


def write_timeseries(path, days=60, peak=0.2, phase=0):
    rows = []
    for day in range(days):
        active = peak * np.exp(-((day - 25 - phase) / 10.0) ** 2)
        a, y = 0.7 * active, 0.3 * active
        row = {"day": day, "active_all": a + y, "stay_home_frac": 0.1,
               "firms_closed_frac": 0.2, "locked_units": 0,
               "cuminf_city": 0.01 * day / days, "cuminf_work": 0.005 * day / days,
               "cuminf_home": 0.008 * day / days}
        for g in GROUPS:
            row[f"{g}_a"] = a
            row[f"{g}_y"] = y
            row[f"{g}_r"] = 0.0
            row[f"{g}_d"] = 0.0
            row[f"{g}_s"] = 1.0 - a - y
        rows.append(row)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def write_manifest(path, entries):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        for e in entries:
            writer.writerow({k: e.get(k, "") for k in MANIFEST_COLUMNS})


def make_fig3_inputs(tmp_path):
    entries = []
    rules = [("no_lockdown", "", ""), ("lock10", 0.10, 0.10),
             ("lock5", 0.05, 0.05), ("lock3_5", 0.035, 0.035)]
    for i, (label, t_lock, t_open) in enumerate(rules):
        name = f"fig3_{label}_timeseries.csv"
        write_timeseries(tmp_path / name, phase=4 * i)
        entries.append({"figure": "fig3", "label": label, "timeseries_csv": name,
                        "t_lock": t_lock, "t_open": t_open})
    manifest = tmp_path / "fig3_manifest.csv"
    write_manifest(manifest, entries)
    return manifest


def test_fig3_series_and_rule_lines(tmp_path):
    manifest = make_fig3_inputs(tmp_path)
    spec = spec_from_manifest(manifest, "fig3")
    fig, info = build_figure(spec)
    assert info["n_series"] == 4
    assert info["n_hlines"] == 3          # 10%, 5%, 3.5% trigger lines
    ax = fig.axes[0]
    assert len(ax.lines) == 7             # four curves plus three rule lines
    dashed = [ln for ln in ax.lines if ln.get_linestyle() == "--"]
    assert sorted(ln.get_ydata()[0] for ln in dashed) == [0.035, 0.05, 0.10]
    assert spec.output_path.exists()


def test_fig8_scatter_renders_every_agent(tmp_path):
    rng = np.random.default_rng(0)
    entries = []
    sizes = (500, 400)
    for label, n in zip(("het_sw", "het_ne"), sizes):
        name = f"fig8_{label}_positions.csv"
        with open(tmp_path / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["agent_id", "x", "y", "state", "neighborhood"])
            for i in range(n):
                writer.writerow([i, rng.random(), rng.random(), rng.integers(0, 5), 0])
        ts = f"fig8_{label}_timeseries.csv"
        write_timeseries(tmp_path / ts)
        entries.append({"figure": "fig8", "label": label, "timeseries_csv": ts,
                        "positions_csv": name})
    manifest = tmp_path / "fig8_manifest.csv"
    with open(manifest, "w", newline="") as fh:
        cols = MANIFEST_COLUMNS + ["positions_csv"]
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for e in entries:
            writer.writerow({k: e.get(k, "") for k in cols})

    spec = spec_from_manifest(manifest, "fig8")
    fig, info = build_figure(spec)
    assert info["scatter_points"] == list(sizes)
    for ax, n in zip(fig.axes, sizes):
        offsets = ax.collections[0].get_offsets()
        assert len(offsets) == n          # every agent in positions.csv is drawn


def test_empty_timeseries_renders_cleanly(tmp_path):
    name = "fig4_empty_timeseries.csv"
    with open(tmp_path / name, "w", newline="") as fh:
        fh.write(",".join(TS_COLUMNS) + "\n")
    manifest = tmp_path / "fig4_manifest.csv"
    write_manifest(manifest, [{"figure": "fig4", "label": "empty",
                               "timeseries_csv": name}])
    path = render(spec_from_manifest(manifest, "fig4"))
    assert path.endswith("fig4.png")


def test_missing_column_diagnostic(tmp_path):
    name = "fig4_bad_timeseries.csv"
    with open(tmp_path / name, "w", newline="") as fh:
        fh.write("day,something_else\n1,2\n")
    manifest = tmp_path / "fig4_manifest.csv"
    write_manifest(manifest, [{"figure": "fig4", "label": "bad", "timeseries_csv": name}])
    with pytest.raises(FigureDataError, match="active_all"):
        build_figure(spec_from_manifest(manifest, "fig4"))


def test_missing_figure_in_manifest(tmp_path):
    manifest = make_fig3_inputs(tmp_path)
    with pytest.raises(FigureDataError, match="fig9"):
        spec_from_manifest(manifest, "fig9")


def test_lucas_panel_layout(tmp_path):
    entries = []
    for rule in ("rule3_5", "rule5"):
        for kind in ("actual", "naive"):
            name = f"fig12_{rule}_{kind}_timeseries.csv"
            write_timeseries(tmp_path / name)
            entries.append({"figure": "fig12", "label": f"{rule}_{kind}",
                            "timeseries_csv": name, "t_lock": 0.035, "t_open": 0.011,
                            "extra": "target=0.129;realized=0.14"})
    manifest = tmp_path / "fig12_manifest.csv"
    write_manifest(manifest, entries)
    fig, info = build_figure(spec_from_manifest(manifest, "fig12"))
    assert len(fig.axes) == 2             # one panel per rule
    assert info["n_series"] == 4


def test_cli_renders_all_figures(tmp_path, capsys):
    manifest = make_fig3_inputs(tmp_path)
    assert cli_main([str(manifest)]) == 0
    out = capsys.readouterr().out
    assert "fig3.png" in out
    assert (tmp_path / "fig3.png").exists()


def test_cli_error_on_missing_manifest(tmp_path, capsys):
    assert cli_main([str(tmp_path / "nothing_manifest.csv")]) == 2
    assert "error" in capsys.readouterr().err
