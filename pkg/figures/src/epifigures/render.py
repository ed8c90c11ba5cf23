"""Rendering: active-case curves with threshold rule lines, behavioral-response
panels, day-snapshot scatter maps, and the nursing-home dot plot."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .specs import FigureDataError, FigureSpec, read_csv_columns

STATE_COLORS = {0: "#c0c0c0", 1: "#d62728", 2: "#ff7f0e", 3: "#2ca02c", 4: "#000000"}
STATE_LABELS = {0: "susceptible", 1: "asymptomatic", 2: "symptomatic",
                3: "recovered", 4: "dead"}


def _plot_active_curves(ax, spec: FigureSpec, series=None):
    for s in series if series is not None else spec.series:
        data = read_csv_columns(spec.base_dir / s.timeseries_csv, ["day", "active_all"])
        ax.plot(data["day"], data["active_all"], label=s.label.replace("_", " "))
    locks, opens = spec.threshold_lines()
    for level in locks:
        ax.axhline(level, linestyle="--", color="gray", linewidth=0.8)
    for level in opens:
        ax.axhline(level, linestyle="-.", color="darkgray", linewidth=0.8)
    ax.set_xlabel("day")
    ax.set_ylabel("active cases (A+Y) / N")
    ax.legend(fontsize=8)


def _plot_behavior_panel(ax, spec: FigureSpec):
    for s in spec.series:
        data = read_csv_columns(spec.base_dir / s.timeseries_csv,
                                ["day", "stay_home_frac", "firms_closed_frac"])
        ax.plot(data["day"], data["stay_home_frac"],
                label=f"{s.label.replace('_', ' ')}: staying home")
        ax.plot(data["day"], data["firms_closed_frac"], linestyle="--",
                label=f"{s.label.replace('_', ' ')}: firms closed")
    ax.set_xlabel("day")
    ax.set_ylabel("share responding")
    ax.legend(fontsize=7)


def _plot_location_panel(ax, spec: FigureSpec):
    for s in spec.series[:1]:
        data = read_csv_columns(spec.base_dir / s.timeseries_csv,
                                ["day", "cuminf_city", "cuminf_work", "cuminf_home"])
        for col, label in (("cuminf_city", "City"), ("cuminf_work", "School/Work"),
                           ("cuminf_home", "Home")):
            ax.plot(data["day"], data[col], label=label)
    ax.set_xlabel("day")
    ax.set_ylabel("cumulative infections / N")
    ax.legend(fontsize=8)


def _plot_scatter_panel(ax, spec: FigureSpec, s) -> int:
    if not s.positions_csv:
        raise FigureDataError(
            f"figure {spec.figure}: series {s.label!r} has no positions_csv "
            f"(run the experiment with a snapshot day)")
    data = read_csv_columns(spec.base_dir / s.positions_csv,
                            ["agent_id", "x", "y", "state", "neighborhood"])
    states = np.asarray(data["state"], dtype=int)
    colors = [STATE_COLORS[v] for v in states]
    ax.scatter(data["x"], data["y"], s=1.5, c=colors, linewidths=0)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_title(s.label.replace("_", " "), fontsize=9)
    return len(states)


def _plot_nursing_dots(ax, spec: FigureSpec):
    sizes, deaths = [], []
    family_level = None
    for s in spec.series:
        steady = s.extra.get("steady_csv") or s.timeseries_csv.replace(
            "timeseries.csv", "steady_state.csv")
        rows = read_csv_columns(spec.base_dir / steady, ["d"])
        old_d = rows["d"][3]   # rows ordered all/young/notemp/old
        if s.label.startswith("nursing_"):
            sizes.append(int(s.label.split("_")[1]))
            deaths.append(old_d)
        elif s.label == "old_home":
            family_level = old_d
    order = np.argsort(sizes)
    ax.plot(np.asarray(sizes)[order], np.asarray(deaths)[order], "o-")
    if family_level is not None:
        ax.axhline(family_level, linestyle=":", color="gray", linewidth=0.9)
        ax.annotate("locked down at own Home", (0.5, family_level),
                    fontsize=7, va="bottom")
    ax.set_xlabel("nursing home size")
    ax.set_ylabel("Old dead at steady state")


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib Figure; returns (figure, info) where info
    reports what was drawn (series/hline/point counts) for verification."""
    info = {"figure": spec.figure, "n_series": 0, "n_hlines": 0, "scatter_points": []}
    fig_id = spec.figure

    if fig_id == "fig8" or all(s.positions_csv for s in spec.series):
        fig, axes = plt.subplots(1, max(len(spec.series), 1), figsize=(5 * len(spec.series), 5))
        axes = np.atleast_1d(axes)
        for ax, s in zip(axes, spec.series):
            info["scatter_points"].append(_plot_scatter_panel(ax, spec, s))
        handles = [plt.Line2D([], [], marker="o", linestyle="", color=c, label=STATE_LABELS[k])
                   for k, c in STATE_COLORS.items()]
        axes[-1].legend(handles=handles, fontsize=7, loc="upper right")
    elif fig_id in ("fig1", "fig2"):
        fig, axes = plt.subplots(1, 3, figsize=(13, 4))
        _plot_active_curves(axes[0], spec)
        _plot_behavior_panel(axes[1], spec)
        _plot_location_panel(axes[2], spec)
        info["n_series"] = len(spec.series)
    elif fig_id == "fig10":
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        curve_series = [s for s in spec.series if not s.label.startswith("nursing_")]
        _plot_active_curves(axes[0], spec, series=curve_series)
        _plot_nursing_dots(axes[1], spec)
        info["n_series"] = len(curve_series)
    elif fig_id in ("fig11", "fig12", "fig13"):
        rules = sorted({s.label.rsplit("_", 1)[0] for s in spec.series})
        fig, axes = plt.subplots(1, len(rules), figsize=(5.5 * len(rules), 4.2))
        axes = np.atleast_1d(axes)
        for ax, rule in zip(axes, rules):
            sub = [s for s in spec.series if s.label.startswith(rule)]
            subspec = FigureSpec(figure=spec.figure, series=sub,
                                 base_dir=spec.base_dir, output_path=spec.output_path)
            _plot_active_curves(ax, subspec)
            ax.set_title(rule.replace("_", " "), fontsize=9)
            info["n_series"] += len(sub)
            locks, opens = subspec.threshold_lines()
            info["n_hlines"] += len(locks) + len(opens)
        fig.tight_layout()
        fig.savefig(spec.output_path, dpi=150)
        return fig, info
    else:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        _plot_active_curves(ax, spec)
        info["n_series"] = len(spec.series)

    if fig_id not in ("fig11", "fig12", "fig13") and info["n_series"]:
        locks, opens = spec.threshold_lines()
        info["n_hlines"] = len(locks) + len(opens)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    return fig, info


def render(spec: FigureSpec) -> str:
    """Render and save the figure; returns the written image path."""
    fig, _ = build_figure(spec)
    plt.close(fig)
    return str(spec.output_path)
