"""Command line: run one scenario, run calibrations, reproduce named
experiments (one CSV per plotted curve plus a manifest), or sweep a key."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import output
from .calibrate import (contact_budget_report, fit_growth_rate, r0_from_growth,
                        solve_radius, solve_workplace_side, t_inf_from)
from .config import SCHEMA, SimulationConfig, load_config, set_key
from .errors import SpatialEpiError
from .scenarios import (apply_variant, lucas_naive, lucas_recalibrated,
                        average_series, run_scenario, sw_center_config,
                        with_neighborhoods, with_policy)

NURSING_SIZES_DEFAULT = (1, 5, 10, 20, 50)


def _experiment_scenarios(name: str, base: SimulationConfig, sizes) -> list[tuple[str, SimulationConfig, dict]]:
    caut52 = with_policy(base, "global", 0.05, 0.02, "repeatable")

    def nb(count, mixing=0.0, gradient=False, corner="SW", t_lock=0.05, t_open=0.02):
        cfg = with_neighborhoods(with_policy(base, "neighborhood", t_lock, t_open, "repeatable"),
                                 count, mixing=mixing, gradient=gradient, cluster_corner=corner)
        return sw_center_config(cfg)

    if name == "fig1":
        return [("benchmark", base.copy(), {}),
                ("no_behavior", apply_variant(base, "no-behavior"), {})]
    if name == "fig2":
        return [("benchmark", base.copy(), {}),
                ("random_matching", apply_variant(base, "random-matching"), {})]
    if name == "fig3":
        return [("no_lockdown", base.copy(), {}),
                ("lock10", with_policy(base, "global", 0.10, 0.10, "forever"), {}),
                ("lock5", with_policy(base, "global", 0.05, 0.05, "forever"), {}),
                ("lock3_5", with_policy(base, "global", 0.035, 0.035, "forever"), {})]
    if name == "fig4":
        return [("no_lockdown", base.copy(), {}),
                ("cautious10_5", with_policy(base, "global", 0.10, 0.05, "repeatable"), {}),
                ("cautious5_2", caut52, {})]
    if name == "fig5":
        return [("s1", caut52, {}), ("s9", nb(9), {}), ("s16", nb(16), {}), ("s25", nb(25), {})]
    if name == "fig6":
        return [("s9_mix0", nb(9), {}), ("s9_mix5", nb(9, mixing=0.05), {}),
                ("s25_mix0", nb(25), {}), ("s25_mix5", nb(25, mixing=0.05), {})]
    if name == "fig7":
        return [("homogeneous", nb(9), {}),
                ("het_sw", nb(9, gradient=True, corner="SW"), {}),
                ("het_ne", nb(9, gradient=True, corner="NE"), {})]
    if name == "fig8":
        return [("het_sw", nb(9, gradient=True, corner="SW"), {"snapshot_day": 10}),
                ("het_ne", nb(9, gradient=True, corner="NE"), {"snapshot_day": 10})]
    if name == "fig9":
        return [("no_lockdown", base.copy(), {}),
                ("general10_5", with_policy(base, "global", 0.10, 0.05, "repeatable"), {}),
                ("city_only", with_policy(base, "city-only", 0.10, 0.05, "repeatable"), {})]
    if name == "fig10":
        rows = [("old_home", with_policy(base, "old-only", 0.05, 0.02, "repeatable"), {}),
                ("general5_2", caut52, {})]
        for size in sizes:
            rows.append((f"nursing_{size}",
                         with_policy(base, "old-only", 0.05, 0.02, "repeatable",
                                     nursing_home_size=int(size)), {}))
        return rows
    raise SpatialEpiError(f"unknown experiment {name!r}")


def _write_scenario_files(outdir: Path, prefix: str, result) -> dict:
    files = {
        "timeseries_csv": f"{prefix}timeseries.csv",
        "steady_csv": f"{prefix}steady_state.csv",
        "events_csv": f"{prefix}events.csv",
    }
    output.write_timeseries_csv(outdir / files["timeseries_csv"], result.averaged)
    output.write_steady_csv(outdir / files["steady_csv"], result)
    output.write_events_csv(outdir / files["events_csv"], result.events)
    snap = result.replications[0].snapshot
    if snap:
        day, data = next(iter(sorted(snap.items())))
        output.write_positions_csv(outdir / f"{prefix}positions.csv", data)
        files["positions_csv"] = f"{prefix}positions.csv"
    return files


def _combined_steady_rows(labeled_results) -> list:
    rows = []
    for label, res in labeled_results:
        for row in res.steady:
            rows.append([label, row.group, row.share_city, row.share_work,
                         row.share_home, row.d, row.r, row.peak_active])
    return rows


def _write_combined_steady(path, labeled_results) -> None:
    header = ["label", "group", "inf_share_city", "inf_share_work",
              "inf_share_home", "d", "r", "peak_active"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in _combined_steady_rows(labeled_results):
            fh.write(",".join(output._fmt(v) for v in row) + "\n")


def cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else SimulationConfig()
    if args.variant:
        cfg = apply_variant(cfg, args.variant)
    if args.seed is not None:
        cfg.run.seed = args.seed
    if args.replications is not None:
        cfg.run.replications = args.replications
    cfg.validate()
    result = run_scenario(cfg, workers=args.workers, snapshot_day=args.snapshot_day)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_scenario_files(outdir, "", result)
    if result.nonconverged:
        print(f"warning: {result.nonconverged} non-converged replication(s) hit "
              f"max_days with active cases (flagged in steady_state.csv)", file=sys.stderr)
    print(f"wrote timeseries.csv, steady_state.csv, events.csv to {outdir}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config) if args.config else SimulationConfig()
    cfg.validate()
    trials = args.trials
    tol = 0.01
    rows = []
    radius = solve_radius(cfg.population.n, 1.0, 5.2, trials=trials, tolerance=tol,
                          seed=cfg.run.seed)
    rows.append(["contagion_radius", 0.00805, radius, tol, trials])
    side = solve_workplace_side(cfg.population.workplace_mean_size, radius, 6.0,
                                trials=max(trials * 5, 100), tolerance=tol,
                                seed=cfg.run.seed)
    rows.append(["workplace_side", 0.0547, side, tol, max(trials * 5, 100)])
    t_inf = t_inf_from(cfg.transitions.nu, cfg.transitions.rho)
    rows.append(["t_inf_days", 7.0, t_inf, 0.0, 0])
    rows.append(["r0", 3.45, r0_from_growth(0.35, 7.0), 0.0, 0])
    growth = fit_growth_rate(cfg, master_seed=cfg.run.seed)
    rows.append(["growth_rate", growth.target, growth.achieved, 0.05, 3])
    for name, target, achieved in contact_budget_report(cfg, trials=trials, seed=cfg.run.seed):
        rows.append([name, target, achieved, tol, trials])
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    output.write_calibration_csv(outdir / "calibration_report.csv", rows)
    for r in rows:
        print(f"{r[0]:22s} target={r[1]:<10.6g} achieved={r[2]:<12.6g}")
    if not growth.identified:
        print("warning: growth rate not identified (epidemic died out)", file=sys.stderr)
    return 0


def _run_lucas_experiment(name: str, base: SimulationConfig, outdir: Path,
                          workers: int) -> list[dict]:
    entries = []
    if name == "fig11":
        for label, t_lock, t_open in (("rule10_5", 0.10, 0.05), ("rule5_2", 0.05, 0.02)):
            res = lucas_naive(with_policy(base, "global", t_lock, t_open, "repeatable"),
                              workers=workers)
            for kind, sub in (("predicted", res.predicted), ("actual", res.actual)):
                prefix = f"{name}_{label}_{kind}_"
                files = _write_scenario_files(outdir, prefix, sub)
                entries.append({"figure": name, "label": f"{label}_{kind}",
                                "t_lock": t_lock, "t_open": t_open, **files})
        return entries
    # fig12 / fig13: recalibrated reopenings
    specs = {
        "fig12": [("rule3_5", with_policy(base, "global", 0.035, 0.035), 0.129),
                  ("rule5", with_policy(base, "global", 0.05, 0.05), 0.147)],
        "fig13": [("neighborhood9",
                   sw_center_config(with_neighborhoods(
                       with_policy(base, "neighborhood", 0.05, 0.02), 9)), 0.063)],
    }[name]
    for label, cfg, target in specs:
        res = lucas_recalibrated(cfg, target_peak=target)
        for kind, series_list in (("actual", res.actual_series), ("naive", res.naive_series)):
            avg = average_series(series_list)
            rows_prefix = f"{name}_{label}_{kind}_"
            output.write_timeseries_csv(outdir / f"{rows_prefix}timeseries.csv", avg)
            entries.append({
                "figure": name, "label": f"{label}_{kind}",
                "timeseries_csv": f"{rows_prefix}timeseries.csv",
                "t_lock": cfg.policy.t_lock, "t_open": f"{res.chosen_t_open:.6g}",
                "extra": f"target={target};realized={res.realized_second_peak:.4f}",
            })
    return entries


def cmd_experiment(args) -> int:
    base = load_config(args.config) if args.config else SimulationConfig()
    if args.seed is not None:
        base.run.seed = args.seed
    if args.replications is not None:
        base.run.replications = args.replications
    base.validate()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    name = args.name
    if name in ("fig11", "fig12", "fig13"):
        entries = _run_lucas_experiment(name, base, outdir, args.workers)
        output.write_manifest_csv(outdir / f"{name}_manifest.csv", entries)
        print(f"wrote {len(entries)} curve(s) and {name}_manifest.csv to {outdir}")
        return 0
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(NURSING_SIZES_DEFAULT)
    scen = _experiment_scenarios(name, base, sizes)
    entries, labeled = [], []
    for label, cfg, kwargs in scen:
        result = run_scenario(cfg, workers=args.workers,
                              snapshot_day=kwargs.get("snapshot_day", 0))
        prefix = f"{name}_{label}_"
        files = _write_scenario_files(outdir, prefix, result)
        entry = {"figure": name, "label": label, **files}
        if cfg.policy.scope != "none":
            entry["t_lock"] = cfg.policy.t_lock
            entry["t_open"] = cfg.policy.t_open
        entries.append(entry)
        labeled.append((label, result))
    _write_combined_steady(outdir / f"{name}_steady_state.csv", labeled)
    output.write_manifest_csv(outdir / f"{name}_manifest.csv", entries)
    print(f"wrote {len(scen)} curve(s), {name}_steady_state.csv, and "
          f"{name}_manifest.csv to {outdir}")
    return 0


def cmd_sweep(args) -> int:
    base = load_config(args.config) if args.config else SimulationConfig()
    if args.seed is not None:
        base.run.seed = args.seed
    if args.key not in SCHEMA:
        raise SpatialEpiError(f"unknown config key {args.key!r}")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    labeled, entries = [], []
    for raw in args.values.split(","):
        cfg = base.copy()
        set_key(cfg, args.key, raw.strip())
        if args.key == "neighborhoods.count" and cfg.neighborhoods.count > 1:
            cfg = sw_center_config(cfg)
        cfg.validate()
        result = run_scenario(cfg, workers=args.workers)
        label = raw.strip().replace(".", "_")
        prefix = f"sweep_{label}_"
        files = _write_scenario_files(outdir, prefix, result)
        entries.append({"figure": "sweep", "label": label, "extra": f"{args.key}={raw.strip()}",
                        **files})
        labeled.append((raw.strip(), result))
    _write_combined_steady(outdir / "sweep_steady_state.csv", labeled)
    output.write_manifest_csv(outdir / "sweep_manifest.csv", entries)
    print(f"wrote {len(labeled)} sweep point(s) to {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spatialepi",
                                description="Spatial epidemic simulator with network "
                                            "structure, behavior, and lockdown rules")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="config file (key = value lines); defaults otherwise")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        sp.add_argument("--workers", type=int, default=1,
                        help="parallel replication workers (results are identical for any count)")
        sp.add_argument("--replications", type=int, default=None, help="replication override")

    sp = sub.add_parser("run", help="run one scenario, write timeseries/steady_state/events CSVs")
    common(sp)
    sp.add_argument("--variant", choices=["benchmark", "no-behavior", "random-matching"],
                    default=None)
    sp.add_argument("--snapshot-day", type=int, default=0,
                    help="emit positions.csv for this day (replication 0)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("calibrate", help="solve geometry/contagion targets, write calibration_report.csv")
    sp.add_argument("--config", default=None)
    sp.add_argument("--out", default="out")
    sp.add_argument("--trials", type=int, default=30, help="Monte Carlo populations per bisection step")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("experiment", help="reproduce a named experiment (fig1..fig13)")
    common(sp)
    sp.add_argument("name", choices=[f"fig{i}" for i in range(1, 14)])
    sp.add_argument("--sizes", default=None,
                    help="nursing-home sizes for fig10, comma separated (default 1,5,10,20,50)")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("sweep", help="vary one config key over a list of values")
    common(sp)
    sp.add_argument("key", help="dotted config key, e.g. neighborhoods.count")
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpatialEpiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
