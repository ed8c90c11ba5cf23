"""Scenario composition: seeded replications run to steady state, averaging,
steady-state summary rows, and the naive-policymaker (Lucas) procedures."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibrate import random_matching_params
from .config import SimulationConfig
from .dynamics import (ASYMPTOMATIC, DEAD, RECOVERED, SYMPTOMATIC,
                       TimeSeries, World)
from .errors import CalibrationError, ConfigurationError
from .population import seed_initial_infections, synthesize_population

GROUPS = ("all", "young", "notemp", "old")


def replication_seed(master_seed: int, rep: int, stream: int) -> np.random.SeedSequence:
    """Documented replication hash: SeedSequence([master_seed, rep, stream]).

    Stream 0 seeds population synthesis, 1 the daily dynamics, 2 auxiliary
    draws (the frozen-attendance sets of the recalibration procedure).
    Adding replications never changes earlier ones, and scenarios sharing a
    master seed share populations and all non-behavioral draws.
    """
    return np.random.SeedSequence([int(master_seed), int(rep), int(stream)])


def make_world(config: SimulationConfig, master_seed: int, rep: int) -> World:
    pop = synthesize_population(config, np.random.default_rng(replication_seed(master_seed, rep, 0)))
    seed_initial_infections(pop, config.run.initial_infected, config.initial_focus())
    return World(pop, config, replication_seed(master_seed, rep, 1))


def run_replication(config: SimulationConfig, master_seed: int, rep: int,
                    snapshot_day: int = 0) -> TimeSeries:
    """One replication to steady state (no Asymptomatic and no sYmptomatic)."""
    return make_world(config, master_seed, rep).run(snapshot_day=snapshot_day)


def _rep_task(args):
    config, master_seed, rep, snapshot_day = args
    return run_replication(config, master_seed, rep, snapshot_day)


@dataclass
class AveragedSeries:
    """Pointwise mean over replications; shorter runs are padded at their
    terminal (steady-state) values before averaging."""

    days: np.ndarray
    frac: np.ndarray          # (T, 4, 5) state fractions of each group
    active: np.ndarray        # (T, 4) per-group (A+Y) fraction
    stay_home: np.ndarray     # (T,) behavioral City-skippers / N
    firms_closed: np.ndarray  # (T,) behaviorally closed workplaces / W
    locked_units: np.ndarray  # (T,)
    cuminf: np.ndarray        # (T, 3) cumulative infections by location / N


def _pad(a: np.ndarray, t: int) -> np.ndarray:
    if len(a) >= t:
        return a
    tail = np.repeat(a[-1:], t - len(a), axis=0)
    return np.concatenate([a, tail], axis=0)


def average_series(reps: list[TimeSeries]) -> AveragedSeries:
    t = max(len(s.days) for s in reps)
    fracs, actives, stays, firms, locked, cuminf = [], [], [], [], [], []
    for s in reps:
        gc = _pad(s.group_counts().astype(np.float64), t)
        sizes = np.maximum(gc[0].sum(axis=1), 1.0)
        f = gc / sizes[None, :, None]
        fracs.append(f)
        actives.append(f[:, :, ASYMPTOMATIC] + f[:, :, SYMPTOMATIC])
        stays.append(_pad(s.stay_home.astype(np.float64), t) / s.n)
        firms.append(_pad(s.firms_closed.astype(np.float64), t) / max(s.n_workplaces, 1))
        locked.append(_pad(s.locked_units.astype(np.float64), t))
        cuminf.append(_pad(s.cum_inf.sum(axis=2).astype(np.float64), t) / s.n)
    return AveragedSeries(
        days=np.arange(t),
        frac=np.mean(fracs, axis=0),
        active=np.mean(actives, axis=0),
        stay_home=np.mean(stays, axis=0),
        firms_closed=np.mean(firms, axis=0),
        locked_units=np.mean(locked, axis=0),
        cuminf=np.mean(cuminf, axis=0),
    )


@dataclass
class SteadyRow:
    """One row of the steady-state table: infection-location shares among the
    ever-infected of the group, final Dead/Recovered fractions of the group,
    and the group's peak active fraction on the averaged series."""

    group: str
    share_city: float
    share_work: float
    share_home: float
    d: float
    r: float
    peak_active: float
    empty_denominator: bool = False


def summarize(reps: list[TimeSeries], averaged: AveragedSeries | None = None) -> list[SteadyRow]:
    averaged = average_series(reps) if averaged is None else averaged
    cum = np.mean([s.cum_inf[-1] for s in reps], axis=0)   # (3 locations, 3 types)
    rows = []
    for g, name in enumerate(GROUPS):
        by_loc = cum.sum(axis=1) if g == 0 else cum[:, g - 1]
        total = by_loc.sum()
        empty = total <= 0.0
        shares = by_loc / total if not empty else np.zeros(3)
        rows.append(SteadyRow(
            group=name,
            share_city=float(shares[0]), share_work=float(shares[1]), share_home=float(shares[2]),
            d=float(averaged.frac[-1, g, DEAD]), r=float(averaged.frac[-1, g, RECOVERED]),
            peak_active=float(averaged.active[:, g].max()),
            empty_denominator=bool(empty),
        ))
    return rows


@dataclass
class ScenarioResult:
    config: SimulationConfig
    replications: list[TimeSeries]
    averaged: AveragedSeries
    steady: list[SteadyRow]
    nonconverged: int

    @property
    def events(self) -> list:
        return self.replications[0].events

    def row(self, group: str) -> SteadyRow:
        return self.steady[GROUPS.index(group)]

    def peak(self, group: str = "all") -> float:
        return self.row(group).peak_active

    def dead_plus_recovered(self, group: str = "all") -> float:
        r = self.row(group)
        return r.d + r.r


def run_scenario(config: SimulationConfig, workers: int = 1, snapshot_day: int = 0,
                 master_seed: int | None = None, replications: int | None = None) -> ScenarioResult:
    """Run all replications (optionally in parallel) and aggregate.

    The aggregation is a deterministic reduce in replication order, so the
    result is bit-identical for any worker count.
    """
    config.validate()
    seed = config.run.seed if master_seed is None else master_seed
    n_reps = config.run.replications if replications is None else replications
    tasks = [(config, seed, rep, snapshot_day if rep == 0 else 0) for rep in range(n_reps)]
    if workers > 1 and n_reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            series = list(pool.map(_rep_task, tasks))
    else:
        series = [_rep_task(t) for t in tasks]
    averaged = average_series(series)
    return ScenarioResult(config=config, replications=series, averaged=averaged,
                          steady=summarize(series, averaged),
                          nonconverged=sum(0 if s.converged else 1 for s in series))


# --------------------------------------------------------------------- #
# scenario builders

def apply_variant(config: SimulationConfig, variant: str) -> SimulationConfig:
    if variant == "benchmark":
        return config.copy()
    if variant == "no-behavior":
        cfg = config.copy()
        cfg.behavior.enabled = False
        return cfg
    if variant == "random-matching":
        return random_matching_params(config)
    raise ConfigurationError(f"unknown variant {variant!r}")


def with_policy(config: SimulationConfig, scope: str, t_lock: float, t_open: float,
                reopen_mode: str = "repeatable", school_closure_share: float = 0.5,
                nursing_home_size: int = 0) -> SimulationConfig:
    cfg = config.copy()
    cfg.policy.scope = scope
    cfg.policy.t_lock = t_lock
    cfg.policy.t_open = t_open
    cfg.policy.reopen_mode = reopen_mode
    cfg.policy.school_closure_share = school_closure_share
    cfg.policy.nursing_home_size = nursing_home_size
    return cfg


def with_neighborhoods(config: SimulationConfig, count: int, mixing: float = 0.0,
                       gradient: bool = False, cluster_corner: str = "SW") -> SimulationConfig:
    cfg = config.copy()
    cfg.neighborhoods.count = count
    cfg.neighborhoods.mixing = mixing
    cfg.neighborhoods.gradient = gradient
    cfg.neighborhoods.cluster_corner = cluster_corner
    return cfg


def sw_center_config(config: SimulationConfig) -> SimulationConfig:
    """Center the initial cluster on the southwest neighborhood (the
    cluster_corner mirror maps it to the northeast one). Keeps the seeded
    cluster inside a single neighborhood for any neighborhood count."""
    cfg = config.copy()
    k = int(round(cfg.neighborhoods.count ** 0.5))
    cfg.run.initial_focus_x = 1.0 / (2 * k)
    cfg.run.initial_focus_y = 1.0 / (2 * k)
    return cfg


# --------------------------------------------------------------------- #
# wave decomposition and the naive-policymaker procedures

@dataclass
class WaveStats:
    first_peak: float
    first_peak_day: int
    second_peak: float
    second_peak_day: int
    first_reopen_day: int


def wave_stats(series: TimeSeries) -> WaveStats:
    """First- and second-wave peaks split at the first reopening event."""
    active = series.active_fraction()
    reopen_days = [d for d, _, kind in series.events if kind == "reopen"]
    if not reopen_days:
        i = int(np.argmax(active))
        return WaveStats(float(active[i]), i, 0.0, -1, -1)
    r0 = min(reopen_days)
    i1 = int(np.argmax(active[: r0 + 1]))
    post = active[r0 + 1:]
    if len(post) == 0:
        return WaveStats(float(active[i1]), i1, 0.0, -1, r0)
    i2 = int(np.argmax(post))
    return WaveStats(float(active[i1]), i1, float(post[i2]), r0 + 1 + i2, r0)


@dataclass
class LucasNaiveResult:
    """Prediction = the same lockdown rule with behavior disabled; actual =
    behavior enabled; both on matched seeds."""

    predicted: ScenarioResult
    actual: ScenarioResult
    predicted_waves: list[WaveStats]
    actual_waves: list[WaveStats]

    def mean(self, which: str, attr: str) -> float:
        waves = self.predicted_waves if which == "predicted" else self.actual_waves
        return float(np.mean([getattr(w, attr) for w in waves]))


def lucas_naive(config: SimulationConfig, workers: int = 1) -> LucasNaiveResult:
    if config.policy.scope == "none":
        raise ConfigurationError("lucas_naive needs a lockdown rule configured")
    actual = run_scenario(config, workers=workers)
    predicted = run_scenario(apply_variant(config, "no-behavior"), workers=workers)
    return LucasNaiveResult(
        predicted=predicted, actual=actual,
        predicted_waves=[wave_stats(s) for s in predicted.replications],
        actual_waves=[wave_stats(s) for s in actual.replications],
    )


def _run_to_first_peak(world: World, drop_ratio: float = 0.9):
    """Advance until active cases fall `drop_ratio` below their running max
    after a lockdown started; return (snapshot at the peak day, peak value)."""
    best, best_active = None, -1.0
    locked_seen = False
    t_lock = world.policy.rule.t_lock
    while world.day < world.cfg.run.max_days and world.active_count() > 0:
        world.run_day()
        a = world.active_count() / world.pop.n
        locked_seen = locked_seen or world.policy.n_locked() > 0
        if a > best_active:
            best_active = a
            best = world.snapshot_state()
        elif locked_seen and best_active >= t_lock and a <= drop_ratio * best_active:
            break
    if best is None:
        raise CalibrationError("epidemic died out before any peak formed")
    return best, best_active


def _frozen_sets(world: World, stay_frac: float, closed_frac: float, rng):
    n, w = world.pop.n, world.pop.n_workplaces
    stay = np.zeros(n, dtype=bool)
    stay[rng.permutation(n)[: int(round(stay_frac * n))]] = True
    closed = np.zeros(w, dtype=bool)
    if w:
        closed[rng.permutation(w)[: int(round(closed_frac * w))]] = True
    return stay, closed


def _continuation(world: World, t_open: float, naive: bool, freeze=None) -> TimeSeries:
    """Run a restored world to steady state under a new reopening threshold.

    Every unit gets exactly one reopening under the recalibrated threshold
    and never re-locks afterwards (reopen forever), regardless of episodes
    it went through before the re-evaluation. In naive mode behavior is
    disabled and attendance is frozen at the supplied sets.
    """
    world.policy.rule.t_open = t_open
    world.policy.rule.reopen_mode = "forever"
    world.policy.ever_reopened[:] = False
    if naive:
        world.bparams.enabled = False
        world.frozen_stay_home, world.frozen_closed_firms = freeze
    else:
        world.bparams.enabled = world.cfg.behavior.enabled
        world.frozen_stay_home = None
        world.frozen_closed_firms = None
    return world.run()


def _post_reopen_peak(series: TimeSeries, resume_day: int) -> float:
    reopen_days = [d for d, _, kind in series.events if kind == "reopen" and d > resume_day]
    if not reopen_days:
        return 0.0
    active = series.active_fraction()
    post = active[min(reopen_days) + 1:]
    return float(post.max()) if len(post) else 0.0


@dataclass
class LucasRecalibratedResult:
    target_peak: float
    chosen_t_open: float
    naive_peak: float
    search_converged: bool
    first_peaks: list[float]
    realized_second_peaks: list[float]
    naive_series: list[TimeSeries]
    actual_series: list[TimeSeries]

    @property
    def realized_second_peak(self) -> float:
        return float(np.mean(self.realized_second_peaks))

    @property
    def overshoot(self) -> float:
        return self.realized_second_peak / self.target_peak - 1.0


def lucas_recalibrated(config: SimulationConfig, target_peak: float,
                       search_reps: int = 5, tolerance: float = 0.005,
                       max_iter: int = 20, master_seed: int | None = None,
                       stage1_t_open: float | None = None) -> LucasRecalibratedResult:
    """The four-stage recalibrated-reopening procedure.

    Stage 1 runs the true model (behavior on) under the lockdown rule up to
    the first peak, per replication. Stage 2 freezes City attendance and
    workplace openness at the levels observed at the peak (fixed random
    subsets). Stage 3 bisects the reopening threshold so the frozen,
    no-behavior continuation peaks at `target_peak`. Stage 4 resumes the
    true model from the stage-1 state with the chosen threshold.

    During stage 1 a single global unit stays locked until the re-evaluation
    (reopening awaits the recalibration); under neighborhood scope the
    units keep cycling under the rule's own pre-existing reopen threshold,
    which is what the aggregate first peak emerges from.
    """
    if config.policy.scope == "none":
        raise ConfigurationError("lucas_recalibrated needs a lockdown rule configured")
    seed = config.run.seed if master_seed is None else master_seed
    n_reps = config.run.replications
    search_reps = min(search_reps, n_reps)

    stage1_cfg = config.copy()
    if stage1_t_open is not None:
        stage1_cfg.policy.t_open = stage1_t_open
    elif config.policy.scope != "neighborhood":
        stage1_cfg.policy.t_open = min(stage1_cfg.policy.t_open, 1e-6)
    stage1_cfg.validate()

    worlds, snaps, first_peaks, freezes = [], [], [], []
    for rep in range(n_reps):
        world = make_world(stage1_cfg, seed, rep)
        snap, peak = _run_to_first_peak(world)
        _, _, stay_n, closed_n, _, _ = snap["rows"][-1]
        stay_frac = stay_n / world.pop.n
        closed_frac = closed_n / max(world.pop.n_workplaces, 1)
        freeze_rng = np.random.default_rng(replication_seed(seed, rep, 2))
        worlds.append(world)
        snaps.append(snap)
        first_peaks.append(peak)
        freezes.append(_frozen_sets(world, stay_frac, closed_frac, freeze_rng))

    def naive_peak_at(t_open: float) -> tuple[float, list[TimeSeries]]:
        peaks, series_list = [], []
        for rep in range(search_reps):
            world = worlds[rep]
            world.restore_state(snaps[rep])
            series = _continuation(world, t_open, naive=True, freeze=freezes[rep])
            peaks.append(_post_reopen_peak(series, snaps[rep]["day"]))
            series_list.append(series)
        return float(np.mean(peaks)), series_list

    lo, hi = 1e-3, config.policy.t_lock
    f_hi, hi_series = naive_peak_at(hi)
    f_lo, lo_series = naive_peak_at(lo)
    if target_peak > f_hi + tolerance or target_peak < f_lo - tolerance:
        raise CalibrationError(
            f"target peak {target_peak} unattainable in the naive model: "
            f"bracket [{f_lo:.4f} at t_open={lo}, {f_hi:.4f} at t_open={hi}]")
    chosen, naive_peak, naive_series = hi, f_hi, hi_series
    converged = abs(f_hi - target_peak) <= tolerance
    if not converged:
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            val, series_list = naive_peak_at(mid)
            chosen, naive_peak, naive_series = mid, val, series_list
            if abs(val - target_peak) <= tolerance:
                converged = True
                break
            if val < target_peak:
                lo = mid
            else:
                hi = mid

    realized, actual_series = [], []
    for rep in range(n_reps):
        world = worlds[rep]
        world.restore_state(snaps[rep])
        series = _continuation(world, chosen, naive=False)
        realized.append(_post_reopen_peak(series, snaps[rep]["day"]))
        actual_series.append(series)

    return LucasRecalibratedResult(
        target_peak=target_peak, chosen_t_open=chosen, naive_peak=naive_peak,
        search_converged=converged, first_peaks=first_peaks,
        realized_second_peaks=realized, naive_series=naive_series,
        actual_series=actual_series)
