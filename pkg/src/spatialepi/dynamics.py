"""Daily epidemic dynamics: three location periods with contagion (City,
School/Work, Home), then stochastic health-state transitions.

Health states: Susceptible, Asymptomatic, sYmptomatic, Recovered, Dead.
Asymptomatics are contagious everywhere they go; sYmptomatics are isolated
at Home all day and (by default) contagious nowhere. Agents infected
during a day are marked immediately but become contagious (state A) only
from the next day, which removes any dependence on period ordering.

Each period's contagion runs over that period's co-location groups: the
City crowd in Period 1, each School/Work square in Period 2, and the
household in every period for whoever is at Home at the time - so a
household in full lockdown is exposed three times a day, which is what
gives lockdowns their burn-through momentum. One exception: workers whose
workplace closed (by the firm's choice or by policy) work remotely in
Period 2 and are not in contact with their household then.

Behavioral and policy gates for day t are computed from day t-1's recorded
counts: the response signal is the measured infection level, which is only
observable with a one-day lag.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .behavior import BehaviorParams, agents_staying_home, firms_closing
from .config import SimulationConfig
from .errors import ConfigurationError
from .policy import PolicyController, PolicyRule, regroup_into_nursing_homes
from .population import OLD, Population
from .spatial import UniformGridIndex, move_agents

SUSCEPTIBLE, ASYMPTOMATIC, SYMPTOMATIC, RECOVERED, DEAD = 0, 1, 2, 3, 4
STATE_NAMES = ("s", "a", "y", "r", "d")
LOC_CITY, LOC_WORK, LOC_HOME = 0, 1, 2
LOC_NAMES = ("city", "work", "home")


@dataclass
class TransitionParams:
    nu: float = 0.09
    rho: float = 0.05
    delta_young: float = 0.000533
    delta_old: float = 0.00533
    min_sympt_days_before_death: int = 3
    max_infection_days: int = 100

    def validate(self) -> None:
        if self.nu + self.rho > 1.0:
            raise ConfigurationError(f"nu + rho must be <= 1; got {self.nu + self.rho}")
        if self.rho + max(self.delta_young, self.delta_old) > 1.0:
            raise ConfigurationError("rho + delta must be <= 1")

    @classmethod
    def from_config(cls, tr) -> "TransitionParams":
        return cls(tr.nu, tr.rho, tr.delta_young, tr.delta_old,
                   tr.min_sympt_days_before_death, tr.max_infection_days)


@dataclass
class ContagionParams:
    radius_city: float = 0.00805
    radius_work: float = 0.00805
    prob_city: float = 0.032
    prob_work: float = 0.032
    prob_home: float = 0.064
    mu: float = 0.028175
    sympt_contagious_at_home: bool = False
    boundary: str = "reflect-redraw"
    workplace_side: float = 0.0547

    @classmethod
    def from_config(cls, cfg: SimulationConfig) -> "ContagionParams":
        con = cfg.contagion
        return cls(radius_city=con.radius_city(), radius_work=con.radius_work(),
                   prob_city=con.prob_city(), prob_work=con.prob_work(),
                   prob_home=con.prob_home, mu=con.mu,
                   sympt_contagious_at_home=con.symptomatic_contagious_at_home,
                   boundary=cfg.geometry.boundary, workplace_side=cfg.geometry.side())

    @property
    def full_mix_city(self) -> bool:
        return self.radius_city >= np.sqrt(2.0)

    @property
    def full_mix_work(self) -> bool:
        return self.radius_work >= np.sqrt(2.0) * self.workplace_side


@dataclass
class DaySchedule:
    """Period attendance after health, demographic, and behavior rules.

    Everyone alive is Home in Period 3; the two masks cover Periods 1-2.
    """
    city: np.ndarray
    work: np.ndarray


def apply_restrictions(schedule: DaySchedule, controller: PolicyController,
                       agent_unit: np.ndarray, ptype: np.ndarray,
                       workplace: np.ndarray) -> DaySchedule:
    """Mask the behavior-adjusted schedule with the active policy locks.

    Restrictions only ever remove location visits, never add any.
    """
    city = schedule.city & ~controller.city_block_mask(agent_unit, ptype)
    work = schedule.work.copy()
    if controller.closed_workplaces.any():
        wp = np.maximum(workplace, 0)
        work &= ~(controller.closed_workplaces[wp] & (workplace >= 0))
    return DaySchedule(city=city, work=work)


def infection_probability(n_contagious_contacts, prob: float):
    """P(infection) with independent per-contact draws: 1 - (1-prob)^c."""
    return 1.0 - np.power(1.0 - prob, n_contagious_contacts)


def state_transitions(state, ptype, infection_day, days_sympt, day, params: TransitionParams, u):
    """End-of-day transitions, in place. `u` is one uniform draw per agent.

    A single draw decides each agent's exclusive outcome: an Asymptomatic
    becomes sYmptomatic on u < nu, Recovers on nu <= u < nu + rho; a
    sYmptomatic Recovers on u < rho, Dies on rho <= u < rho + delta(type)
    once it has been symptomatic for the minimum number of days. Any agent
    infected at least max_infection_days ago recovers with certainty.
    """
    a_mask = state == ASYMPTOMATIC
    y_mask = state == SYMPTOMATIC
    days_sympt[y_mask] += 1
    infected = a_mask | y_mask
    if not infected.any():
        return
    forced = infected & (day - infection_day >= params.max_infection_days)
    a_roll = a_mask & ~forced
    to_y = a_roll & (u < params.nu)
    to_r_a = a_roll & (u >= params.nu) & (u < params.nu + params.rho)
    y_roll = y_mask & ~forced
    to_r_y = y_roll & (u < params.rho)
    delta = np.where(ptype == OLD, params.delta_old, params.delta_young)
    eligible = y_roll & (days_sympt >= params.min_sympt_days_before_death)
    to_d = eligible & (u >= params.rho) & (u < params.rho + delta)
    state[forced | to_r_a | to_r_y] = RECOVERED
    state[to_d] = DEAD
    state[to_y] = SYMPTOMATIC
    days_sympt[to_y] = 0


@dataclass
class TimeSeries:
    """Per-day outputs of one replication (day 0 is the seeded initial state)."""

    n: int
    n_workplaces: int
    days: np.ndarray
    counts: np.ndarray        # (T, 3, 5) agents by [type, state]
    stay_home: np.ndarray     # (T,) behavioral City-skippers
    firms_closed: np.ndarray  # (T,) behaviorally closed workplaces
    locked_units: np.ndarray  # (T,)
    cum_inf: np.ndarray       # (T, 3, 3) cumulative infections by [location, type]
    events: list
    converged: bool
    snapshot: dict | None = None

    def group_counts(self) -> np.ndarray:
        """(T, 4, 5) with group 0 = all, then young/notemp/old."""
        total = self.counts.sum(axis=1, keepdims=True)
        return np.concatenate([total, self.counts], axis=1)

    def active_fraction(self) -> np.ndarray:
        c = self.counts.sum(axis=1)
        return (c[:, ASYMPTOMATIC] + c[:, SYMPTOMATIC]) / self.n


class World:
    """Mutable simulation state for one replication."""

    def __init__(self, pop: Population, config: SimulationConfig, dynamics_seed):
        self.pop = pop
        self.cfg = config
        self.tparams = TransitionParams.from_config(config.transitions)
        self.tparams.validate()
        self.cparams = ContagionParams.from_config(config)
        beh = config.behavior
        self.bparams = BehaviorParams(phi=beh.phi, ibar_agents=beh.ibar_agents,
                                      ibar_firms=beh.ibar_firms, enabled=beh.enabled)

        ss = dynamics_seed if isinstance(dynamics_seed, np.random.SeedSequence) \
            else np.random.SeedSequence(dynamics_seed)
        move_ss, inf_ss, trans_ss, pol_ss = ss.spawn(4)
        self.gen_move = np.random.default_rng(move_ss)
        self.gen_infect = np.random.default_rng(inf_ss)
        self.gen_trans = np.random.default_rng(trans_ss)
        self.gen_policy = np.random.default_rng(pol_ss)

        n = pop.n
        self.state = np.full(n, SUSCEPTIBLE, dtype=np.int8)
        self.infection_day = np.full(n, -1, dtype=np.int32)
        self.infection_location = np.full(n, -1, dtype=np.int8)
        self.days_sympt = np.zeros(n, dtype=np.int32)
        self.positions = pop.positions.copy()
        self.cum_inf = np.zeros((3, 3), dtype=np.int64)
        if pop.seed_ids is not None and len(pop.seed_ids):
            seeds = pop.seed_ids
            self.state[seeds] = ASYMPTOMATIC
            self.infection_day[seeds] = 0
            self.infection_location[seeds] = LOC_CITY
            np.add.at(self.cum_inf[LOC_CITY], pop.ptype[seeds], 1)

        rule = PolicyRule.from_config(config.policy)
        if rule.scope == "neighborhood":
            n_units = pop.layout.count
            self.agent_unit = pop.agent_neighborhood.astype(np.int64)
            wp_unit = pop.wp_neighborhood
        else:
            n_units = 1
            self.agent_unit = np.zeros(n, dtype=np.int64)
            wp_unit = np.zeros(pop.n_workplaces, dtype=np.int64)
        self.policy = PolicyController(rule, n_units, wp_unit)
        self.unit_pop = np.maximum(np.bincount(self.agent_unit, minlength=n_units), 1)

        self.nursing_group = np.full(n, -1, dtype=np.int64)
        self.wp_adj = None
        if pop.n_workplaces > 0 and not self.cparams.full_mix_work:
            self.wp_adj = _workplace_adjacency(pop, self.cparams.radius_work,
                                               self.cparams.workplace_side)

        # Lucas-critique continuation overrides: when set, these frozen sets
        # replace the behavioral response entirely.
        self.frozen_stay_home: np.ndarray | None = None
        self.frozen_closed_firms: np.ndarray | None = None

        self.day = 0
        self.counts = self._count_states()
        self._rows = []
        self._append_row(stay_n=0, closed_n=0)
        self.snapshots: dict[int, dict] = {}

    # ------------------------------------------------------------------ #

    def _count_states(self) -> np.ndarray:
        flat = np.bincount(self.pop.ptype.astype(np.int64) * 5 + self.state, minlength=15)
        return flat.reshape(3, 5)

    def _append_row(self, stay_n: int, closed_n: int) -> None:
        self._rows.append((self.day, self.counts.copy(), int(stay_n), int(closed_n),
                           self.policy.n_locked(), self.cum_inf.copy()))

    def active_count(self) -> int:
        c = self.counts.sum(axis=0)
        return int(c[ASYMPTOMATIC] + c[SYMPTOMATIC])

    def _active_fraction_by_unit(self) -> np.ndarray:
        act = (self.state == ASYMPTOMATIC) | (self.state == SYMPTOMATIC)
        return np.bincount(self.agent_unit[act], minlength=self.policy.n_units) / self.unit_pop

    def _behavior_signal(self) -> float:
        c = self.counts.sum(axis=0)
        if self.bparams.signal == "active":
            return float(c[ASYMPTOMATIC] + c[SYMPTOMATIC]) / self.pop.n
        return float(c[ASYMPTOMATIC]) / self.pop.n

    # ------------------------------------------------------------------ #

    def run_day(self) -> None:
        pop, cp = self.pop, self.cparams
        n = pop.n
        day = self.day + 1

        # gates from day t-1 counts
        signal = self._behavior_signal()
        events = self.policy.update(day, self._active_fraction_by_unit(), self.gen_policy)
        if self.policy.rule.scope == "old-only" and self.policy.rule.nursing_home_size >= 1:
            for _, _, kind in events:
                if kind == "lock":
                    old_ids = np.flatnonzero(pop.ptype == OLD)
                    self.nursing_group[old_ids] = regroup_into_nursing_homes(
                        old_ids, self.policy.rule.nursing_home_size, self.gen_policy)
                elif kind == "reopen":
                    self.nursing_group[:] = -1

        if self.frozen_stay_home is not None:
            stay = self.frozen_stay_home
            closed_b = self.frozen_closed_firms
        else:
            stay = agents_staying_home(pop.risk_rank, signal, self.bparams)
            closed_b = firms_closing(pop.wp_rank, signal, self.bparams)

        alive = self.state != DEAD
        not_sympt = alive & (self.state != SYMPTOMATIC)
        base_city = not_sympt & ~stay
        has_wp = pop.workplace >= 0
        base_work = not_sympt & has_wp
        if closed_b.any():
            base_work &= ~closed_b[np.maximum(pop.workplace, 0)]
        schedule = apply_restrictions(DaySchedule(base_city, base_work), self.policy,
                                      self.agent_unit, pop.ptype, pop.workplace)
        remote = not_sympt & has_wp & ~schedule.work   # work remotely, isolated

        # Period 1: move in the City, City contagion, Home contagion for those
        # kept home by policy or health; agents who chose not to interact
        # self-isolate and skip the Period-1 household contact too
        self.positions = move_agents(self.positions, schedule.city, cp.mu, self.gen_move,
                                     side=1.0, boundary=cp.boundary)
        pending = np.zeros(n, dtype=bool)
        pending_loc = np.full(n, -1, dtype=np.int8)
        # residents of synthetic nursing homes are kept apart by the facility
        # during the day and congregate only in the evening period
        in_nursing = self.nursing_group >= 0
        hit = self._contagion_city(schedule.city)
        pending |= hit
        pending_loc[hit] = LOC_CITY
        hit = self._contagion_home(pending, alive & ~schedule.city & ~stay & ~in_nursing)
        pending |= hit
        pending_loc[hit] = LOC_HOME

        # Period 2: School/Work contagion, Home contagion for those neither
        # attending nor working remotely
        hit = self._contagion_work(schedule.work, pending)
        pending |= hit
        pending_loc[hit] = LOC_WORK
        hit = self._contagion_home(pending, alive & ~schedule.work & ~remote & ~in_nursing)
        pending |= hit
        pending_loc[hit] = LOC_HOME

        # Period 3: everyone is Home (household, or nursing home under lock)
        hit = self._contagion_home(pending, alive)
        pending |= hit
        pending_loc[hit] = LOC_HOME

        # end-of-day transitions for previously infected agents
        u = self.gen_trans.random(n)
        state_transitions(self.state, pop.ptype, self.infection_day, self.days_sympt,
                          day, self.tparams, u)

        # newly infected become Asymptomatic, contagious from tomorrow
        if pending.any():
            ids = np.flatnonzero(pending)
            self.state[ids] = ASYMPTOMATIC
            self.infection_day[ids] = day
            self.infection_location[ids] = pending_loc[ids]
            np.add.at(self.cum_inf, (pending_loc[ids], pop.ptype[ids].astype(np.int64)), 1)

        self.day = day
        self.counts = self._count_states()
        self._append_row(stay_n=int(stay.sum()), closed_n=int(closed_b.sum()))

    # ------------------------------------------------------------------ #

    def _contagion_city(self, attend: np.ndarray) -> np.ndarray:
        cp = self.cparams
        n = self.pop.n
        u = self.gen_infect.random(n)   # drawn unconditionally: stream alignment
        hit = np.zeros(n, dtype=bool)
        cont = attend & (self.state == ASYMPTOMATIC)
        sus = attend & (self.state == SUSCEPTIBLE)
        n_cont = int(cont.sum())
        if n_cont == 0 or not sus.any():
            return hit
        sus_idx = np.flatnonzero(sus)
        if cp.full_mix_city:
            c = np.full(len(sus_idx), n_cont, dtype=np.int64)
        else:
            index = UniformGridIndex(self.positions[cont], cp.radius_city, side=1.0)
            c = index.count_within(self.positions[sus_idx])
        p = infection_probability(c, cp.prob_city)
        hit[sus_idx[u[sus_idx] < p]] = True
        return hit

    def _contagion_work(self, attend: np.ndarray, pending: np.ndarray) -> np.ndarray:
        cp = self.cparams
        pop = self.pop
        n = pop.n
        u = self.gen_infect.random(n)
        hit = np.zeros(n, dtype=bool)
        cont = attend & (self.state == ASYMPTOMATIC)
        sus = attend & (self.state == SUSCEPTIBLE) & ~pending
        if not cont.any() or not sus.any():
            return hit
        sus_idx = np.flatnonzero(sus)
        if cp.full_mix_work or self.wp_adj is None:
            per_wp = np.bincount(pop.workplace[cont], minlength=pop.n_workplaces)
            c = per_wp[pop.workplace[sus_idx]]
        else:
            c = (self.wp_adj @ cont.astype(np.int32))[sus_idx]
        p = infection_probability(c, cp.prob_work)
        hit[sus_idx[u[sus_idx] < p]] = True
        return hit

    def _contagion_home(self, pending: np.ndarray, present: np.ndarray) -> np.ndarray:
        """One period of Home contagion among the agents in `present`."""
        cp = self.cparams
        pop = self.pop
        n = pop.n
        u = self.gen_infect.random(n)
        hit = np.zeros(n, dtype=bool)
        cont = present & (self.state == ASYMPTOMATIC)
        if cp.sympt_contagious_at_home:
            cont |= present & (self.state == SYMPTOMATIC)
        sus = present & (self.state == SUSCEPTIBLE) & ~pending
        if not cont.any() or not sus.any():
            return hit
        group = self._home_groups()
        gcnt = np.bincount(group[cont])
        sus_idx = np.flatnonzero(sus)
        g_sus = group[sus_idx]
        c = np.zeros(len(sus_idx), dtype=np.int64)
        in_range = g_sus < len(gcnt)
        c[in_range] = gcnt[g_sus[in_range]]
        p = infection_probability(c, cp.prob_home)
        hit[sus_idx[u[sus_idx] < p]] = True
        return hit

    def _home_groups(self) -> np.ndarray:
        group = self.pop.household.astype(np.int64)
        if self.policy.old_confinement_active() and (self.nursing_group >= 0).any():
            group = group.copy()
            m = self.nursing_group >= 0
            group[m] = self.pop.n_households + self.nursing_group[m]
        return group

    # ------------------------------------------------------------------ #

    def run(self, max_days: int | None = None, snapshot_day: int = 0) -> TimeSeries:
        max_days = self.cfg.run.max_days if max_days is None else max_days
        while self.day < max_days and self.active_count() > 0:
            self.run_day()
            if snapshot_day and self.day == snapshot_day:
                self.snapshots[self.day] = {
                    "positions": self.positions.copy(),
                    "state": self.state.copy(),
                    "neighborhood": self.pop.agent_neighborhood.copy(),
                }
        return self.to_series()

    def to_series(self) -> TimeSeries:
        rows = self._rows
        return TimeSeries(
            n=self.pop.n,
            n_workplaces=self.pop.n_workplaces,
            days=np.array([r[0] for r in rows], dtype=np.int64),
            counts=np.stack([r[1] for r in rows]),
            stay_home=np.array([r[2] for r in rows], dtype=np.int64),
            firms_closed=np.array([r[3] for r in rows], dtype=np.int64),
            locked_units=np.array([r[4] for r in rows], dtype=np.int64),
            cum_inf=np.stack([r[5] for r in rows]),
            events=list(self.policy.events),
            converged=self.active_count() == 0,
            snapshot=dict(self.snapshots) if self.snapshots else None,
        )

    # ------------------------------------------------------------------ #

    def snapshot_state(self) -> dict:
        """Copy of everything mutable, for branch-and-resume experiments."""
        return {
            "day": self.day,
            "state": self.state.copy(),
            "infection_day": self.infection_day.copy(),
            "infection_location": self.infection_location.copy(),
            "days_sympt": self.days_sympt.copy(),
            "positions": self.positions.copy(),
            "cum_inf": self.cum_inf.copy(),
            "counts": self.counts.copy(),
            "nursing_group": self.nursing_group.copy(),
            "rows": list(self._rows),
            "policy_locked": self.policy.locked.copy(),
            "policy_reopened": self.policy.ever_reopened.copy(),
            "policy_closed_wp": self.policy.closed_workplaces.copy(),
            "policy_events": list(self.policy.events),
            "rng": [g.bit_generator.state for g in
                    (self.gen_move, self.gen_infect, self.gen_trans, self.gen_policy)],
            "frozen_stay": None if self.frozen_stay_home is None else self.frozen_stay_home.copy(),
            "frozen_closed": None if self.frozen_closed_firms is None
                             else self.frozen_closed_firms.copy(),
        }

    def restore_state(self, snap: dict) -> None:
        self.day = snap["day"]
        self.state = snap["state"].copy()
        self.infection_day = snap["infection_day"].copy()
        self.infection_location = snap["infection_location"].copy()
        self.days_sympt = snap["days_sympt"].copy()
        self.positions = snap["positions"].copy()
        self.cum_inf = snap["cum_inf"].copy()
        self.counts = snap["counts"].copy()
        self.nursing_group = snap["nursing_group"].copy()
        self._rows = list(snap["rows"])
        self.policy.locked = snap["policy_locked"].copy()
        self.policy.ever_reopened = snap["policy_reopened"].copy()
        self.policy.closed_workplaces = snap["policy_closed_wp"].copy()
        self.policy.events = list(snap["policy_events"])
        for gen, st in zip((self.gen_move, self.gen_infect, self.gen_trans, self.gen_policy),
                           snap["rng"]):
            gen.bit_generator.state = copy.deepcopy(st)
        self.frozen_stay_home = None if snap["frozen_stay"] is None else snap["frozen_stay"].copy()
        self.frozen_closed_firms = (None if snap["frozen_closed"] is None
                                    else snap["frozen_closed"].copy())
        self.snapshots = {}


def _workplace_adjacency(pop: Population, radius: float, wp_side: float):
    """Sparse same-workplace within-radius contact graph (positions are fixed).

    Workplaces are laid out on a virtual grid with gaps wider than the
    contagion radius, so one spatial index resolves every workplace at once.
    """
    young = np.flatnonzero(pop.workplace >= 0)
    if len(young) == 0:
        return None
    q = int(np.ceil(np.sqrt(pop.n_workplaces)))
    pitch = wp_side + 3.0 * radius
    wid = pop.workplace[young].astype(np.int64)
    offsets = np.column_stack([(wid % q) * pitch, (wid // q) * pitch])
    pos = pop.wp_positions[young] + offsets
    index = UniformGridIndex(pos, radius, side=q * pitch)
    qi, ci = index.pairs_within()
    rows = young[qi]
    cols = young[ci]
    data = np.ones(len(rows), dtype=np.int32)
    return sp.csr_matrix((data, (rows, cols)), shape=(pop.n, pop.n))
