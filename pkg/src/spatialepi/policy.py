"""Hysteresis lockdown rules over configurable scopes.

A unit (the whole city, or one neighborhood) locks when its previous-day
active-case fraction reaches t_lock and reopens when it falls back to
t_open <= t_lock. Policy restrictions are applied to agents and firms
randomly, on top of (and overlapping with) their behavioral responses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .population import OLD


@dataclass
class PolicyRule:
    scope: str = "none"           # none | global | neighborhood | city-only | old-only
    t_lock: float = 0.10
    t_open: float = 0.05
    reopen_mode: str = "repeatable"   # repeatable | forever
    school_closure_share: float = 0.5
    nursing_home_size: int = 0    # old-only: 0 = confined at own Home

    def validate(self) -> None:
        if self.scope == "none":
            return
        if not (0.0 < self.t_open <= self.t_lock < 1.0):
            raise ConfigurationError(
                f"policy thresholds require 0 < t_open <= t_lock < 1; got "
                f"t_lock={self.t_lock}, t_open={self.t_open}")
        if not (0.0 <= self.school_closure_share <= 1.0):
            raise ConfigurationError("school_closure_share must lie in [0, 1]")

    @classmethod
    def from_config(cls, pol) -> "PolicyRule":
        return cls(scope=pol.scope, t_lock=pol.t_lock, t_open=pol.t_open,
                   reopen_mode=pol.reopen_mode,
                   school_closure_share=pol.school_closure_share,
                   nursing_home_size=pol.nursing_home_size)


class PolicyController:
    """Per-unit lock flags, the event log, and the policy-closed workplace set."""

    def __init__(self, rule: PolicyRule, n_units: int, wp_unit: np.ndarray):
        rule.validate()
        self.rule = rule
        self.n_units = n_units
        self.wp_unit = np.asarray(wp_unit, dtype=np.int64)
        self.locked = np.zeros(n_units, dtype=bool)
        self.ever_reopened = np.zeros(n_units, dtype=bool)
        self.closed_workplaces = np.zeros(len(self.wp_unit), dtype=bool)
        self.events: list[tuple[int, int, str]] = []

    def update(self, day: int, active_fraction, rng) -> list[tuple[int, int, str]]:
        """Advance the state machine with the previous day's active fractions.

        On each lock event a fresh uniform sample of school_closure_share of
        the unit's workplaces is designated policy-closed (drawn independently
        of the behavioral closures, so the two sets overlap at random).
        """
        if self.rule.scope == "none":
            return []
        af = np.atleast_1d(np.asarray(active_fraction, dtype=np.float64))
        new_events = []
        for u in range(self.n_units):
            if self.locked[u]:
                if af[u] <= self.rule.t_open:
                    self.locked[u] = False
                    self.ever_reopened[u] = True
                    self.closed_workplaces[self.wp_unit == u] = False
                    new_events.append((day, u, "reopen"))
            else:
                blocked = self.rule.reopen_mode == "forever" and self.ever_reopened[u]
                if not blocked and af[u] >= self.rule.t_lock:
                    self.locked[u] = True
                    self._draw_closures(u, rng)
                    new_events.append((day, u, "lock"))
        self.events.extend(new_events)
        return new_events

    def _draw_closures(self, unit: int, rng) -> None:
        if self.rule.scope not in ("global", "neighborhood"):
            return
        ids = np.flatnonzero(self.wp_unit == unit)
        k = int(round(self.rule.school_closure_share * len(ids)))
        if k > 0:
            chosen = rng.choice(ids, size=k, replace=False)
            self.closed_workplaces[chosen] = True

    def city_block_mask(self, agent_unit: np.ndarray, ptype: np.ndarray) -> np.ndarray:
        """Agents barred from the City (Period 1) by the active locks."""
        scope = self.rule.scope
        if scope == "none" or not self.locked.any():
            return np.zeros(len(ptype), dtype=bool)
        if scope in ("global", "city-only"):
            return np.ones(len(ptype), dtype=bool)
        if scope == "old-only":
            return ptype == OLD
        return self.locked[agent_unit]   # neighborhood scope

    def old_confinement_active(self) -> bool:
        return self.rule.scope == "old-only" and bool(self.locked[0])

    def n_locked(self) -> int:
        return int(self.locked.sum())


def regroup_into_nursing_homes(old_ids: np.ndarray, home_size: int, rng) -> np.ndarray:
    """Random partition of the Old into synthetic homes of `home_size`.

    Returns a group index aligned with old_ids (the last home may be smaller).
    """
    if home_size < 1:
        raise ConfigurationError(f"nursing home size must be >= 1; got {home_size}")
    order = rng.permutation(len(old_ids))
    groups = np.empty(len(old_ids), dtype=np.int64)
    groups[order] = np.arange(len(old_ids)) // home_size
    return groups
