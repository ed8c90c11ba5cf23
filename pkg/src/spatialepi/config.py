"""Simulation configuration: dataclasses, key=value file parsing, serialization.

The config file format is plain text, one `dotted.key = value` per line,
`#` starts a comment. Every key has a default (the full-scale calibration),
so an empty file is a valid benchmark configuration. Unknown keys are
rejected with a line-numbered diagnostic.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import ConfigurationError

BOUNDARY_MODES = ("reflect-redraw", "torus")
POLICY_SCOPES = ("none", "global", "neighborhood", "city-only", "old-only")
REOPEN_MODES = ("repeatable", "forever")
CLUSTER_CORNERS = ("SW", "NE")
NEIGHBORHOOD_COUNTS = (1, 9, 16, 25)


@dataclass
class GroupQuarterConfig:
    size: int = 50
    share_old: float = 0.029    # fraction of Old living in group quarters
    share_young: float = 0.024  # fraction of Young living in group quarters


@dataclass
class PopulationConfig:
    n: int = 26600
    share_young: float = 0.65
    share_notemployed: float = 0.19
    share_old: float = 0.16
    # empty string -> the built-in synthetic histogram (mean size 3.3)
    household_histogram_path: str = ""
    group_quarter: GroupQuarterConfig = field(default_factory=GroupQuarterConfig)
    workplace_mean_size: int = 100


@dataclass
class GeometryConfig:
    # School/Work square side, relative to the unit City side. The raw
    # table value 0.003304 is an area; pass it with workplace_side_is_area.
    workplace_side: float = 0.0547
    workplace_side_is_area: bool = False
    boundary: str = "reflect-redraw"

    def side(self) -> float:
        return self.workplace_side ** 0.5 if self.workplace_side_is_area else self.workplace_side


@dataclass
class ContagionConfig:
    radius: float = 0.00805
    prob_home: float = 0.064
    prob_out: float = 0.032
    mu: float = 0.028175
    # sYmptomatics are isolated at Home; whether they still infect household
    # members there is model-ambiguous. Off reproduces the benchmark tables.
    symptomatic_contagious_at_home: bool = False
    # Runtime overrides used by the random-matching variant; not part of the
    # file schema (produced by calibrate.random_matching_params).
    override_radius_city: float | None = None
    override_radius_work: float | None = None
    override_prob_city: float | None = None
    override_prob_work: float | None = None

    def radius_city(self) -> float:
        return self.radius if self.override_radius_city is None else self.override_radius_city

    def radius_work(self) -> float:
        return self.radius if self.override_radius_work is None else self.override_radius_work

    def prob_city(self) -> float:
        return self.prob_out if self.override_prob_city is None else self.override_prob_city

    def prob_work(self) -> float:
        return self.prob_out if self.override_prob_work is None else self.override_prob_work


@dataclass
class TransitionConfig:
    nu: float = 0.09            # daily A -> Y
    rho: float = 0.05           # daily recovery, from A and from Y
    delta_young: float = 0.000533
    delta_old: float = 0.00533
    min_sympt_days_before_death: int = 3
    max_infection_days: int = 100


@dataclass
class BehaviorConfig:
    enabled: bool = True
    phi: float = 0.88
    ibar_agents: float = 0.01
    ibar_firms: float = 0.00062


@dataclass
class PolicyConfig:
    scope: str = "none"
    t_lock: float = 0.10
    t_open: float = 0.05
    reopen_mode: str = "repeatable"
    school_closure_share: float = 0.5
    # old-only lockdowns: 0 = Old confined in their own Home,
    # k >= 1 = Old regrouped into synthetic homes of size k
    nursing_home_size: int = 0


@dataclass
class NeighborhoodConfig:
    count: int = 1
    mixing: float = 0.0         # probability a Young's workplace is outside the home neighborhood
    gradient: bool = False      # household-size gradient (southwest large -> northeast singles)
    cluster_corner: str = "SW"  # where the initial infection cluster sits


@dataclass
class RunConfig:
    replications: int = 20
    max_days: int = 1500
    seed: int = 0
    initial_infected: int = 30
    initial_focus_x: float = 0.25
    initial_focus_y: float = 0.25


@dataclass
class SimulationConfig:
    population: PopulationConfig = field(default_factory=PopulationConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    contagion: ContagionConfig = field(default_factory=ContagionConfig)
    transitions: TransitionConfig = field(default_factory=TransitionConfig)
    behavior: BehaviorConfig = field(default_factory=BehaviorConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    neighborhoods: NeighborhoodConfig = field(default_factory=NeighborhoodConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def copy(self) -> "SimulationConfig":
        return copy.deepcopy(self)

    def initial_focus(self) -> tuple[float, float]:
        """Initial-cluster location; the NE corner option mirrors the focus."""
        fx, fy = self.run.initial_focus_x, self.run.initial_focus_y
        if self.neighborhoods.cluster_corner == "NE":
            return (1.0 - fx, 1.0 - fy)
        return (fx, fy)

    def validate(self) -> None:
        validate_config(self)


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _choice(options):
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}; got {s!r}")
        return s
    return parse


# file key -> ((section attr, [sub attr,] field attr), parser)
SCHEMA = {
    "population.n": (("population", "n"), int),
    "population.shares.young": (("population", "share_young"), float),
    "population.shares.notemployed": (("population", "share_notemployed"), float),
    "population.shares.old": (("population", "share_old"), float),
    "population.household_histogram_path": (("population", "household_histogram_path"), str),
    "population.group_quarter.size": (("population", "group_quarter", "size"), int),
    "population.group_quarter.share_old": (("population", "group_quarter", "share_old"), float),
    "population.group_quarter.share_young": (("population", "group_quarter", "share_young"), float),
    "population.workplace_mean_size": (("population", "workplace_mean_size"), int),
    "geometry.workplace_side": (("geometry", "workplace_side"), float),
    "geometry.workplace_side_is_area": (("geometry", "workplace_side_is_area"), _parse_bool),
    "geometry.boundary": (("geometry", "boundary"), _choice(BOUNDARY_MODES)),
    "contagion.radius": (("contagion", "radius"), float),
    "contagion.prob_home": (("contagion", "prob_home"), float),
    "contagion.prob_out": (("contagion", "prob_out"), float),
    "contagion.mu": (("contagion", "mu"), float),
    "contagion.symptomatic_contagious_at_home":
        (("contagion", "symptomatic_contagious_at_home"), _parse_bool),
    "transitions.nu": (("transitions", "nu"), float),
    "transitions.rho": (("transitions", "rho"), float),
    "transitions.delta_young": (("transitions", "delta_young"), float),
    "transitions.delta_old": (("transitions", "delta_old"), float),
    "transitions.min_sympt_days_before_death":
        (("transitions", "min_sympt_days_before_death"), int),
    "transitions.max_infection_days": (("transitions", "max_infection_days"), int),
    "behavior.enabled": (("behavior", "enabled"), _parse_bool),
    "behavior.phi": (("behavior", "phi"), float),
    "behavior.ibar_agents": (("behavior", "ibar_agents"), float),
    "behavior.ibar_firms": (("behavior", "ibar_firms"), float),
    "policy.scope": (("policy", "scope"), _choice(POLICY_SCOPES)),
    "policy.t_lock": (("policy", "t_lock"), float),
    "policy.t_open": (("policy", "t_open"), float),
    "policy.reopen_mode": (("policy", "reopen_mode"), _choice(REOPEN_MODES)),
    "policy.school_closure_share": (("policy", "school_closure_share"), float),
    "policy.nursing_home_size": (("policy", "nursing_home_size"), int),
    "neighborhoods.count": (("neighborhoods", "count"), int),
    "neighborhoods.mixing": (("neighborhoods", "mixing"), float),
    "neighborhoods.gradient": (("neighborhoods", "gradient"), _parse_bool),
    "neighborhoods.cluster_corner": (("neighborhoods", "cluster_corner"), _choice(CLUSTER_CORNERS)),
    "run.replications": (("run", "replications"), int),
    "run.max_days": (("run", "max_days"), int),
    "run.seed": (("run", "seed"), int),
    "run.initial_infected": (("run", "initial_infected"), int),
    "run.initial_focus_x": (("run", "initial_focus_x"), float),
    "run.initial_focus_y": (("run", "initial_focus_y"), float),
}


def _get_holder(cfg: SimulationConfig, path):
    obj = cfg
    for attr in path[:-1]:
        obj = getattr(obj, attr)
    return obj, path[-1]


def set_key(cfg: SimulationConfig, key: str, raw_value: str) -> None:
    """Set one dotted config key from its textual value (shared by parser and sweeps)."""
    if key not in SCHEMA:
        raise ConfigurationError(f"unknown key {key!r}")
    path, parse = SCHEMA[key]
    try:
        value = parse(raw_value)
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key!r}: {exc}") from None
    holder, attr = _get_holder(cfg, path)
    setattr(holder, attr, value)


def get_key(cfg: SimulationConfig, key: str):
    path, _ = SCHEMA[key]
    holder, attr = _get_holder(cfg, path)
    return getattr(holder, attr)


def parse_config(text: str, origin: str = "<config>") -> SimulationConfig:
    """Parse config text; every omitted key keeps its default."""
    cfg = SimulationConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            set_key(cfg, key, value)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{origin}:{lineno}: {exc}") from None
    return cfg


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), origin=str(path))


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(cfg: SimulationConfig) -> str:
    """Serialize with all defaults materialized. parse(emit(cfg)) == cfg."""
    lines = []
    for key in SCHEMA:
        lines.append(f"{key} = {_format_value(get_key(cfg, key))}")
    return "\n".join(lines) + "\n"


def validate_config(cfg: SimulationConfig) -> None:
    pop, tr, beh, pol, nb = cfg.population, cfg.transitions, cfg.behavior, cfg.policy, cfg.neighborhoods

    shares = (pop.share_young, pop.share_notemployed, pop.share_old)
    if any(s < 0 for s in shares) or abs(sum(shares) - 1.0) > 1e-9:
        raise ConfigurationError(
            f"population shares must be non-negative and sum to 1; got {shares}")
    if pop.n < 100:
        raise ConfigurationError(f"population.n must be >= 100; got {pop.n}")
    if pop.group_quarter.size < 1:
        raise ConfigurationError("group_quarter.size must be >= 1")
    if not (0.0 <= pop.group_quarter.share_old <= 1.0 and 0.0 <= pop.group_quarter.share_young <= 1.0):
        raise ConfigurationError("group-quarter shares must lie in [0, 1]")
    if pop.workplace_mean_size < 1:
        raise ConfigurationError("workplace_mean_size must be >= 1")

    side = cfg.geometry.side()
    if not (0.0 < side < 1.0):
        raise ConfigurationError(f"workplace side must lie in (0, 1); got {side}")

    con = cfg.contagion
    if not (0.0 < con.radius < 1.0):
        raise ConfigurationError(f"contagion.radius must lie in (0, 1); got {con.radius}")
    if not (0.0 <= con.mu < 1.0):
        raise ConfigurationError(f"contagion.mu must lie in [0, 1); got {con.mu}")
    for name in ("prob_home", "prob_out"):
        v = getattr(con, name)
        if not (0.0 <= v <= 1.0):
            raise ConfigurationError(f"contagion.{name} must lie in [0, 1]; got {v}")

    for name in ("nu", "rho", "delta_young", "delta_old"):
        v = getattr(tr, name)
        if not (0.0 <= v <= 1.0):
            raise ConfigurationError(f"transitions.{name} must lie in [0, 1]; got {v}")
    if tr.nu + tr.rho > 1.0:
        raise ConfigurationError(f"transitions require nu + rho <= 1; got {tr.nu + tr.rho}")
    if tr.rho + max(tr.delta_young, tr.delta_old) > 1.0:
        raise ConfigurationError("transitions require rho + delta <= 1")
    if tr.max_infection_days < 1:
        raise ConfigurationError("transitions.max_infection_days must be >= 1")

    if not (0.0 <= beh.phi <= 1.0):
        raise ConfigurationError(f"behavior.phi must lie in [0, 1]; got {beh.phi}")
    if beh.enabled and (beh.ibar_agents <= 0 or beh.ibar_firms <= 0):
        raise ConfigurationError("behavior thresholds ibar must be positive")

    if pol.scope != "none":
        if not (0.0 < pol.t_open <= pol.t_lock < 1.0):
            raise ConfigurationError(
                f"policy thresholds require 0 < t_open <= t_lock < 1; got "
                f"t_lock={pol.t_lock}, t_open={pol.t_open}")
        if not (0.0 <= pol.school_closure_share <= 1.0):
            raise ConfigurationError("policy.school_closure_share must lie in [0, 1]")
        if pol.nursing_home_size < 0:
            raise ConfigurationError("policy.nursing_home_size must be >= 0")

    if nb.count not in NEIGHBORHOOD_COUNTS:
        raise ConfigurationError(
            f"neighborhoods.count must be one of {NEIGHBORHOOD_COUNTS}; got {nb.count}")
    if not (0.0 <= nb.mixing <= 1.0):
        raise ConfigurationError(f"neighborhoods.mixing must lie in [0, 1]; got {nb.mixing}")
    if nb.gradient and nb.count != 9:
        raise ConfigurationError(
            "the household-size gradient is defined for 9 neighborhoods only; "
            f"got neighborhoods.count={nb.count}")

    run = cfg.run
    if run.replications < 1:
        raise ConfigurationError("run.replications must be >= 1")
    if run.max_days < 1:
        raise ConfigurationError("run.max_days must be >= 1")
    if not (0 <= run.initial_infected <= pop.n):
        raise ConfigurationError(
            f"run.initial_infected must lie in [0, n]; got {run.initial_infected}")
    for name in ("initial_focus_x", "initial_focus_y"):
        v = getattr(run, name)
        if not (0.0 <= v <= 1.0):
            raise ConfigurationError(f"run.{name} must lie in [0, 1]; got {v}")
