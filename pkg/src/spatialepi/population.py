"""Population synthesis: households, group quarters, demographic types,
School/Work assignment, neighborhood layout, and initial infections."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .errors import ConfigurationError

YOUNG, NOTEMPLOYED, OLD = 0, 1, 2
TYPE_NAMES = ("young", "notemp", "old")

# Synthetic default household table, columns (size, young, old, probability).
# Constructed so that, jointly with the default group-quarter shares, the
# exact moments come out: the average person lives in a household of size
# 3.3 (so a member has 2.3 within-home contacts), and the per-person type
# fractions are consistent with population shares 0.65/0.19/0.16. Maximum
# family size 8; 85% of Old live in all-Old households (singles/couples);
# enough singles that the northeast gradient neighborhood holds only them.
DEFAULT_HOUSEHOLD_TABLE = (
    (1, 1, 0, 0.096762),
    (1, 0, 0, 0.06207791923532287),
    (1, 0, 1, 0.130945),
    (2, 2, 0, 0.050988),
    (2, 0, 2, 0.10435550142892132),
    (2, 1, 0, 0.061304),
    (3, 3, 0, 0.114778),
    (3, 2, 0, 0.15009232356903765),
    (3, 2, 1, 0.03948),
    (4, 3, 0, 0.122757),
    (4, 2, 1, 0.017459),
    (5, 4, 0, 0.0030016463113412915),
    (5, 3, 0, 0.003),
    (6, 5, 0, 0.017),
    (6, 4, 1, 0.003),
    (7, 5, 0, 0.011),
    (8, 6, 0, 0.011999609455376883),
)


@dataclass
class HouseholdDistribution:
    """Histogram over (size, young-count, old-count) household cells."""

    size: np.ndarray
    young: np.ndarray
    old: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        self.size = np.asarray(self.size, dtype=np.int64)
        self.young = np.asarray(self.young, dtype=np.int64)
        self.old = np.asarray(self.old, dtype=np.int64)
        self.prob = np.asarray(self.prob, dtype=np.float64)

    @property
    def notemployed(self) -> np.ndarray:
        return self.size - self.young - self.old

    def validate(self) -> None:
        if len(self.size) == 0:
            raise ConfigurationError("household histogram is empty")
        if (self.size < 1).any():
            raise ConfigurationError("household sizes must be >= 1")
        if (self.young < 0).any() or (self.old < 0).any() or (self.notemployed < 0).any():
            raise ConfigurationError("household type counts must be non-negative and sum to size")
        if (self.prob < 0).any() or abs(self.prob.sum() - 1.0) > 1e-9:
            raise ConfigurationError(
                f"household histogram probabilities must sum to 1; got {self.prob.sum()!r}")

    def mean_size(self) -> float:
        """Mean size of a drawn household."""
        return float(self.prob @ self.size)

    def person_weighted_mean_size(self) -> float:
        """Mean size of the household a randomly drawn PERSON lives in
        (E[s^2]/E[s]); one less than a member's within-home contact count."""
        return float(self.prob @ (self.size * self.size)) / self.mean_size()

    def person_type_fractions(self) -> tuple[float, float, float]:
        """Expected (young, notemployed, old) fractions among household members."""
        total = self.prob @ self.size
        return (float(self.prob @ self.young / total),
                float(self.prob @ self.notemployed / total),
                float(self.prob @ self.old / total))


def default_household_distribution() -> HouseholdDistribution:
    t = np.array(DEFAULT_HOUSEHOLD_TABLE, dtype=np.float64)
    return HouseholdDistribution(t[:, 0], t[:, 1], t[:, 2], t[:, 3])


def load_household_distribution(path) -> HouseholdDistribution:
    """Read a histogram table with columns size, young_count, old_count, probability."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"size", "young_count", "old_count", "probability"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigurationError(
                f"{path}: household histogram needs columns {sorted(required)}")
        rows = [(int(r["size"]), int(r["young_count"]), int(r["old_count"]),
                 float(r["probability"])) for r in reader]
    if not rows:
        raise ConfigurationError(f"{path}: household histogram has no rows")
    t = np.array(rows, dtype=np.float64)
    dist = HouseholdDistribution(t[:, 0], t[:, 1], t[:, 2], t[:, 3])
    dist.validate()
    return dist


@dataclass
class NeighborhoodLayout:
    """Square tiling of the unit City into count = k*k neighborhoods.

    Neighborhood ids follow the diagonal order from the southwest corner:
    sorted by (gx + gy, gx), so id 0 is the SW square and id count-1 the NE.
    """

    count: int
    grid_k: int
    side: float
    cells: np.ndarray      # (count, 2) integer grid coordinates (gx, gy)
    mixing: float
    gradient: bool
    _grid_to_id: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._grid_to_id is None:
            g = np.empty(self.grid_k * self.grid_k, dtype=np.int64)
            g[self.cells[:, 0] * self.grid_k + self.cells[:, 1]] = np.arange(self.count)
            self._grid_to_id = g

    def origin(self, nb: int) -> tuple[float, float]:
        gx, gy = self.cells[nb]
        return (gx * self.side, gy * self.side)

    def neighborhood_of(self, positions) -> np.ndarray:
        p = np.atleast_2d(positions)
        gx = np.clip((p[:, 0] / self.side).astype(np.int64), 0, self.grid_k - 1)
        gy = np.clip((p[:, 1] / self.side).astype(np.int64), 0, self.grid_k - 1)
        return self._grid_to_id[gx * self.grid_k + gy]


def make_layout(count: int, mixing: float = 0.0, gradient: bool = False) -> NeighborhoodLayout:
    k = int(round(np.sqrt(count)))
    if k * k != count:
        raise ConfigurationError(f"neighborhood count must be a perfect square; got {count}")
    gx, gy = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    order = np.lexsort((cells[:, 0], cells[:, 0] + cells[:, 1]))
    return NeighborhoodLayout(count=count, grid_k=k, side=1.0 / k,
                              cells=cells[order], mixing=mixing, gradient=gradient)


@dataclass
class Population:
    """Synthesized agent population (agents indexed 0..n-1, households 0..n_households-1)."""

    n: int
    ptype: np.ndarray            # (n,) 0 Young, 1 NotEmployed, 2 Old
    household: np.ndarray        # (n,) household id
    hh_size: np.ndarray          # (H,)
    hh_is_gq: np.ndarray         # (H,) group-quarter flag
    hh_neighborhood: np.ndarray  # (H,)
    risk_rank: np.ndarray        # (n,) permutation; rank 0 = most risk averse
    workplace: np.ndarray        # (n,) workplace id, -1 for none
    n_workplaces: int
    wp_neighborhood: np.ndarray  # (W,)
    wp_rank: np.ndarray          # (W,) permutation; rank 0 = most risk averse
    positions: np.ndarray        # (n, 2) initial City positions
    wp_positions: np.ndarray     # (n, 2) fixed position inside own workplace square
    layout: NeighborhoodLayout
    seed_ids: np.ndarray | None = None   # initially Asymptomatic agents

    @property
    def n_households(self) -> int:
        return len(self.hh_size)

    @property
    def agent_neighborhood(self) -> np.ndarray:
        return self.hh_neighborhood[self.household]

    def neighborhood_population(self) -> np.ndarray:
        return np.bincount(self.agent_neighborhood, minlength=self.layout.count)

    def mean_household_size_by_neighborhood(self) -> np.ndarray:
        s = np.bincount(self.hh_neighborhood, weights=self.hh_size, minlength=self.layout.count)
        c = np.bincount(self.hh_neighborhood, minlength=self.layout.count)
        return s / np.maximum(c, 1)


def _draw_family_cells(dist: HouseholdDistribution, n_people: int, rng) -> np.ndarray:
    """Draw household cell indices until exactly n_people are allocated."""
    if n_people <= 0:
        return np.empty(0, dtype=np.int64)
    sizes = dist.size
    mean = dist.mean_size()
    chosen = []
    remaining = n_people
    while remaining > 0:
        feasible = sizes <= remaining
        if remaining >= sizes.max():
            batch = max(16, int(remaining / mean * 1.15) + 8)
            draw = rng.choice(len(sizes), size=batch, p=dist.prob)
            csum = np.cumsum(sizes[draw])
            k = int(np.searchsorted(csum, remaining, side="right"))
            if k > 0:
                chosen.append(draw[:k])
                remaining -= int(csum[k - 1])
        else:
            # tail: condition the draw on fitting households
            p = np.where(feasible, dist.prob, 0.0)
            total = p.sum()
            if total <= 0.0:  # no cell fits; finish with truncated smallest cells
                smallest = int(np.argmin(sizes))
                reps = int(np.ceil(remaining / sizes[smallest]))
                chosen.append(np.full(reps, smallest, dtype=np.int64))
                remaining = 0
                break
            cell = int(rng.choice(len(sizes), p=p / total))
            chosen.append(np.array([cell], dtype=np.int64))
            remaining -= int(sizes[cell])
    return np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)


def synthesize_population(config: SimulationConfig, seed) -> Population:
    """Build the full agent population for one replication.

    `seed` may be an int, a numpy SeedSequence, or a Generator. Identical
    (config, seed) produce identical populations, field by field.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pop_cfg = config.population
    n = pop_cfg.n
    if n < 100:
        raise ConfigurationError(f"population.n must be >= 100; got {n}")

    if pop_cfg.household_histogram_path:
        dist = load_household_distribution(pop_cfg.household_histogram_path)
    else:
        dist = default_household_distribution()
    dist.validate()

    gq = pop_cfg.group_quarter
    n_young_target = pop_cfg.share_young * n
    n_old_target = pop_cfg.share_old * n
    gq_old_homes = int(round(n_old_target * gq.share_old / gq.size))
    gq_young_homes = int(round(n_young_target * gq.share_young / gq.size))
    n_gq_people = (gq_old_homes + gq_young_homes) * gq.size
    if n_gq_people > n:
        raise ConfigurationError("group-quarter shares exceed the population size")

    # Consistency between configured shares and the histogram's implied mix
    denom = n - n_gq_people
    implied = (
        (n_young_target - gq_young_homes * gq.size) / denom,
        pop_cfg.share_notemployed * n / denom,
        (n_old_target - gq_old_homes * gq.size) / denom,
    )
    actual = dist.person_type_fractions()
    for name, a, b in zip(TYPE_NAMES, actual, implied):
        if abs(a - b) > 0.05:
            raise ConfigurationError(
                f"household histogram implies a {name} share of {a:.3f} among family "
                f"members, inconsistent with the configured population shares "
                f"(expected about {b:.3f})")

    cells = _draw_family_cells(dist, n - n_gq_people, rng)

    # Households: group quarters first (Old then Young blocks), then families.
    fam_sizes = dist.size[cells]
    fam_young = dist.young[cells]
    fam_old = dist.old[cells]
    gq_sizes = np.full(gq_old_homes + gq_young_homes, gq.size, dtype=np.int64)
    hh_size = np.concatenate([gq_sizes, fam_sizes])
    hh_is_gq = np.zeros(len(hh_size), dtype=bool)
    hh_is_gq[: len(gq_sizes)] = True

    # Per-household member type counts -> agent arrays (young, notemp, old per household)
    hh_young = np.concatenate([
        np.zeros(gq_old_homes, dtype=np.int64),
        np.full(gq_young_homes, gq.size, dtype=np.int64),
        fam_young,
    ])
    hh_old = np.concatenate([
        np.full(gq_old_homes, gq.size, dtype=np.int64),
        np.zeros(gq_young_homes, dtype=np.int64),
        fam_old,
    ])
    hh_ne = hh_size - hh_young - hh_old

    household = np.repeat(np.arange(len(hh_size)), hh_size)
    ends = np.cumsum(hh_size)
    starts = ends - hh_size
    offset = np.arange(len(household)) - starts[household]
    ptype = np.full(len(household), NOTEMPLOYED, dtype=np.int8)
    ptype[offset < hh_young[household]] = YOUNG
    ptype[offset >= (hh_young + hh_ne)[household]] = OLD
    assert len(ptype) == n

    n_young = int((ptype == YOUNG).sum())
    if 0 < n_young < pop_cfg.workplace_mean_size / 2 and n >= 1000:
        raise ConfigurationError(
            f"Young share too small to populate School/Work locations of mean size "
            f"{pop_cfg.workplace_mean_size}: only {n_young} Young agents")

    pop = Population(
        n=n, ptype=ptype, household=household.astype(np.int32),
        hh_size=hh_size, hh_is_gq=hh_is_gq,
        hh_neighborhood=np.zeros(len(hh_size), dtype=np.int32),
        risk_rank=rng.permutation(n).astype(np.int32),
        workplace=np.full(n, -1, dtype=np.int32), n_workplaces=0,
        wp_neighborhood=np.empty(0, dtype=np.int32),
        wp_rank=np.empty(0, dtype=np.int32),
        positions=np.zeros((n, 2)), wp_positions=np.zeros((n, 2)),
        layout=make_layout(config.neighborhoods.count, config.neighborhoods.mixing,
                           config.neighborhoods.gradient),
    )
    layout_neighborhoods(pop, config.neighborhoods.count,
                         gradient=config.neighborhoods.gradient,
                         mixing=config.neighborhoods.mixing, rng=rng,
                         workplace_mean_size=pop_cfg.workplace_mean_size,
                         workplace_side=config.geometry.side())
    return pop


def layout_neighborhoods(pop: Population, count: int, gradient: bool, mixing: float,
                         rng, workplace_mean_size: int = 100,
                         workplace_side: float = 0.0547) -> Population:
    """Assign households to neighborhoods, draw positions, build workplaces.

    With the gradient enabled (count must be 9), households (group quarters
    included, like any Home) are sorted by size and filled along the
    diagonal neighborhood order, so the southwest neighborhood holds the
    largest households and the northeast one the singles. Without the
    gradient, households are permuted randomly and filled the same way.
    Either way each neighborhood receives an equal resident count (to
    within half the largest household).
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if gradient and count != 9:
        raise ConfigurationError(
            f"the household-size gradient is defined for 9 neighborhoods; got count={count}")
    if not (0.0 <= mixing <= 1.0):
        raise ConfigurationError(f"mixing must lie in [0, 1]; got {mixing}")
    layout = make_layout(count, mixing, gradient)
    pop.layout = layout
    S = count
    hh_size = pop.hh_size

    if S == 1:
        pop.hh_neighborhood = np.zeros(len(hh_size), dtype=np.int32)
    else:
        quota = pop.n / S
        nb = np.empty(len(hh_size), dtype=np.int32)
        if gradient:
            order = np.argsort(-hh_size, kind="stable")
        else:
            order = rng.permutation(len(hh_size))
        targets = quota * np.arange(1, S + 1)
        sizes_o = hh_size[order].astype(np.float64)
        mid = np.cumsum(sizes_o) - sizes_o / 2.0
        nb[order] = np.minimum(np.searchsorted(targets, mid, side="left"), S - 1)
        pop.hh_neighborhood = nb

    # initial City positions: uniform within the residence neighborhood square
    agent_nb = pop.hh_neighborhood[pop.household]
    origins = (layout.cells * layout.side)[agent_nb]
    pop.positions = origins + rng.uniform(0.0, layout.side, size=(pop.n, 2))

    # School/Work: each Young attends the home neighborhood w.p. 1 - mixing,
    # otherwise a uniformly chosen other neighborhood
    young_ids = np.flatnonzero(pop.ptype == YOUNG)
    target_nb = agent_nb[young_ids].astype(np.int64)
    if S > 1 and mixing > 0.0 and len(young_ids):
        out = rng.random(len(young_ids)) < mixing
        shift = rng.integers(1, S, size=len(young_ids))
        target_nb[out] = (target_nb[out] + shift[out]) % S

    workplace = np.full(pop.n, -1, dtype=np.int32)
    wp_neighborhood = []
    w_offset = 0
    for j in range(S):
        members = young_ids[target_nb == j]
        if len(members) == 0:
            continue
        w_j = max(1, int(round(len(members) / workplace_mean_size)))
        workplace[members] = w_offset + rng.integers(0, w_j, size=len(members)).astype(np.int32)
        wp_neighborhood.extend([j] * w_j)
        w_offset += w_j
    pop.workplace = workplace
    pop.n_workplaces = w_offset
    pop.wp_neighborhood = np.array(wp_neighborhood, dtype=np.int32)
    pop.wp_rank = rng.permutation(w_offset).astype(np.int32)

    pop.wp_positions = np.zeros((pop.n, 2))
    pop.wp_positions[young_ids] = rng.uniform(0.0, workplace_side, size=(len(young_ids), 2))
    return pop


def seed_initial_infections(pop: Population, k: int, focus) -> Population:
    """Mark the k agents nearest to `focus` as the initial Asymptomatic cluster."""
    if k > pop.n:
        raise ConfigurationError(f"initial infected {k} exceeds population {pop.n}")
    d = pop.positions - np.asarray(focus, dtype=np.float64)
    order = np.argsort((d * d).sum(axis=1), kind="stable")
    pop.seed_ids = np.sort(order[:k]).astype(np.int64)
    return pop
