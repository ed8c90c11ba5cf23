"""Calibration procedures: solving geometry and contagion parameters from
contact and growth-rate targets, and the random-matching rescaling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .errors import CalibrationError
from .spatial import mean_contacts


def r0_from_growth(g0: float, t_inf: float) -> float:
    """Basic reproduction number implied by initial growth: R0 = 1 + g0 * T_inf."""
    if g0 < 0 or t_inf <= 0:
        raise CalibrationError(f"need g0 >= 0 and t_inf > 0; got {g0}, {t_inf}")
    return 1.0 + g0 * t_inf


def t_inf_from(nu: float, rho: float) -> float:
    """Mean days in the contagious Asymptomatic state: 1 / (nu + rho)."""
    if nu + rho <= 0:
        raise CalibrationError("nu + rho must be positive")
    return 1.0 / (nu + rho)


def solve_radius(n: int, side: float, target_contacts: float, trials: int = 30,
                 tolerance: float = 0.01, seed: int = 0, max_iter: int = 60) -> float:
    """Bisection on the contagion radius until the Monte Carlo mean contact
    count (edge effects included) matches the target within `tolerance`
    (relative). Population draws are common across bisection steps, which
    makes the estimated contact curve exactly monotone in the radius.
    """
    if not (0 < target_contacts < n - 1):
        raise CalibrationError(
            f"target contacts must lie in (0, n-1); got {target_contacts}")

    def f(r: float) -> float:
        return mean_contacts(n, side, r, trials=trials, rng=np.random.default_rng(seed))

    lo, f_lo = 0.0, 0.0
    hi = 3.0 * math.sqrt(target_contacts * side * side / (math.pi * max(n - 1, 1)))
    f_hi = f(hi)
    expand = 0
    while f_hi < target_contacts:
        hi *= 2.0
        expand += 1
        if expand > 20 or hi > side * 2.0:
            raise CalibrationError(
                f"could not bracket target {target_contacts} (reached radius {hi})")
        f_hi = f(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val - target_contacts) <= tolerance * target_contacts:
            return mid
        if val < target_contacts:
            lo, f_lo = mid, val
        else:
            hi, f_hi = mid, val
    return 0.5 * (lo + hi)


def solve_workplace_side(members: int = 100, radius: float = 0.00805,
                         target_contacts: float = 6.0, trials: int = 200,
                         tolerance: float = 0.01, seed: int = 0,
                         max_iter: int = 60) -> float:
    """Bisection on the School/Work square side so `members` uniform agents
    produce the target mean contact count at the given radius."""
    if not (0 < target_contacts < members - 1):
        raise CalibrationError(
            f"target contacts must lie in (0, members-1); got {target_contacts}")

    def f(s: float) -> float:
        return mean_contacts(members, s, radius, trials=trials,
                             rng=np.random.default_rng(seed))

    # contacts decrease in the side; bracket with [radius/4, wide]
    lo = radius / 4.0
    hi = 4.0 * math.sqrt((members - 1) * math.pi * radius * radius / target_contacts)
    if f(lo) < target_contacts:
        raise CalibrationError(
            f"target {target_contacts} unattainable even at side {lo}")
    if f(hi) > target_contacts:
        raise CalibrationError(
            f"target {target_contacts} exceeded even at side {hi}; widen the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val - target_contacts) <= tolerance * target_contacts:
            return mid
        if val > target_contacts:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def random_matching_params(config: SimulationConfig, city_contacts: float | None = None,
                           work_contacts: float | None = None, trials: int = 20,
                           seed: int = 0) -> SimulationConfig:
    """Config for the no-spatial-structure counterfactual.

    Contagion radii expand to cover the whole City and the whole School/Work
    square; contagion probabilities are rescaled so the expected number of
    infections caused per contagious agent per period is preserved:
    pi_city * contacts / (N - 1) in the City and pi_work * contacts /
    (members - 1) at School/Work. Contact means are measured by Monte Carlo
    when not supplied.
    """
    new = config.copy()
    con = new.contagion
    n = config.population.n
    members = config.population.workplace_mean_size
    side = config.geometry.side()
    if city_contacts is None:
        city_contacts = mean_contacts(n, 1.0, con.radius_city(), trials=trials,
                                      rng=np.random.default_rng(seed))
    if work_contacts is None:
        work_contacts = mean_contacts(members, side, con.radius_work(), trials=max(trials * 10, 100),
                                      rng=np.random.default_rng(seed + 1))
    con.override_radius_city = 1.5                 # >= sqrt(2): covers the unit City
    con.override_radius_work = 1.5 * side          # covers the workplace square
    con.override_prob_city = con.prob_out * city_contacts / (n - 1)
    con.override_prob_work = con.prob_out * work_contacts / (members - 1)
    return new


@dataclass
class GrowthReport:
    target: float
    achieved: float
    deviation: float
    identified: bool
    horizon: int
    burn_in: int
    window_end: int
    ever_infected: np.ndarray   # (horizon+1,) counts


def fit_growth_rate(config: SimulationConfig, horizon: int = 35, target_g0: float = 0.35,
                    burn_in: int = 3, prevalence_cap: float = 0.03,
                    replications: int = 3, master_seed: int | None = None) -> GrowthReport:
    """Measure the early epidemic growth rate in the no-intervention model.

    Simulates with behavior and policy disabled and computes the mean daily
    log-growth of the ever-infected count from `burn_in` (the seeded cluster
    needs a few days to disperse) to the first day cumulative infections
    exceed `prevalence_cap` of the population (beyond which depletion of
    Susceptibles, not the contagion parameters, sets the growth rate), or
    `horizon` if that comes first. The contagion probability is not
    auto-adjusted; this is a diagnostic for the operator.
    """
    from .scenarios import make_world   # local import avoids a cycle

    cfg = config.copy()
    cfg.behavior.enabled = False
    cfg.policy.scope = "none"
    cfg.run.max_days = horizon
    seed = cfg.run.seed if master_seed is None else master_seed

    curves = []
    for rep in range(replications):
        world = make_world(cfg, seed, rep)
        n = world.pop.n
        curve = [n - int((world.state == 0).sum())]
        while world.day < horizon and world.active_count() > 0:
            world.run_day()
            curve.append(n - int(world.counts[:, 0].sum()))
        while len(curve) < horizon + 1:      # epidemic died out early
            curve.append(curve[-1])
        curves.append(curve)
    ever = np.array(curves, dtype=np.float64).mean(axis=0)

    cap = prevalence_cap * config.population.n
    over = np.flatnonzero(ever > cap)
    end = int(over[0]) if len(over) else horizon
    end = max(min(end, horizon), burn_in + 1)
    identified = ever[burn_in] > 0 and ever[end] > ever[burn_in]
    if identified:
        g = (math.log(ever[end]) - math.log(ever[burn_in])) / (end - burn_in)
    else:
        g = 0.0
    return GrowthReport(target=target_g0, achieved=g, deviation=g - target_g0,
                        identified=bool(identified), horizon=horizon, burn_in=burn_in,
                        window_end=end, ever_infected=ever)


def contact_budget_report(config: SimulationConfig, trials: int = 20, seed: int = 0):
    """Rows reconstructing the daily contact budget (city + school/work +
    home, with School/Work received only by the Young at a 100/85-style
    premium over the City). Returns (parameter, target, achieved) tuples."""
    from .population import default_household_distribution, load_household_distribution

    n = config.population.n
    con = config.contagion
    side = config.geometry.side()
    city = mean_contacts(n, 1.0, con.radius_city(), trials=trials,
                         rng=np.random.default_rng(seed))
    work = mean_contacts(config.population.workplace_mean_size, side, con.radius_work(),
                         trials=max(trials * 10, 100), rng=np.random.default_rng(seed + 1))
    path = config.population.household_histogram_path
    dist = load_household_distribution(path) if path else default_household_distribution()
    home = dist.person_weighted_mean_size() - 1.0
    return [
        ("contacts_city", 5.2, city),
        ("contacts_work", 6.0, work),
        ("contacts_home", 2.3, home),
        ("contacts_total", 13.5, city + work + home),
        ("work_city_premium", 100.0 / 85.0, work / city if city else float("nan")),
    ]
