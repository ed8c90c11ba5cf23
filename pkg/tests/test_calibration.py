import numpy as np
import pytest

from conftest import small_config
from spatialepi.calibrate import (contact_budget_report, fit_growth_rate, r0_from_growth,
                                  random_matching_params, solve_radius,
                                  solve_workplace_side, t_inf_from)
from spatialepi.config import SimulationConfig
from spatialepi.errors import CalibrationError
from spatialepi.spatial import mean_contacts


def test_growth_identities():
    assert r0_from_growth(0.35, 7.0) == pytest.approx(3.45, abs=1e-15)
    assert r0_from_growth(0.0, 7.0) == 1.0
    assert t_inf_from(0.09, 0.05) == pytest.approx(1 / 0.14, abs=1e-15)


def test_solve_radius_small_scale():
    r = solve_radius(500, 1.0, 2.0, trials=20, tolerance=0.02, seed=1)
    achieved = mean_contacts(500, 1.0, r, trials=60, rng=np.random.default_rng(999))
    assert abs(achieved - 2.0) <= 0.08


def test_solve_radius_scales_with_side():
    r1 = solve_radius(400, 1.0, 2.0, trials=20, tolerance=0.02, seed=2)
    r2 = solve_radius(400, 2.0, 2.0, trials=20, tolerance=0.02, seed=2)
    assert r2 / r1 == pytest.approx(2.0, rel=0.06)


def test_solve_radius_rejects_unreachable_target():
    with pytest.raises(CalibrationError):
        solve_radius(100, 1.0, 120.0, trials=2)


def test_solve_workplace_side_bounded_by_interior():
    side = solve_workplace_side(100, 0.00805, 6.0, trials=150, tolerance=0.01, seed=3)
    interior = np.sqrt(99 * np.pi * 0.00805 ** 2 / 6.0)
    assert side < interior        # edge effects shrink the calibrated square
    assert abs(side - 0.0547) / 0.0547 < 0.03


def test_random_matching_rescaling_identity():
    cfg = SimulationConfig()
    rm = random_matching_params(cfg, city_contacts=5.2, work_contacts=6.0)
    con = rm.contagion
    assert con.prob_city() == pytest.approx(0.032 * 5.2 / 26599, rel=1e-12)
    assert con.prob_work() == pytest.approx(0.032 * 6.0 / 99, rel=1e-12)
    assert con.radius_city() >= np.sqrt(2.0)
    assert con.radius_work() >= np.sqrt(2.0) * cfg.geometry.side()
    # the original config is untouched
    assert cfg.contagion.prob_city() == 0.032


def test_random_matching_preservation_small():
    # per-contagious-agent expected infections match within MC noise
    cfg = SimulationConfig()
    cfg.population.n = 3000
    rm = random_matching_params(cfg, trials=30, seed=11)
    measured = mean_contacts(3000, 1.0, cfg.contagion.radius_city(), trials=30,
                             rng=np.random.default_rng(777))
    spatial = cfg.contagion.prob_city() * measured
    matched = rm.contagion.prob_city() * (3000 - 1)
    assert abs(spatial - matched) / spatial < 0.02


def test_fit_growth_rate_zero_pi_flagged():
    cfg = small_config(n=2000, reps=1)
    cfg.contagion.prob_out = 0.0
    cfg.contagion.prob_home = 0.0
    rep = fit_growth_rate(cfg, replications=1)
    assert not rep.identified
    assert rep.achieved == 0.0


def test_fit_growth_rate_monotone_in_pi():
    base = SimulationConfig()
    base.population.n = 8000
    lo = fit_growth_rate(base, replications=2, master_seed=5)
    hot = base.copy()
    hot.contagion.prob_out = 0.064
    hot.contagion.prob_home = 0.128
    hi = fit_growth_rate(hot, replications=2, master_seed=5)
    assert hi.achieved > lo.achieved
    assert lo.identified and hi.identified


def test_contact_budget_report():
    cfg = SimulationConfig()
    rows = {name: (target, achieved)
            for name, target, achieved in contact_budget_report(cfg, trials=6, seed=0)}
    assert rows["contacts_home"][1] == pytest.approx(2.3, abs=1e-9)
    assert abs(rows["contacts_city"][1] - 5.2) / 5.2 < 0.08
    assert abs(rows["contacts_work"][1] - 6.0) / 6.0 < 0.08
    total_t, total_a = rows["contacts_total"]
    assert total_t == 13.5
    assert abs(total_a - 13.5) / 13.5 < 0.08
