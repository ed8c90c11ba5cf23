"""Calibration procedures: geometry from contact targets, rates from growth.

Solves the contagion radius so a uniformly placed agent averages 5.2
contacts in the City, and the School/Work square side so 100 members
average 6 contacts; checks the growth-rate identity (R0 - 1)/T_inf = g0.
"""

import numpy as np

from spatialepi import (SimulationConfig, fit_growth_rate, r0_from_growth,
                        solve_radius, solve_workplace_side, t_inf_from)
from spatialepi.calibrate import contact_budget_report

cfg = SimulationConfig()

radius = solve_radius(cfg.population.n, 1.0, 5.2, trials=10, seed=1)
print(f"radius matching 5.2 City contacts:     {radius:.5f}  (calibrated value 0.00805)")

side = solve_workplace_side(100, radius, 6.0, trials=150, seed=1)
interior = np.sqrt(99 * np.pi * radius ** 2 / 6.0)
print(f"side matching 6 School/Work contacts:  {side:.4f}   (calibrated value 0.0547; "
      f"interior bound {interior:.4f})")

t_inf = t_inf_from(cfg.transitions.nu, cfg.transitions.rho)
print(f"T_inf = 1/(nu+rho) = {t_inf:.2f} days; R0 at g0=0.35: {r0_from_growth(0.35, 7.0)}")

print()
print("daily contact budget:")
for name, target, achieved in contact_budget_report(cfg, trials=8, seed=1):
    print(f"  {name:20s} target {target:6.3f}  achieved {achieved:6.3f}")

print()
report = fit_growth_rate(cfg, replications=2)
print(f"early growth rate (no interventions): {report.achieved:.3f} "
      f"(target {report.target}, measured days {report.burn_in}..{report.window_end})")
