"""Benchmark epidemic at desk scale: dynamics, steady state, infection locations.

Runs a reduced population (N=12,000, 4 replications) so it finishes in ~30 s;
switch to the defaults (26,600 / 20 reps) for full-scale numbers.
"""

import numpy as np

from spatialepi import SimulationConfig, run_scenario

cfg = SimulationConfig()
cfg.population.n = 12000
cfg.contagion.radius = 0.00805 * (26600 / 12000) ** 0.5   # keep the City contact density of the full-scale model
cfg.run.initial_infected = max(5, round(30 * 12000 / 26600))   # same seeded share as the full-scale model
cfg.run.replications = 4

result = run_scenario(cfg, workers=2)

active = result.averaged.active[:, 0]
print(f"days simulated (longest replication): {len(active) - 1}")
print(f"peak active share: {active.max():.3f} on day {active.argmax()}")
print()
print(f"{'group':10s} {'city':>6s} {'work':>6s} {'home':>6s} {'D':>7s} {'R':>6s} {'peak':>6s}")
for row in result.steady:
    print(f"{row.group:10s} {row.share_city:6.3f} {row.share_work:6.3f} "
          f"{row.share_home:6.3f} {row.d:7.4f} {row.r:6.3f} {row.peak_active:6.3f}")
print()
print("Households and workplaces are the densest contact groups, yet their small")
print("fixed membership exhausts local susceptibles early; the City keeps supplying")
print("new contacts. At full scale (N=26,600, 20 replications) that tips the")
print("infection-location ranking to City > Home > School/Work; at desk scale the")
print("City-Home gap is within noise.")
