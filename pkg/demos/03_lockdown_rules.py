"""Threshold lockdown rules: reopen-at-trigger versus cautious reopening.

A lockdown closes the City and half the School/Work locations when active
cases (A+Y) reach t_lock; reopening at t_open < t_lock ("cautious") lets
herd immunity advance further before the restart and dampens second waves.
"""

import numpy as np

from spatialepi import SimulationConfig, run_scenario, wave_stats, with_policy

base = SimulationConfig()
base.population.n = 6000
base.contagion.radius = 0.00805 * (26600 / 6000) ** 0.5   # keep the City contact density of the full-scale model
base.run.initial_infected = max(5, round(30 * 6000 / 26600))   # same seeded share as the full-scale model
base.run.replications = 4

rules = [
    ("no lockdown", None),
    ("10% lock, reopen at 10% (forever)", ("global", 0.10, 0.10, "forever")),
    ("5% lock, reopen at 5% (forever)", ("global", 0.05, 0.05, "forever")),
    ("10% lock, cautious reopen at 5%", ("global", 0.10, 0.05, "repeatable")),
    ("5% lock, cautious reopen at 2%", ("global", 0.05, 0.02, "repeatable")),
]

for label, rule in rules:
    cfg = base if rule is None else with_policy(base, *rule)
    res = run_scenario(cfg, workers=2)
    waves = [wave_stats(s) for s in res.replications]
    w1 = np.mean([w.first_peak for w in waves])
    w2 = np.mean([w.second_peak for w in waves])
    episodes = np.mean([sum(1 for _, _, k in s.events if k == "lock")
                        for s in res.replications])
    row = res.row("all")
    print(f"{label:36s} peak={row.peak_active:.3f} first={w1:.3f} second={w2:.3f} "
          f"locks={episodes:.1f} D+R={row.d + row.r:.3f}")

print()
print("At this reduced scale the one-day policy lag lets the first wave overshoot")
print("well past its trigger, so it stays the tallest; at full scale (N=26,600,")
print("see the acceptance suite) the early 5%-lockdown's slow first wave is")
print("overtaken by the post-reopening second wave. Either way, cautious")
print("reopening dampens later waves and lowers the final toll.")
