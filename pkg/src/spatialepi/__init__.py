"""Agent-based spatial epidemic simulator with demographic types, a
City/School-Work/Home interaction network, endogenous behavioral responses,
and threshold-triggered lockdown policy rules."""

from .behavior import BehaviorParams, agents_staying_home, alpha, firms_closing
from .calibrate import (fit_growth_rate, r0_from_growth, random_matching_params,
                        solve_radius, solve_workplace_side, t_inf_from)
from .config import SimulationConfig, emit_config, load_config, parse_config
from .dynamics import TimeSeries, World, state_transitions
from .errors import CalibrationError, ConfigurationError, SpatialEpiError
from .policy import PolicyController, PolicyRule, regroup_into_nursing_homes
from .population import (HouseholdDistribution, Population, default_household_distribution,
                         layout_neighborhoods, load_household_distribution,
                         seed_initial_infections, synthesize_population)
from .scenarios import (ScenarioResult, apply_variant, average_series, lucas_naive,
                        lucas_recalibrated, run_replication, run_scenario,
                        summarize, sw_center_config, wave_stats, with_neighborhoods,
                        with_policy)
from .spatial import UniformGridIndex, mean_contacts, move_agents, neighbors_within

__version__ = "0.1.0"
