"""Reduced-form behavioral responses: agents skip the City and firms close
School/Work as the measured infection level rises, by risk-aversion rank."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class BehaviorParams:
    phi: float = 0.88
    ibar_agents: float = 0.01
    ibar_firms: float = 0.00062
    enabled: bool = True
    # which previous-day count drives the response, measured City-wide
    signal: str = "asymptomatic"   # or "active" (A+Y)


def alpha(i, phi: float, ibar: float):
    """Fraction of the population continuing to interact at infection level i.

    Equals 1 for i <= ibar and (ibar/i)^(1-phi) above the threshold;
    continuous and non-increasing in i. The complementary share 1 - alpha
    stays home (agents) or closes (firms).
    """
    if np.ndim(i) == 0:
        i = float(i)
        return 1.0 if i <= ibar else (ibar / i) ** (1.0 - phi)
    i = np.asarray(i, dtype=np.float64)
    out = np.ones_like(i)
    above = i > ibar
    out[above] = (ibar / i[above]) ** (1.0 - phi)
    return out


def n_not_interacting(i: float, phi: float, ibar: float, count: int) -> int:
    """ceil((1 - alpha(i)) * count): how many of `count` ranked units respond."""
    return math.ceil((1.0 - alpha(i, phi, ibar)) * count)


def agents_staying_home(risk_rank: np.ndarray, i: float, params: BehaviorParams) -> np.ndarray:
    """Mask of agents skipping the City today: the most risk-averse ranks first.

    Monotone in i (higher infection level -> superset) because ranks are fixed.
    """
    if not params.enabled:
        return np.zeros(len(risk_rank), dtype=bool)
    k = n_not_interacting(i, params.phi, params.ibar_agents, len(risk_rank))
    return risk_rank < k


def firms_closing(wp_rank: np.ndarray, i: float, params: BehaviorParams) -> np.ndarray:
    """Mask of workplaces choosing to operate remotely today."""
    if not params.enabled:
        return np.zeros(len(wp_rank), dtype=bool)
    k = n_not_interacting(i, params.phi, params.ibar_firms, len(wp_rank))
    return wp_rank < k
