import numpy as np
import pytest

from spatialepi.config import SimulationConfig


def small_config(n=2000, reps=2, seed=7, max_days=400):
    cfg = SimulationConfig()
    cfg.population.n = n
    cfg.run.replications = reps
    cfg.run.seed = seed
    cfg.run.max_days = max_days
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
