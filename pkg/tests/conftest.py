from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskgate import PopulationConfig, build_store, builtin_catalog, generate_world
from riskgate.featurekit.derive import enrich_dataset

DEFAULT_SEED = 42


@pytest.fixture(scope="session")
def default_world():
    """The repo's default 780-user population, generated once per run."""
    cfg = PopulationConfig(user_count=780, seed=DEFAULT_SEED)
    world = generate_world(cfg)
    world.events = enrich_dataset(world.events, builtin_catalog(), world.lookup)
    return world


@pytest.fixture(scope="session")
def default_store(default_world):
    return build_store(default_world.events)
