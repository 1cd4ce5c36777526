import numpy as np
import pytest

from crafterkit.mechanics import EnvConfig, make_state, reset, step
from crafterkit.world import SIZE, TileKind


NO_DECAY = EnvConfig(health_decay_enabled=False, mobs_enabled=False)


def grass_field():
    return np.full((SIZE, SIZE), int(TileKind.GRASS), dtype=np.int8)


@pytest.fixture(scope="session")
def warm_kernel():
    # first step() JIT-compiles the kernel; do it once up front
    s = reset(0, NO_DECAY)
    step(s, 0)
    return True


@pytest.fixture
def field_state(warm_kernel):
    """Player mid-map on an all-grass field, no decay, no mobs."""
    return make_state(config=NO_DECAY)
