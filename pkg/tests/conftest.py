from __future__ import annotations

import pytest

from cbf_teleop.cbf import Obstacle
from cbf_teleop.config import SessionConfig
from cbf_teleop.world import Environment, EnvironmentParams, Target


SMALL_ENV_PARAMS = EnvironmentParams(
    width=12.0,
    height=9.0,
    n_obstacles=10,
    n_targets=2,
)


def make_small_config(**overrides) -> SessionConfig:
    """A quick-running session: small arena, low tick cap."""
    base = dict(
        env_params=SMALL_ENV_PARAMS,
        tick_cap=6000,
    )
    base.update(overrides)
    return SessionConfig(**base)


@pytest.fixture
def one_obstacle_env() -> Environment:
    """Single obstacle at (2, 0) r=0.5, one target well away from it."""
    return Environment(
        width=20.0,
        height=10.0,
        obstacles=(Obstacle((2.0, 0.0), 0.5),),
        targets=(Target((8.0, 3.0), 0.5),),
        uav_radius=0.25,
        seed=0,
        spawn=(0.0, 0.0),
        spawn_yaw=0.0,
    )


@pytest.fixture
def empty_env() -> Environment:
    return Environment(
        width=20.0,
        height=10.0,
        obstacles=(),
        targets=(Target((5.0, 0.0), 0.5),),
        uav_radius=0.25,
        seed=0,
        spawn=(0.0, 0.0),
        spawn_yaw=0.0,
    )
