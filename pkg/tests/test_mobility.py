import math

import numpy as np
import pytest

from ntn_handover.errors import ConfigError
from ntn_handover.mobility import (
    MobilityConfig,
    MobilityMode,
    UserState,
    draw_speed,
    init_users,
    step,
    wrap_angle,
)

R = 25_000.0
SMOOTH = MobilityConfig(mode=MobilityMode.SMOOTH_RANDOM)


def rngs(n, seed=0):
    return [np.random.default_rng([seed, i]) for i in range(n)]


def single_user(x, y, direction, speed=10.0, target_speed=10.0):
    return UserState(
        x=np.array([x]),
        y=np.array([y]),
        speed=np.array([speed]),
        direction=np.array([direction]),
        target_speed=np.array([target_speed]),
        target_direction=np.array([direction]),
        turn_rate=np.zeros(1),
        time_to_direction_change=np.array([1e9]),
    )


def test_population_for_unit_density():
    assert round(math.pi * 25**2) == 1963


def test_single_user_inside():
    u = init_users(1, R, np.random.default_rng(5))
    assert len(u) == 1
    assert u.x[0] ** 2 + u.y[0] ** 2 <= R * R


def test_zero_users_rejected():
    with pytest.raises(ConfigError):
        init_users(0, R, np.random.default_rng(0))


def test_static_users_start_at_rest():
    u = init_users(50, R, np.random.default_rng(0))
    assert np.all(u.speed == 0)


def test_mobile_users_draw_initial_state():
    n = 200
    u = init_users(n, R, np.random.default_rng(0), SMOOTH, rngs(n))
    assert np.all((u.speed >= 0) & (u.speed <= SMOOTH.v_max))
    assert np.all((u.direction >= 0) & (u.direction < 2 * math.pi))
    assert np.all(u.time_to_direction_change > 0)


def test_static_step_is_identity():
    u = init_users(10, R, np.random.default_rng(0))
    assert step(u, 0.01, MobilityConfig()) is u


def test_edge_heading_outward_flips():
    u = single_user(R - 0.05, 0.0, direction=0.0)
    out = step(u, 0.01, SMOOTH, rngs(1))
    assert wrap_angle(out.direction[0] - u.direction[0]) == pytest.approx(-math.pi)
    assert out.x[0] ** 2 + out.y[0] ** 2 <= R * R
    # 0.05 m to the edge, then 0.05 m back
    assert out.x[0] == pytest.approx(R - 0.05, abs=1e-6)


def test_acceleration_bound():
    u = single_user(0.0, 0.0, 1.0, speed=0.0, target_speed=10.0)
    out = step(u, 0.1, SMOOTH, rngs(1))
    assert out.speed[0] == pytest.approx(0.1)


def test_target_speed_redrawn_when_reached():
    u = single_user(0.0, 0.0, 1.0, speed=5.0, target_speed=5.05)
    out = step(u, 0.1, SMOOTH, rngs(1))
    assert out.speed[0] == pytest.approx(5.05)
    assert out.target_speed[0] != 5.05


def test_direction_change_drifts_linearly():
    u = single_user(0.0, 0.0, 0.0)
    u.time_to_direction_change[:] = 0.005
    cfg = MobilityConfig(mode="smooth_random", turn_duration=1.0)
    out = step(u, 0.01, cfg, rngs(1))
    remaining = wrap_angle(out.target_direction[0] - 0.0)
    # one step covers 1 % of the turn
    assert wrap_angle(out.direction[0]) == pytest.approx(remaining * 0.01, abs=1e-9)


def test_draw_speed_preferences():
    rng = np.random.default_rng(0)
    draws = np.array([draw_speed(rng, SMOOTH) for _ in range(20_000)])
    assert np.mean(draws == 0.0) == pytest.approx(0.2, abs=0.01)
    assert np.mean(draws == 10.0) == pytest.approx(0.2, abs=0.01)
    assert np.all((draws >= 0) & (draws <= 10))


def test_deterministic_trajectories():
    def run():
        n = 20
        u = init_users(n, R, np.random.default_rng(3), SMOOTH, rngs(n, 3))
        g = rngs(n, 4)
        for _ in range(500):
            u = step(u, 0.01, SMOOTH, g)
        return u

    a, b = run(), run()
    assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()


@pytest.mark.parametrize(
    "kw",
    [{"v_max": 0}, {"preferred_speeds": ((20.0, 0.5),)}, {"preferred_speeds": ((1.0, 0.7), (2.0, 0.5))}],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        MobilityConfig(**kw)


def test_mobile_step_requires_generators():
    u = single_user(0, 0, 0)
    with pytest.raises(ConfigError):
        step(u, 0.01, SMOOTH)
