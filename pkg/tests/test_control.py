"""Speed/steer controllers and the avoidance path builder."""

from __future__ import annotations

import numpy as np
import pytest

from crosswalk_sim.control import (
    InfeasiblePathError,
    build_avoidance_path,
    speed_control,
    steer_control,
)
from crosswalk_sim.dynamics import VehicleParams, VehicleState, step_dynamics
from crosswalk_sim.path import Path
from crosswalk_sim.world import RectObstacle, Scene

PARAMS = VehicleParams()


def road_y(scene: Scene, path: Path) -> np.ndarray:
    _, ys = scene.road.to_road(path.north, path.east)
    return np.asarray(ys)


# --- speed control -----------------------------------------------------------


def test_speed_control_zero_error():
    assert speed_control(10.0, 0.5, 5.0) == 0.0


def test_speed_control_proportional_region():
    assert speed_control(10.0, 0.8, 7.0, kp=1.0) == pytest.approx(1.0)
    assert speed_control(10.0, 0.8, 7.0, kp=2.0) == pytest.approx(2.0)


def test_speed_control_saturates():
    assert speed_control(10.0, 0.0, 5.0, kp=1.0) == -3.0
    assert speed_control(10.0, 1.0, 2.0, kp=1.0) == 3.0
    assert speed_control(10.0, 1.0, 2.0, kp=1.0, ax_limit=2.0) == 2.0


# --- steering ------------------------------------------------------------------


def straight_path(length: float = 100.0) -> Path:
    north = np.arange(0.0, length + 0.125, 0.25)
    return Path(north, np.zeros_like(north))


def test_steer_zero_on_path():
    path = straight_path()
    state = VehicleState(ux=5.0, north=10.0, east=0.0, s=10.0, e=0.0)
    assert steer_control(state, path, PARAMS) == 0.0


def test_steer_sign_corrects_left_offset():
    # left of a northbound path means east < 0; positive steer turns east
    path = straight_path()
    state = VehicleState(ux=5.0, north=10.0, east=-1.0, s=10.0, e=1.0)
    assert steer_control(state, path, PARAMS) > 0.0
    mirrored = VehicleState(ux=5.0, north=10.0, east=1.0, s=10.0, e=-1.0)
    assert steer_control(mirrored, path, PARAMS) < 0.0


def test_steer_clamped_to_vehicle_limit():
    path = straight_path()
    state = VehicleState(ux=5.0, north=10.0, east=-8.0, s=10.0, e=8.0)
    assert abs(steer_control(state, path, PARAMS)) <= PARAMS.max_steer


def test_steer_at_path_end_is_finite():
    path = straight_path(20.0)
    state = VehicleState(ux=3.0, north=20.0, east=0.0, s=20.0, e=0.0)
    assert steer_control(state, path, PARAMS) == 0.0


def test_closed_loop_lane_change_tracking(hidden_scene):
    # Drive the avoidance path at 5 m/s; lateral error stays inside 0.3 m.
    path = build_avoidance_path(hidden_scene)
    state = VehicleState(ux=5.0)
    errors = []
    for _ in range(1150):
        steer = steer_control(state, path, PARAMS)
        ax = speed_control(5.0, 1.0, state.ux, kp=2.0)
        state = step_dynamics(state, steer, ax, 0.01, PARAMS, path)
        errors.append(abs(state.e))
        if state.s >= path.length - 1.0:
            break
    assert state.s > 50.0  # actually completed the maneuver
    assert max(errors) < 0.3


# --- avoidance path --------------------------------------------------------------


def test_straight_path_without_blocking_obstacle():
    clear = Scene(obstacles=(RectObstacle(center=(30.0, 5.0), size=(2.0, 0.8)),))
    path = build_avoidance_path(clear)
    assert np.max(np.abs(road_y(clear, path))) <= 1e-9
    assert path.length == pytest.approx(60.0, abs=0.1)


def test_swing_clears_centered_obstacle():
    width = 2.0
    scene = Scene(obstacles=(RectObstacle(center=(35.0, 0.0), size=(4.0, width)),))
    path = build_avoidance_path(scene)
    ys = road_y(scene, path)
    assert ys.max() >= width / 2 + 2.45 - 1e-6
    assert path.length == pytest.approx(60.0, abs=0.1)
    # returns to the lane center by the end
    assert abs(ys[-1]) < 0.05


def test_path_spacing_uniform(hidden_scene):
    path = build_avoidance_path(hidden_scene)
    gaps = np.hypot(np.diff(path.north), np.diff(path.east))
    assert np.allclose(gaps[:-1], 0.25, atol=0.01)


def test_path_curvature_bounded(hidden_scene):
    path = build_avoidance_path(hidden_scene)
    headings = np.unwrap(
        [path.heading_at(float(s)) for s in np.arange(0.25, path.length, 0.25)]
    )
    curvature = np.abs(np.diff(headings)) / 0.25
    assert curvature.max() <= 0.1


def test_offset_scales_with_margin(hidden_scene):
    tight = build_avoidance_path(hidden_scene, margin=1.0)
    wide = build_avoidance_path(hidden_scene, margin=3.0)
    assert road_y(hidden_scene, wide).max() > road_y(hidden_scene, tight).max()


def test_infeasible_offset_raises():
    wall = Scene(obstacles=(RectObstacle(center=(35.0, 2.5), size=(4.0, 1.5)),))
    with pytest.raises(InfeasiblePathError):
        build_avoidance_path(wall)


def test_obstacle_too_close_to_start_raises():
    near = Scene(obstacles=(RectObstacle(center=(12.0, 0.0), size=(4.0, 1.5)),))
    with pytest.raises(InfeasiblePathError):
        build_avoidance_path(near)


def test_shipped_scenes_share_one_path(hidden_scene, exposed_scene):
    ph = build_avoidance_path(hidden_scene)
    pe = build_avoidance_path(exposed_scene)
    assert np.array_equal(ph.north, pe.north)
    assert np.array_equal(ph.east, pe.east)
