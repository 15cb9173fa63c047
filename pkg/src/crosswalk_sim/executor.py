"""Belief tracking and the three speed-scale policies.

The QMDP policy acts on the current belief, then folds the observation
that arrives during the following control interval into the posterior.
The baseline scales speed inversely with the binned unobservable count;
the oracle uses ground truth and a constant-deceleration stopping rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import world
from .dynamics import VehicleState
from .pomdp import NUM_COUNT_BINS, PomdpModel, obs_index
from .qmdp import BELIEF_TOL, AlphaVectorPolicy, best_action
from .world import Scene


class ZeroBeliefError(RuntimeError):
    """Posterior had no probability mass: the observation contradicts the
    belief under the model."""


@dataclass(frozen=True)
class SensorReading:
    """One decision epoch's perception summary."""

    unobservable_count: int
    detected: bool

    @property
    def count_bin(self) -> int:
        return world.bin_observation(self.unobservable_count)


def init_belief(model: PomdpModel) -> np.ndarray:
    """Uniform belief over the model's state space."""
    n = model.num_states
    return np.full(n, 1.0 / n)


def belief_update(belief: np.ndarray, action: int, obs: int, model: PomdpModel) -> np.ndarray:
    """Discrete Bayes step: push the belief through the transition model,
    weight by the observation likelihood, renormalize.

    Raises ZeroBeliefError when the posterior mass vanishes.
    """
    b = np.asarray(belief, dtype=float)
    if b.shape != (model.num_states,):
        raise ValueError("belief length does not match the model")
    if np.any(b < 0) or abs(float(b.sum()) - 1.0) > BELIEF_TOL:
        raise ValueError("belief is not a normalized distribution")
    if not 0 <= obs < model.num_obs:
        raise ValueError("observation index out of range")
    predicted = model.transitions[action].T @ b
    weighted = predicted * model.observation[:, obs]
    mass = float(weighted.sum())
    if mass <= 0.0:
        raise ZeroBeliefError("observation has zero likelihood under the predicted belief")
    return weighted / mass


def pomdp_step(
    belief: np.ndarray,
    policy: AlphaVectorPolicy,
    reading: SensorReading,
    model: PomdpModel,
) -> tuple[float, np.ndarray]:
    """One decision: pick the greedy action for the current belief, then
    absorb the sensor reading into the posterior. Returns (scale, belief)."""
    action = best_action(policy, belief)
    obs = obs_index(reading.count_bin, reading.detected)
    posterior = belief_update(belief, action, obs, model)
    return policy.scales[action], posterior


def baseline_scale(unobservable_count: int) -> float:
    """Occlusion-count heuristic: full speed at bin 0, a stop at bin 9."""
    b = world.bin_observation(unobservable_count)
    return (NUM_COUNT_BINS - 1 - b) / (NUM_COUNT_BINS - 1)


def stopping_scale(speed_limit_dist: float, v_desired: float, decel: float) -> float:
    """Scale that tracks a constant-deceleration ramp to rest over the
    given distance. Zero at and past the stop point."""
    if v_desired <= 0 or decel <= 0:
        raise ValueError("v_desired and decel must be positive")
    if speed_limit_dist <= 0.0:
        return 0.0
    return min(1.0, math.sqrt(2.0 * decel * speed_limit_dist) / v_desired)


def oracle_scale(
    scene: Scene,
    state: VehicleState,
    crosswalk_s: float,
    v_desired: float,
    decel: float = 2.0,
    stop_margin: float = 5.0,
) -> float:
    """Perfect-perception policy: full speed unless a pedestrian crossing
    is active ahead, in which case ramp down to stop before the crosswalk.

    crosswalk_s is the crosswalk's arc length along the reference path.
    The rule only looks at ground truth, never at occlusion.
    """
    if not scene.pedestrian.present or state.s >= crosswalk_s:
        return 1.0
    return stopping_scale(crosswalk_s - stop_margin - state.s, v_desired, decel)
