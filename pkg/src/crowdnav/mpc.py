"""Sampling-based receding-horizon controller.

Candidate rollouts head at preferred speed toward subgoals placed on a ring
around the robot; each rollout is scored by the Monte-Carlo expectation of a
composite cost (goal progress, proximity hinge, personal space, prediction
consistency) over the sampled joint futures, and only the first command of
the best rollout is executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .prediction import PredictionSet
from .world import AgentState, DecisionRecord


@dataclass(frozen=True)
class MpcConfig:
    a_g: float = 1.0
    # proximity weight raised from the initial 1.5 after sweeps: the lighter
    # setting let the robot graze ORCA agents on the diagonal swap
    a_d: float = 4.0
    a_p: float = 0.5
    a_c: float = 0.3
    num_subgoals: int = 10
    subgoal_interval: float = math.pi / 5
    subgoal_distance: float = 10.0
    horizon: int = 10
    dt: float = 0.1
    preferred_speed: float = 0.8
    d_safe: float = 0.3
    sigma_p: float = 0.45
    robot_radius: float = 0.3
    human_radius: float = 0.3
    # safety-fallback zero-velocity rollout appended as the last index
    stop_rollout: bool = False

    def __post_init__(self):
        if min(self.a_g, self.a_d, self.a_p, self.a_c) < 0:
            raise ValueError("cost weights must be non-negative")
        if abs(self.num_subgoals * self.subgoal_interval - 2 * math.pi) > 1e-9:
            raise ValueError("subgoals must cover the full circle")


@dataclass(frozen=True)
class Rollout:
    controls: np.ndarray  # (T, 2) velocity commands
    states: np.ndarray    # (T, 2) robot positions after each command


@dataclass(frozen=True)
class CostBreakdown:
    j_g: float
    j_d: float
    j_p: float
    j_c: float
    total: float


def generate_rollouts(robot: AgentState, config: MpcConfig):
    """Constant-velocity rollouts toward ring subgoals (plus optional stop)."""
    rollouts = []
    steps = np.arange(1, config.horizon + 1)[:, None] * config.dt
    for j in range(config.num_subgoals):
        angle = j * config.subgoal_interval
        direction = np.array([math.cos(angle), math.sin(angle)])
        velocity = direction * config.preferred_speed
        controls = np.tile(velocity, (config.horizon, 1))
        states = robot.position[None, :] + velocity[None, :] * steps
        rollouts.append(Rollout(controls, states))
    if config.stop_rollout:
        controls = np.zeros((config.horizon, 2))
        states = np.tile(robot.position, (config.horizon, 1))
        rollouts.append(Rollout(controls, states))
    return rollouts


def cost_goal(rollout: Rollout, goal, start, config: MpcConfig) -> float:
    """Normalized progress: final distance over current distance, clamped [0, 2]."""
    eps = 1e-6
    final_dist = float(np.hypot(*(rollout.states[-1] - goal)))
    current_dist = float(np.hypot(*(np.asarray(start) - goal)))
    return min(max(final_dist / (current_dist + eps), 0.0), 2.0)


def cost_social(rollout: Rollout, human_tracks, config: MpcConfig):
    """Proximity hinge J_d and personal-space penalty J_p for one sample.

    human_tracks: (n, >=horizon, 2) predicted human positions on the
    controller grid (t = dt, 2dt, ...). Averaged over timesteps and agents.
    """
    n = human_tracks.shape[0]
    if n == 0:
        return 0.0, 0.0
    horizon = rollout.states.shape[0]
    clearance = (
        np.linalg.norm(rollout.states[None, :, :] - human_tracks[:, :horizon, :], axis=2)
        - config.robot_radius - config.human_radius
    )
    j_d = float(np.mean(np.maximum(0.0, config.d_safe - clearance) ** 2))
    j_p = float(np.mean(np.exp(-clearance ** 2 / (2.0 * config.sigma_p ** 2))))
    return j_d, j_p


def cost_consistency(rollout: Rollout, ego_prediction) -> float:
    """Mean per-step distance between the rollout and the ego prediction."""
    horizon = rollout.states.shape[0]
    ego = np.asarray(ego_prediction)[:horizon]
    return float(np.mean(np.linalg.norm(rollout.states[:ego.shape[0]] - ego, axis=1)))


def _sample_tracks(pset: PredictionSet, sample_idx: int):
    """(human_tracks, ego_track) on the controller grid (anchor dropped)."""
    futures = pset.samples[sample_idx].futures[:, 1:, :]  # drop t=0 anchor
    if pset.includes_robot:
        return futures[1:], futures[0]
    return futures, None


def expected_cost(rollout: Rollout, predictions: PredictionSet, goal, start,
                  config: MpcConfig, ego_prediction=None) -> CostBreakdown:
    """Monte-Carlo expectation of the composite cost over the k samples.

    For joint predictors the per-sample ego track feeds the consistency term;
    otherwise ``ego_prediction`` (the robot's own CV extrapolation, anchor
    included) is used for every sample.
    """
    j_g = cost_goal(rollout, goal, start, config)
    j_d = j_p = j_c = 0.0
    k = predictions.k
    fallback_ego = None
    if ego_prediction is not None:
        fallback_ego = np.asarray(ego_prediction)[1:]  # drop t=0 anchor
    for s in range(k):
        human_tracks, ego = _sample_tracks(predictions, s)
        d, p = cost_social(rollout, human_tracks, config)
        j_d += d
        j_p += p
        if ego is None:
            ego = fallback_ego
        if ego is not None:
            j_c += cost_consistency(rollout, ego)
    j_d, j_p, j_c = j_d / k, j_p / k, j_c / k
    total = config.a_g * j_g + config.a_d * j_d + config.a_p * j_p + config.a_c * j_c
    return CostBreakdown(j_g, j_d, j_p, j_c, total)


def select_control(rollouts, predictions: PredictionSet, goal, start,
                   config: MpcConfig, ego_prediction=None):
    """Argmin of expected total cost; ties broken by lowest rollout index.

    Returns (chosen index, first velocity command, list of CostBreakdowns).
    """
    if not rollouts:
        raise ValueError("need at least one rollout")
    breakdowns = [
        expected_cost(r, predictions, goal, start, config, ego_prediction)
        for r in rollouts
    ]
    best = min(range(len(rollouts)), key=lambda i: (breakdowns[i].total, i))
    return best, rollouts[best].controls[0], breakdowns


class MpcController:
    """Controller wrapper used by run_trial."""

    def __init__(self, config: MpcConfig):
        self.config = config

    def command(self, world, prediction, ego_prediction, goal):
        rollouts = generate_rollouts(world.robot, self.config)
        if prediction is None:
            # no predictor: goal cost only over an empty crowd
            empty = _empty_prediction(self.config)
            idx, command, breakdowns = select_control(
                rollouts, empty, goal, world.robot.position, self.config
            )
        else:
            idx, command, breakdowns = select_control(
                rollouts, prediction, goal, world.robot.position, self.config, ego_prediction
            )
        b = breakdowns[idx]
        return command, DecisionRecord(idx, b.j_g, b.j_d, b.j_p, b.j_c, b.total)


def _empty_prediction(config: MpcConfig) -> PredictionSet:
    from .prediction import TrajectorySample
    sample = TrajectorySample(np.zeros((0, config.horizon + 1, 2)))
    return PredictionSet((sample,), "none", config.dt, np.zeros((0, 2)))
