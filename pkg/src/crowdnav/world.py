"""Deterministic fixed-timestep 2D crowd world.

Agents are single integrators advanced by explicit Euler at the controller
timestep. Human velocities come from ORCA or scripted behaviors evaluated
against the pre-step world; the robot follows externally supplied commands.
"""

from __future__ import annotations

import enum
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .orca import OrcaParams, orca_velocity


def vec2(x, y):
    v = np.array([float(x), float(y)])
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector ({x}, {y})")
    return v


class Behavior(enum.Enum):
    ORCA = "orca"
    NON_REACTIVE_STRAIGHT = "straight"
    DISTRACTED_WAYPOINTS = "distracted"


@dataclass(frozen=True)
class AgentState:
    position: np.ndarray
    velocity: np.ndarray
    radius: float = 0.3

    def __post_init__(self):
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise ValueError("non-finite agent state")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def speed(self) -> float:
        return float(np.hypot(self.velocity[0], self.velocity[1]))


@dataclass(frozen=True)
class AgentSpec:
    start: np.ndarray
    goal: np.ndarray
    behavior: Behavior = Behavior.ORCA
    preferred_speed: float = 0.8
    radius: float = 0.3
    # intermediate targets for DISTRACTED_WAYPOINTS; full route is
    # waypoints + [start] (the agent returns to where it began)
    waypoints: tuple = ()

    def __post_init__(self):
        if self.preferred_speed <= 0:
            raise ValueError("preferred speed must be positive")

    def targets(self):
        if self.behavior is Behavior.DISTRACTED_WAYPOINTS:
            return list(self.waypoints) + [self.start]
        return [self.goal]


@dataclass(frozen=True)
class Scenario:
    name: str
    bounds: tuple  # (xmin, ymin, xmax, ymax)
    robot_start: np.ndarray
    robot_goal: np.ndarray
    agents: tuple  # of AgentSpec
    goal_tolerance: float = 0.1
    max_duration: float = 30.0
    robot_radius: float = 0.3

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        for p in (self.robot_start, self.robot_goal, *(a.start for a in self.agents),
                  *(a.goal for a in self.agents)):
            if not (xmin - 1e-9 <= p[0] <= xmax + 1e-9 and ymin - 1e-9 <= p[1] <= ymax + 1e-9):
                raise ValueError(f"point {p} outside workspace bounds {self.bounds}")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    seed: int = 0
    orca_neighbor_dist: float = 5.0
    orca_time_horizon: float = 2.0
    # per-agent ORCA max speed = this factor times preferred speed
    orca_speed_factor: float = 1.2

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class WorldState:
    step: int
    dt: float
    robot: AgentState
    humans: tuple  # of AgentState
    # per-agent (robot first) tuples of (time, x, y), time-ordered
    histories: tuple
    # per-human index into its target sequence (distracted agents)
    waypoint_index: tuple

    @property
    def time(self) -> float:
        # exact accumulation by integer step count
        return self.step * self.dt

    @property
    def num_humans(self) -> int:
        return len(self.humans)


def initial_world(scenario: Scenario, config: SimConfig) -> WorldState:
    robot = AgentState(np.array(scenario.robot_start, dtype=float), np.zeros(2), scenario.robot_radius)
    humans = tuple(
        AgentState(np.array(a.start, dtype=float), np.zeros(2), a.radius) for a in scenario.agents
    )
    histories = tuple(
        ((0.0, float(s.position[0]), float(s.position[1])),) for s in (robot, *humans)
    )
    return WorldState(
        step=0, dt=config.dt, robot=robot, humans=humans,
        histories=histories, waypoint_index=tuple(0 for _ in humans),
    )


def _toward(position, target, speed, dt):
    """Velocity toward target at given speed, capped so the step cannot overshoot."""
    delta = target - position
    dist = float(np.hypot(delta[0], delta[1]))
    if dist < 1e-12:
        return np.zeros(2)
    return delta / dist * min(speed, dist / dt)


def scripted_velocity(agent: AgentState, spec: AgentSpec, waypoint_index: int,
                      goal_tolerance: float, dt: float):
    """Velocity for a non-ORCA agent; returns (velocity, new waypoint index)."""
    if spec.behavior is Behavior.NON_REACTIVE_STRAIGHT:
        if float(np.hypot(*(spec.goal - agent.position))) <= goal_tolerance:
            return np.zeros(2), waypoint_index
        return _toward(agent.position, spec.goal, spec.preferred_speed, dt), waypoint_index
    if spec.behavior is Behavior.DISTRACTED_WAYPOINTS:
        targets = spec.targets()
        while waypoint_index < len(targets) and \
                float(np.hypot(*(targets[waypoint_index] - agent.position))) <= goal_tolerance:
            waypoint_index += 1
        if waypoint_index >= len(targets):
            return np.zeros(2), waypoint_index
        return _toward(agent.position, targets[waypoint_index], spec.preferred_speed, dt), waypoint_index
    raise ValueError(f"scripted_velocity does not handle behavior {spec.behavior}")


# history ring-buffer capacity: enough for 8 observed steps on the 0.4 s
# prediction grid plus slack at the 0.1 s sim grid
_HISTORY_CAP = 64


def step_world(world: WorldState, robot_command, scenario: Scenario, config: SimConfig) -> WorldState:
    """Advance every agent by one explicit-Euler step of config.dt."""
    robot_command = np.asarray(robot_command, dtype=float)
    dt = config.dt
    new_velocities = []
    new_indices = list(world.waypoint_index)

    for i, (agent, spec) in enumerate(zip(world.humans, scenario.agents)):
        at_goal = float(np.hypot(*(spec.targets()[-1] - agent.position))) <= scenario.goal_tolerance \
            and (spec.behavior is not Behavior.DISTRACTED_WAYPOINTS
                 or world.waypoint_index[i] >= len(spec.targets()) - 1)
        if spec.behavior is Behavior.ORCA:
            if at_goal:
                new_velocities.append(np.zeros(2))
                continue
            params = OrcaParams(
                neighbor_dist=config.orca_neighbor_dist,
                time_horizon=config.orca_time_horizon,
                max_speed=config.orca_speed_factor * spec.preferred_speed,
                dt=dt,
            )
            neighbors = [(world.robot.position, world.robot.velocity, world.robot.radius)]
            neighbors += [
                (other.position, other.velocity, other.radius)
                for j, other in enumerate(world.humans) if j != i
            ]
            preferred = _toward(agent.position, spec.goal, spec.preferred_speed, dt)
            new_velocities.append(
                orca_velocity(agent.position, agent.velocity, agent.radius, neighbors, preferred, params)
            )
        else:
            vel, new_indices[i] = scripted_velocity(
                agent, spec, world.waypoint_index[i], scenario.goal_tolerance, dt
            )
            new_velocities.append(vel)

    robot = AgentState(world.robot.position + robot_command * dt, robot_command, world.robot.radius)
    humans = tuple(
        AgentState(agent.position + vel * dt, vel, agent.radius)
        for agent, vel in zip(world.humans, new_velocities)
    )

    t = (world.step + 1) * dt
    histories = tuple(
        (hist + ((t, float(s.position[0]), float(s.position[1])),))[-_HISTORY_CAP:]
        for hist, s in zip(world.histories, (robot, *humans))
    )
    return WorldState(
        step=world.step + 1, dt=dt, robot=robot, humans=humans,
        histories=histories, waypoint_index=tuple(new_indices),
    )


@dataclass
class DecisionRecord:
    chosen_rollout: int
    j_g: float
    j_d: float
    j_p: float
    j_c: float
    total: float


@dataclass
class TrialLog:
    scenario_name: str
    model_id: str
    seed: int
    dt: float
    status: str = "timeout"
    time_to_goal: float = 0.0
    states: list = field(default_factory=list)       # WorldState per step (incl. initial)
    decisions: list = field(default_factory=list)    # (step, DecisionRecord)
    predictions: list = field(default_factory=list)  # (step, PredictionSet)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,time,agent_id,x,y,vx,vy\n")
        for w in self.states:
            for agent_id, s in enumerate((w.robot, *w.humans)):
                buf.write(
                    f"{w.step},{w.time:.6f},{agent_id},"
                    f"{s.position[0]:.6f},{s.position[1]:.6f},"
                    f"{s.velocity[0]:.6f},{s.velocity[1]:.6f}\n"
                )
        return buf.getvalue()

    def metadata(self, safety) -> dict:
        return {
            "scenario": self.scenario_name,
            "model": self.model_id,
            "seed": self.seed,
            "status": self.status,
            "time_to_goal": round(self.time_to_goal, 6),
            "safety": None if safety is None or math.isinf(safety) else round(safety, 6),
        }


def run_trial(scenario: Scenario, controller, predictor, config: SimConfig) -> TrialLog:
    """Observe -> predict -> select control -> step until goal or timeout."""
    from .prediction import build_request, predict_cv, resample_prediction

    rng = np.random.default_rng(np.uint64(config.seed))
    model_id = getattr(predictor, "model_id", "none") if predictor is not None else "none"
    log = TrialLog(scenario.name, model_id, config.seed, config.dt)
    world = initial_world(scenario, config)

    while True:
        dist_to_goal = float(np.hypot(*(scenario.robot_goal - world.robot.position)))
        if dist_to_goal <= scenario.goal_tolerance:
            log.status = "reached"
            log.time_to_goal = world.time
            log.states.append(world)
            break
        if world.time >= scenario.max_duration - 1e-9:
            log.status = "timeout"
            log.time_to_goal = scenario.max_duration
            if world.step > 0:
                log.states.append(world)
            break

        log.states.append(world)

        prediction = None
        ego_prediction = None
        if predictor is not None:
            request = build_request(
                world,
                h=predictor.history_len,
                dt_pred=predictor.dt_pred,
                horizon=predictor.horizon,
                k=predictor.num_samples,
                seed=int(rng.integers(0, 2**63, dtype=np.uint64)),
                include_robot=predictor.joint,
            )
            raw = predictor.predict(request)
            log.predictions.append((world.step, raw))
            prediction = resample_prediction(raw, config.dt)
            if not predictor.joint:
                # non-joint models: ego prediction is the robot's own CV extrapolation
                ego_req = build_request(
                    world, h=predictor.history_len, dt_pred=predictor.dt_pred,
                    horizon=predictor.horizon, k=1, seed=0, include_robot=True, robot_only=True,
                )
                ego_raw = predict_cv(ego_req)
                ego_prediction = resample_prediction(ego_raw, config.dt).samples[0].futures[0]

        command, record = controller.command(world, prediction, ego_prediction, scenario.robot_goal)
        if record is not None:
            log.decisions.append((world.step, record))
        world = step_world(world, command, scenario, config)

    return log
