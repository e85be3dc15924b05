"""Optimal reciprocal collision avoidance (ORCA) velocity selection.

Each neighbor within the neighbor distance contributes one half-plane
constraint on the agent's new velocity; the agent picks the feasible
velocity closest to its preferred velocity (2D linear program over the
half-planes intersected with the max-speed disc). When the constraint
set is infeasible the fallback program minimizes the largest violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 1e-10


@dataclass(frozen=True)
class OrcaParams:
    neighbor_dist: float = 5.0
    time_horizon: float = 2.0
    max_speed: float = 1.0
    # timestep used to resolve already-colliding pairs
    dt: float = 0.1

    def __post_init__(self):
        if not (self.neighbor_dist > 0 and self.time_horizon > 0 and self.max_speed > 0 and self.dt > 0):
            raise ValueError("ORCA parameters must be positive")


@dataclass(frozen=True)
class _Line:
    point: np.ndarray
    direction: np.ndarray  # unit vector


def _det(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _norm_sq(v):
    return float(v[0] * v[0] + v[1] * v[1])


def _linear_program1(lines, line_no, radius, opt_velocity, direction_opt, result):
    """Optimize along lines[line_no] clipped by previous lines and the speed disc."""
    line = lines[line_no]
    dot = float(line.point @ line.direction)
    discriminant = dot * dot + radius * radius - _norm_sq(line.point)
    if discriminant < 0.0:
        return False, result
    sqrt_disc = math.sqrt(discriminant)
    t_left = -dot - sqrt_disc
    t_right = -dot + sqrt_disc

    for prev in lines[:line_no]:
        denominator = _det(line.direction, prev.direction)
        numerator = _det(prev.direction, line.point - prev.point)
        if abs(denominator) <= _EPS:
            if numerator < 0.0:
                return False, result
            continue
        t = numerator / denominator
        if denominator >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, result

    if direction_opt:
        if float(opt_velocity @ line.direction) > 0.0:
            t = t_right
        else:
            t = t_left
    else:
        t = float(line.direction @ (opt_velocity - line.point))
        t = min(max(t, t_left), t_right)
    return True, line.point + t * line.direction


def _linear_program2(lines, radius, opt_velocity, direction_opt):
    """Returns (index of first failing line or len(lines), result velocity)."""
    if direction_opt:
        result = opt_velocity * radius
    elif _norm_sq(opt_velocity) > radius * radius:
        result = opt_velocity / math.sqrt(_norm_sq(opt_velocity)) * radius
    else:
        result = np.array(opt_velocity, dtype=float)

    for i, line in enumerate(lines):
        if _det(line.direction, line.point - result) > 0.0:
            temp = result
            ok, result = _linear_program1(lines, i, radius, opt_velocity, direction_opt, result)
            if not ok:
                return i, temp
    return len(lines), result


def _linear_program3(lines, begin_line, radius, result):
    """Infeasible fallback: minimize the maximum constraint violation."""
    distance = 0.0
    for i in range(begin_line, len(lines)):
        if _det(lines[i].direction, lines[i].point - result) > distance:
            proj_lines = []
            for j in range(i):
                denominator = _det(lines[i].direction, lines[j].direction)
                if abs(denominator) <= _EPS:
                    if float(lines[i].direction @ lines[j].direction) > 0.0:
                        continue
                    point = 0.5 * (lines[i].point + lines[j].point)
                else:
                    point = lines[i].point + (
                        _det(lines[j].direction, lines[i].point - lines[j].point) / denominator
                    ) * lines[i].direction
                direction = lines[j].direction - lines[i].direction
                direction = direction / math.sqrt(_norm_sq(direction))
                proj_lines.append(_Line(point, direction))

            temp = result
            fail, result = _linear_program2(
                proj_lines,
                radius,
                np.array([-lines[i].direction[1], lines[i].direction[0]]),
                True,
            )
            if fail < len(proj_lines):
                result = temp
            distance = _det(lines[i].direction, lines[i].point - result)
    return result


def _orca_line(position, velocity, radius, other_position, other_velocity, other_radius, params):
    relative_position = other_position - position
    relative_velocity = velocity - other_velocity
    dist_sq = _norm_sq(relative_position)
    combined_radius = radius + other_radius
    combined_radius_sq = combined_radius * combined_radius
    inv_tau = 1.0 / params.time_horizon

    if dist_sq > combined_radius_sq:
        w = relative_velocity - inv_tau * relative_position
        w_length_sq = _norm_sq(w)
        dot1 = float(w @ relative_position)
        if dot1 < 0.0 and dot1 * dot1 > combined_radius_sq * w_length_sq:
            # project on the cut-off circle
            w_length = math.sqrt(w_length_sq)
            unit_w = w / w_length if w_length > _EPS else np.array([1.0, 0.0])
            direction = np.array([unit_w[1], -unit_w[0]])
            u = (combined_radius * inv_tau - w_length) * unit_w
        else:
            # project on a leg of the velocity obstacle
            leg = math.sqrt(dist_sq - combined_radius_sq)
            rp = relative_position
            if _det(rp, w) > 0.0:
                direction = np.array(
                    [rp[0] * leg - rp[1] * combined_radius, rp[0] * combined_radius + rp[1] * leg]
                ) / dist_sq
            else:
                direction = -np.array(
                    [rp[0] * leg + rp[1] * combined_radius, -rp[0] * combined_radius + rp[1] * leg]
                ) / dist_sq
            dot2 = float(relative_velocity @ direction)
            u = dot2 * direction - relative_velocity
    else:
        # already colliding: push apart within one timestep
        inv_dt = 1.0 / params.dt
        w = relative_velocity - inv_dt * relative_position
        w_length = math.sqrt(_norm_sq(w))
        unit_w = w / w_length if w_length > _EPS else np.array([1.0, 0.0])
        direction = np.array([unit_w[1], -unit_w[0]])
        u = (combined_radius * inv_dt - w_length) * unit_w

    # reciprocity: each agent takes half of the required velocity change
    return _Line(velocity + 0.5 * u, direction)


def orca_velocity(position, velocity, radius, neighbors, preferred_velocity, params: OrcaParams):
    """New velocity for an agent avoiding its neighbors.

    ``neighbors`` is a sequence of (position, velocity, radius) triples.
    Total function: always returns a velocity with magnitude <= max_speed.
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    preferred_velocity = np.asarray(preferred_velocity, dtype=float)

    lines = []
    nd_sq = params.neighbor_dist * params.neighbor_dist
    for other_position, other_velocity, other_radius in neighbors:
        other_position = np.asarray(other_position, dtype=float)
        other_velocity = np.asarray(other_velocity, dtype=float)
        if _norm_sq(other_position - position) >= nd_sq:
            continue
        lines.append(
            _orca_line(position, velocity, radius, other_position, other_velocity, other_radius, params)
        )

    fail, new_velocity = _linear_program2(lines, params.max_speed, preferred_velocity, False)
    if fail < len(lines):
        new_velocity = _linear_program3(lines, fail, params.max_speed, new_velocity)
    return new_velocity
