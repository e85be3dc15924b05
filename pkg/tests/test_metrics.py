import math

import numpy as np
import pytest

from crowdnav.metrics import (aggregate_ci, displacement_errors, trial_metrics)
from crowdnav.prediction import PredictionSet, TrajectorySample
from crowdnav.world import AgentState, TrialLog, WorldState, vec2


def _pset(futures_list, dt=0.4):
    samples = tuple(TrajectorySample(np.asarray(f, float)) for f in futures_list)
    return PredictionSet(samples, "test", dt, samples[0].futures[:, 0])


def test_exact_prediction_zero_errors():
    gt = np.random.default_rng(0).uniform(0, 3, (2, 5, 2))
    result = displacement_errors(gt, _pset([gt.copy()]))
    assert result["ade"] == 0.0
    assert result["fde"] == 0.0
    assert np.all(result["curve"].errors == 0.0)


def test_constant_offset_errors():
    gt = np.zeros((1, 4, 2))
    pred = gt + np.array([0.3, 0.4])  # offset magnitude 0.5
    result = displacement_errors(gt, _pset([pred]))
    assert result["ade"] == pytest.approx(0.5, abs=1e-12)
    assert result["fde"] == pytest.approx(0.5, abs=1e-12)


def test_best_of_k_takes_exact_sample():
    gt = np.random.default_rng(1).uniform(0, 3, (1, 4, 2))
    result = displacement_errors(gt, _pset([gt + 10.0, gt.copy()]))
    assert result["ade"] == 0.0
    assert result["fde"] == 0.0


def test_best_of_k_monotone_when_samples_appended():
    rng = np.random.default_rng(2)
    gt = rng.uniform(0, 3, (2, 4, 2))
    samples = [rng.uniform(0, 3, (2, 4, 2)) for _ in range(4)]
    ades = [displacement_errors(gt, _pset(samples[:k]))["ade"] for k in (1, 2, 3, 4)]
    assert all(b <= a + 1e-12 for a, b in zip(ades, ades[1:]))


def test_ade_bounded_by_max_step_and_fde_is_last_curve_point():
    rng = np.random.default_rng(3)
    gt = rng.uniform(0, 3, (2, 6, 2))
    pred = rng.uniform(0, 3, (2, 6, 2))
    result = displacement_errors(gt, _pset([pred]))
    assert result["ade"] <= result["curve"].errors.max() + 1e-12
    assert result["fde"] == pytest.approx(result["curve"].errors[-1], abs=1e-12)


def test_displacement_errors_agent_mismatch():
    gt = np.zeros((2, 4, 2))
    with pytest.raises(ValueError):
        displacement_errors(gt, _pset([np.zeros((3, 4, 2))]))


def _log_with_positions(robot_xy, humans_xy):
    """One-step TrialLog with given robot and human positions."""
    states = []
    for step, (r, hs) in enumerate(zip(robot_xy, humans_xy)):
        robot = AgentState(vec2(*r), np.zeros(2))
        humans = tuple(AgentState(vec2(*h), np.zeros(2)) for h in hs)
        states.append(WorldState(step, 0.1, robot, humans, (), ()))
    log = TrialLog("s", "cv", 0, 0.1, status="reached", time_to_goal=0.1 * len(states))
    log.states = states
    return log


def test_safety_arithmetic():
    log = _log_with_positions([(0, 0)], [[(0.9, 0.0)]])
    assert trial_metrics(log).safety == pytest.approx(0.3, abs=1e-12)
    log = _log_with_positions([(0, 0)], [[(0.6, 0.0)]])
    assert trial_metrics(log).safety == pytest.approx(0.0, abs=1e-12)
    log = _log_with_positions([(0, 0)], [[(0.5, 0.0)]])
    assert trial_metrics(log).safety == pytest.approx(-0.1, abs=1e-12)


def test_safety_min_over_steps_and_humans():
    log = _log_with_positions(
        [(0, 0), (0, 0)],
        [[(2.0, 0.0), (1.5, 0.0)], [(0.8, 0.0), (3.0, 0.0)]],
    )
    assert trial_metrics(log).safety == pytest.approx(0.8 - 0.6, abs=1e-12)


def test_safety_infinite_with_zero_humans():
    log = _log_with_positions([(0, 0)], [[]])
    tm = trial_metrics(log)
    assert math.isinf(tm.safety)
    # serialized as an empty field in metadata
    assert log.metadata(tm.safety)["safety"] is None


def test_safety_translation_invariant():
    moves = [(0.3, -1.2)]
    base = _log_with_positions([(0, 0)], [[(1.0, 0.5)]])
    shifted = _log_with_positions([(0.3, -1.2)], [[(1.3, -0.7)]])
    assert trial_metrics(base).safety == pytest.approx(
        trial_metrics(shifted).safety, abs=1e-9)


def test_aggregate_ci_equal_values():
    out = aggregate_ci([2.0, 2.0, 2.0])
    assert out["mean"] == 2.0
    assert out["ci95_halfwidth"] == 0.0


def test_aggregate_ci_two_values_arithmetic():
    out = aggregate_ci([0.0, 2.0])
    assert out["mean"] == 1.0
    # 1.96 * sd(n-1) / sqrt(n) = 1.96 * sqrt(2) / sqrt(2) = 1.96
    assert out["ci95_halfwidth"] == pytest.approx(1.96, abs=1e-12)


def test_aggregate_ci_single_value():
    out = aggregate_ci([5.0])
    assert out == {"mean": 5.0, "ci95_halfwidth": 0.0}


def test_aggregate_ci_empty_raises():
    with pytest.raises(ValueError):
        aggregate_ci([])


def test_aggregate_ci_permutation_invariant():
    values = [0.1, 5.0, -3.0, 2.2, 0.7]
    a = aggregate_ci(values)
    b = aggregate_ci(values[::-1])
    assert a == b
