"""Scenario library, batch experiment runner, and aggregate reporting."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .metrics import aggregate_ci, multistep_errors_from_log, trial_metrics
from .mpc import MpcConfig, MpcController
from .prediction import build_request, make_predictor
from .world import AgentSpec, Behavior, Scenario, SimConfig, run_trial, vec2

WORKSPACE = (0.0, 0.0, 3.6, 4.5)
SCENARIO_IDS = ("cooperative", "aggressive", "distracted", "diagonal-swap-sim", "empty")
MODEL_IDS = ("cv", "cvn", "constacc", "linreg", "sgan-1", "sgan-20")

# start jitter applied per trial so seeded trials differ
_JITTER = 0.1


def _diagonal_agents():
    return (
        AgentSpec(vec2(3.6, 0.0), vec2(0.0, 4.5), Behavior.ORCA),
        AgentSpec(vec2(0.0, 4.5), vec2(3.6, 0.0), Behavior.ORCA),
        AgentSpec(vec2(3.6, 4.5), vec2(0.0, 0.0), Behavior.ORCA),
    )


def make_scenario(scenario_id: str, rng=None, max_duration=30.0) -> Scenario:
    """Built-in scenario library; rng jitters agent starts within the workspace."""
    if scenario_id in ("cooperative", "diagonal-swap-sim"):
        agents = _diagonal_agents()
    elif scenario_id == "aggressive":
        agents = (AgentSpec(vec2(3.6, 4.5), vec2(0.0, 0.0),
                            Behavior.NON_REACTIVE_STRAIGHT),)
    elif scenario_id == "distracted":
        agents = (AgentSpec(vec2(0.2, 2.25), vec2(0.2, 2.25),
                            Behavior.DISTRACTED_WAYPOINTS,
                            waypoints=(vec2(3.4, 2.25),)),)
    elif scenario_id == "empty":
        agents = ()
    else:
        raise ValueError(f"unknown scenario id: {scenario_id}")

    if rng is not None and agents:
        xmin, ymin, xmax, ymax = WORKSPACE
        jittered = []
        for spec in agents:
            offset = rng.uniform(-_JITTER, _JITTER, size=2)
            start = np.clip(spec.start + offset, [xmin, ymin], [xmax, ymax])
            jittered.append(replace(spec, start=start))
        agents = tuple(jittered)

    return Scenario(
        name=scenario_id, bounds=WORKSPACE,
        robot_start=vec2(0.0, 0.0), robot_goal=vec2(3.6, 4.5),
        agents=agents, goal_tolerance=0.1, max_duration=max_duration,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    models: tuple
    trials: int = 10
    base_seed: int = 0
    mpc_overrides: dict = field(default_factory=dict)
    weights_path: str = ""
    out_dir: str = "out"

    def __post_init__(self):
        if self.scenario not in SCENARIO_IDS:
            raise ValueError(f"unknown scenario id: {self.scenario}")
        for model in self.models:
            if model not in MODEL_IDS:
                raise ValueError(f"unknown model id: {model}")
            if model.startswith("sgan") and not self.weights_path:
                raise ValueError(f"model {model} requires weights_path")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @staticmethod
    def from_json(doc: dict, out_dir=None) -> "ExperimentConfig":
        allowed = {"scenario", "models", "model", "trials", "base_seed",
                   "mpc_overrides", "weights_path", "out_dir"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if ("model" in doc) == ("models" in doc):
            raise ValueError("config must set exactly one of `model` or `models`")
        models = tuple(doc.get("models", [doc.get("model")]))
        overrides = dict(doc.get("mpc_overrides", {}))
        valid_fields = set(MpcConfig.__dataclass_fields__)
        bad = set(overrides) - valid_fields
        if bad:
            raise ValueError(f"unknown mpc_overrides keys: {sorted(bad)}")
        return ExperimentConfig(
            scenario=doc["scenario"], models=models,
            trials=int(doc.get("trials", 10)), base_seed=int(doc.get("base_seed", 0)),
            mpc_overrides=overrides, weights_path=doc.get("weights_path", ""),
            out_dir=out_dir if out_dir is not None else doc.get("out_dir", "out"),
        )


def _mpc_config(overrides) -> MpcConfig:
    return replace(MpcConfig(), **overrides)


def _decisions_csv(log) -> str:
    lines = ["step,chosen_rollout,J_g,J_d,J_p,J_c,total"]
    for step, rec in log.decisions:
        lines.append(
            f"{step},{rec.chosen_rollout},{rec.j_g:.6f},{rec.j_d:.6f},"
            f"{rec.j_p:.6f},{rec.j_c:.6f},{rec.total:.6f}"
        )
    return "\n".join(lines) + "\n"


def _call_distances(log):
    """Mean robot-to-human center distance at each prediction call step."""
    by_step = {w.step: w for w in log.states}
    out = {}
    for step, _ in log.predictions:
        w = by_step[step]
        if w.humans:
            out[step] = float(np.mean([
                np.hypot(*(w.robot.position - h.position)) for h in w.humans
            ]))
    return out


def run_single_trial(scenario_id, model_id, seed, mpc_overrides=None, weights_path=None,
                     max_duration=30.0):
    rng = np.random.default_rng(np.uint64(seed))
    scenario = make_scenario(scenario_id, rng, max_duration)
    predictor = make_predictor(model_id, weights_path=weights_path or None)
    controller = MpcController(_mpc_config(mpc_overrides or {}))
    config = SimConfig(dt=0.1, seed=seed)
    return run_trial(scenario, controller, predictor, config)


def run_benchmark(config: ExperimentConfig) -> dict:
    """Run all trials for every model; write logs, metrics, curves, report.

    The output tree is a pure function of the config (no timestamps)."""
    os.makedirs(config.out_dir, exist_ok=True)
    metrics_rows = []
    call_rows = []
    curve_rows = []
    report = {"config": {
        "scenario": config.scenario, "models": list(config.models),
        "trials": config.trials, "base_seed": config.base_seed,
        "mpc_overrides": config.mpc_overrides,
    }, "models": {}}
    per_model_values = {}

    for model_id in config.models:
        model_dir = os.path.join(config.out_dir, model_id)
        per_step_rows = []
        safeties, times, ades, fdes = [], [], [], []
        for i in range(config.trials):
            seed = config.base_seed + i
            log = run_single_trial(
                config.scenario, model_id, seed, config.mpc_overrides,
                config.weights_path or None,
            )
            tm = trial_metrics(log)
            errors = multistep_errors_from_log(log)
            trial_dir = os.path.join(model_dir, f"trial_{i:03d}")
            os.makedirs(trial_dir, exist_ok=True)
            with open(os.path.join(trial_dir, "log.csv"), "w") as f:
                f.write(log.to_csv())
            with open(os.path.join(trial_dir, "meta.json"), "w") as f:
                json.dump(log.metadata(tm.safety), f, indent=2, sort_keys=True)
                f.write("\n")
            with open(os.path.join(trial_dir, "decisions.csv"), "w") as f:
                f.write(_decisions_csv(log))

            safety = "" if math.isinf(tm.safety) else f"{tm.safety:.6f}"
            ade = f"{np.mean(errors['ade']):.6f}" if errors["ade"] else ""
            fde = f"{np.mean(errors['fde']):.6f}" if errors["fde"] else ""
            metrics_rows.append(
                f"{config.scenario},{model_id},{seed},{safety},"
                f"{tm.time_to_goal:.6f},{tm.status},{ade},{fde}"
            )
            if errors["per_step"].size:
                per_step_rows.append(errors["per_step"])
            distances = _call_distances(log)
            for call_idx, (step, _) in enumerate(log.predictions):
                if call_idx < len(errors["ade"]) and step in distances:
                    call_rows.append(
                        f"{config.scenario},{model_id},{seed},{step},"
                        f"{distances[step]:.6f},{errors['ade'][call_idx]:.6f}"
                    )
            if not math.isinf(tm.safety):
                safeties.append(tm.safety)
            times.append(tm.time_to_goal)
            if errors["ade"]:
                ades.append(float(np.mean(errors["ade"])))
                fdes.append(float(np.mean(errors["fde"])))

        entry = {
            "trials": config.trials,
            "time_to_goal": aggregate_ci(times),
        }
        if safeties:
            entry["safety"] = aggregate_ci(safeties)
        if ades:
            entry["ade"] = aggregate_ci(ades)
            entry["fde"] = aggregate_ci(fdes)
        if per_step_rows:
            matrix = np.concatenate(per_step_rows, axis=0)
            for t in range(matrix.shape[1]):
                ci = aggregate_ci(matrix[:, t])
                curve_rows.append(
                    f"{config.scenario},{model_id},{t + 1},"
                    f"{ci['mean']:.6f},{ci['ci95_halfwidth']:.6f}"
                )
            entry["curve"] = [
                aggregate_ci(matrix[:, t]) for t in range(matrix.shape[1])
            ]
        report["models"][model_id] = entry
        per_model_values[model_id] = {"safety": safeties, "time": times}

    # pairwise Mann-Whitney U tests on safety and time to goal
    pairs = {}
    models = list(config.models)
    for a_idx in range(len(models)):
        for b_idx in range(a_idx + 1, len(models)):
            a, b = models[a_idx], models[b_idx]
            entry = {}
            for metric in ("safety", "time"):
                va = per_model_values[a][metric]
                vb = per_model_values[b][metric]
                if len(va) >= 1 and len(vb) >= 1:
                    result = stats.mannwhitneyu(va, vb, alternative="two-sided")
                    entry[metric] = {"U": float(result.statistic),
                                     "p": float(result.pvalue)}
            pairs[f"{a}_vs_{b}"] = entry
    report["pairwise_u_tests"] = pairs

    with open(os.path.join(config.out_dir, "metrics.csv"), "w") as f:
        f.write("scenario,model,seed,safety,time_to_goal,status,ade,fde\n")
        f.write("\n".join(metrics_rows) + "\n")
    with open(os.path.join(config.out_dir, "curves.csv"), "w") as f:
        f.write("scenario,model,step,err_min,ci95\n")
        if curve_rows:
            f.write("\n".join(curve_rows) + "\n")
    with open(os.path.join(config.out_dir, "calls.csv"), "w") as f:
        f.write("scenario,model,seed,step,distance,ade\n")
        if call_rows:
            f.write("\n".join(call_rows) + "\n")
    with open(os.path.join(config.out_dir, "report.json"), "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return report


def compare_predictors(scenario_id, model_ids, trials, base_seed,
                       weights_path=None, controller_model="cv", max_duration=30.0):
    """Multistep-error comparison of several predictors on shared trial logs.

    Runs `trials` seeded trials driven by ``controller_model`` and scores every
    listed predictor on the identical logged worlds. Returns per-model mean
    per-step error curves with CIs."""
    predictors = {
        m: make_predictor(m, weights_path=weights_path or None) for m in model_ids
    }
    per_model_rows = {m: [] for m in model_ids}
    for i in range(trials):
        seed = base_seed + i
        log = run_single_trial(scenario_id, controller_model, seed,
                               weights_path=weights_path, max_duration=max_duration)
        for m, predictor in predictors.items():
            def predictor_fn(world, call_idx, _p=predictor, _seed=seed):
                request = build_request(
                    world, h=_p.history_len, dt_pred=_p.dt_pred,
                    horizon=_p.horizon, k=_p.num_samples,
                    seed=(_seed * 1_000_003 + call_idx) % (2**63),
                    include_robot=_p.joint,
                )
                return _p.predict(request)

            errors = multistep_errors_from_log(log, predictor_fn)
            if errors["per_step"].size:
                per_model_rows[m].append(errors["per_step"])

    comparison = {}
    for m in model_ids:
        if per_model_rows[m]:
            matrix = np.concatenate(per_model_rows[m], axis=0)
            comparison[m] = {
                "num_calls": int(matrix.shape[0]),
                "curve": [aggregate_ci(matrix[:, t]) for t in range(matrix.shape[1])],
            }
    return comparison
