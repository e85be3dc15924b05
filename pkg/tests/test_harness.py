import json
import os

import numpy as np
import pytest

from crowdnav.cli import main as cli_main
from crowdnav.harness import (ExperimentConfig, compare_predictors, make_scenario,
                              run_benchmark, run_single_trial)
from crowdnav.sgan import DEFAULT_HYPER, GenerativeModelWeights, generator_shapes, save_weights


@pytest.fixture(scope="module")
def random_weights_path(tmp_path_factory):
    rng = np.random.default_rng(0)
    tensors = {name: rng.uniform(-0.1, 0.1, size=shape)
               for name, shape in generator_shapes(DEFAULT_HYPER).items()}
    weights = GenerativeModelWeights(tensors, dict(DEFAULT_HYPER))
    out = tmp_path_factory.mktemp("weights")
    return save_weights(weights, out)


def test_make_scenario_ids_and_jitter():
    base = make_scenario("cooperative")
    assert len(base.agents) == 3
    jittered = make_scenario("cooperative", np.random.default_rng(1))
    assert not np.allclose(base.agents[0].start, jittered.agents[0].start)
    assert len(make_scenario("aggressive").agents) == 1
    assert len(make_scenario("distracted").agents) == 1
    assert make_scenario("empty").agents == ()
    with pytest.raises(ValueError):
        make_scenario("nope")


def test_config_rejects_unknown_ids():
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="nope", models=("cv",))
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="cooperative", models=("nope",))
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="cooperative", models=("sgan-20",))  # no weights
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="cooperative", models=("cv",), trials=0)


def test_config_from_json_validation():
    with pytest.raises(ValueError, match="unknown config keys"):
        ExperimentConfig.from_json({"scenario": "empty", "model": "cv", "typo": 1})
    with pytest.raises(ValueError, match="exactly one"):
        ExperimentConfig.from_json({"scenario": "empty"})
    with pytest.raises(ValueError, match="exactly one"):
        ExperimentConfig.from_json({"scenario": "empty", "model": "cv", "models": ["cv"]})
    with pytest.raises(ValueError, match="mpc_overrides"):
        ExperimentConfig.from_json(
            {"scenario": "empty", "model": "cv", "mpc_overrides": {"bogus": 1}})
    config = ExperimentConfig.from_json(
        {"scenario": "empty", "model": "cv", "trials": 2, "base_seed": 5})
    assert config.models == ("cv",)
    assert config.trials == 2


def test_single_trial_one_metrics_row(tmp_path):
    config = ExperimentConfig(scenario="empty", models=("cv",), trials=1,
                              out_dir=str(tmp_path))
    run_benchmark(config)
    rows = (tmp_path / "metrics.csv").read_text().strip().splitlines()
    assert rows[0] == "scenario,model,seed,safety,time_to_goal,status,ade,fde"
    assert len(rows) == 2
    # empty crowd: safety serialized as an empty field
    assert rows[1].split(",")[3] == ""
    assert (tmp_path / "cv" / "trial_000" / "log.csv").exists()
    assert (tmp_path / "cv" / "trial_000" / "meta.json").exists()
    assert (tmp_path / "cv" / "trial_000" / "decisions.csv").exists()


def test_decisions_csv_total_identity(tmp_path):
    config = ExperimentConfig(scenario="cooperative", models=("cv",), trials=1,
                              out_dir=str(tmp_path))
    run_benchmark(config)
    rows = (tmp_path / "cv" / "trial_000" / "decisions.csv").read_text().strip().splitlines()
    assert rows[0] == "step,chosen_rollout,J_g,J_d,J_p,J_c,total"
    assert len(rows) > 1
    for row in rows[1:]:
        _, _, j_g, j_d, j_p, j_c, total = (float(v) for v in row.split(","))
        # terms are rounded to 6 decimals before weighting, hence the slack
        assert abs(total - (1.0 * j_g + 4.0 * j_d + 0.5 * j_p + 0.3 * j_c)) < 5e-6


def test_sgan20_prediction_sets_have_k20(random_weights_path):
    log = run_single_trial("cooperative", "sgan-20", seed=0,
                           weights_path=random_weights_path, max_duration=2.0)
    assert log.predictions
    for _, pset in log.predictions:
        assert pset.k == 20
        assert pset.includes_robot


def test_report_contains_pairwise_u_tests(tmp_path):
    config = ExperimentConfig(scenario="cooperative", models=("cv", "linreg"),
                              trials=2, out_dir=str(tmp_path))
    report = run_benchmark(config)
    assert "cv_vs_linreg" in report["pairwise_u_tests"]
    entry = report["pairwise_u_tests"]["cv_vs_linreg"]
    assert "safety" in entry and "time" in entry
    assert 0.0 <= entry["safety"]["p"] <= 1.0
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["pairwise_u_tests"] == report["pairwise_u_tests"]


def test_compare_predictors_shared_logs():
    comparison = compare_predictors("diagonal-swap-sim", ["cv", "linreg"],
                                    trials=2, base_seed=0)
    assert set(comparison) == {"cv", "linreg"}
    for entry in comparison.values():
        assert entry["num_calls"] > 0
        assert len(entry["curve"]) == 12
        for point in entry["curve"]:
            assert point["mean"] >= 0.0


def test_cli_simulate_and_exit_codes(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(
        {"scenario": "empty", "model": "cv", "trials": 1}))
    out_dir = tmp_path / "out"
    assert cli_main(["--out", str(out_dir), "simulate", "--config", str(config_path)]) == 0
    assert (out_dir / "report.json").exists()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "nope", "model": "cv"}))
    assert cli_main(["simulate", "--config", str(bad)]) == 1


def test_cli_train_toy_writes_weights(tmp_path):
    out_dir = tmp_path / "weights"
    code = cli_main(["--seed", "0", "--out", str(out_dir),
                     "train-toy", "--epochs", "1", "--scenes", "2"])
    assert code == 0
    assert (out_dir / "manifest.json").exists()
    assert (out_dir / "loss_trace.csv").exists()
