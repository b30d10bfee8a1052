import logging
import math
import os

import numpy as np
import pandas as pd
import pytest

from src.environment.model import EnvironmentSpec
from src.harness.campaign import run_campaign, run_single
from src.harness.config import ExperimentConfig, config_from_dict, load_config
from src.harness.experiments import false_negative_sweep, sublinearity_probe
from src.harness.monitors import RobustnessCheckpoint, checkpoint_rounds, robustness_monitor
from src.harness.outputs import (
    averaged_curve,
    dumps,
    list_run_summaries,
    write_campaign_outputs,
    write_run_outputs,
)
from src.utils.common import load_json_file, write_json_file
from src.utils.errors import ConfigError
from tests.conftest import FAST_SOLVER_ITER, fixture_path


@pytest.fixture
def orthonormal_env():
    """Three orthonormal arms; the target (arm 2) has the lowest mean."""
    return EnvironmentSpec(arms=np.eye(3), target_index=2, theta_star=[0.8, 0.6, 0.0], noise_sigma=0.0)


def small_cfg(**overrides):
    base = dict(d=3, k=3, sigma=0.0, T=200, T1=30, seeds=(0,), solver_max_iter=FAST_SOLVER_ITER, workers=1)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.d, cfg.k, cfg.T) == (10, 30, 10_000)
        assert cfg.seeds == tuple(range(10))
        assert cfg.resolved_T1() == 100
        assert cfg.resolved_compensate()
        assert cfg.resolved_noise_scale() == 0.1

    def test_robust_phe_defaults(self):
        cfg = ExperimentConfig(victim="robust-phe")
        assert cfg.victim == "robust_phe"
        assert cfg.resolved_T1() == 40
        assert not cfg.resolved_compensate()

    @pytest.mark.parametrize(
        "overrides, field",
        [
            ({"T": -5}, "T"),
            ({"sigma": -0.1}, "sigma"),
            ({"lam": 0.0}, "lambda"),
            ({"delta": 1.5}, "delta"),
            ({"T1": 10_000}, "T1"),
            ({"victim": "thompson"}, "victim"),
            ({"env_source": "file"}, "env_path"),
            ({"d": 2.5}, "d"),
            ({"seeds": ()}, "seeds"),
            ({"seeds": ["a"]}, "seeds"),
            ({"seeds": [1.5]}, "seeds"),
            ({"seeds": [-1]}, "seeds"),
            ({"seeds": [True]}, "seeds"),
            ({"seeds": "0"}, "seeds"),
        ],
    )
    def test_invalid_field_is_named(self, overrides, field):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig(**overrides)
        assert excinfo.value.field == field
        assert str(excinfo.value).startswith(f"{field}:")

    def test_negative_horizon_message(self):
        with pytest.raises(ConfigError, match="T: must be >= 1, got -5"):
            ExperimentConfig(T=-5)

    def test_hash_ignores_workers(self):
        assert ExperimentConfig(workers=1).config_hash() == ExperimentConfig(workers=8).config_hash()
        assert ExperimentConfig(T=500).config_hash() != ExperimentConfig(T=600).config_hash()

    def test_from_dict_uses_lambda_key(self):
        cfg = config_from_dict({"lambda": 0.5, "T": 50}, overrides={"T": 60, "sigma": None})
        assert cfg.lam == 0.5
        assert cfg.T == 60
        assert cfg.to_dict()["lambda"] == 0.5

    def test_from_dict_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="horizon"):
            config_from_dict({"horizon": 10})

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"T": 400, "victim": "robust_phe", "seeds": [3, 4]}')
        cfg = load_config(str(path))
        assert cfg.T == 400
        assert cfg.seeds == (3, 4)

    def test_with_overrides_revalidates(self):
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides(T=0)


class TestMonitors:
    def test_checkpoint_rounds(self):
        assert checkpoint_rounds(3, 10) == [4, 6, 9, 10]
        assert checkpoint_rounds(100, 10_000)[:3] == [101, 200, 300]
        assert checkpoint_rounds(100, 10_000)[-1] == 10_000

    def test_forged_violation_is_reported(self):
        cp = RobustnessCheckpoint(
            t=4,
            A=np.eye(2),
            theta_hat=np.zeros(2),
            alpha_t=1.0,
            theta_tilde=np.array([10.0, 0.0]),
            nontarget_corruption=0.0,
            gamma_realized=0.0,
            lam=1.0,
        )
        violations = robustness_monitor([cp])
        assert violations == [{"t": 4, "lhs": pytest.approx(10.0), "rhs": 1.0}]

    def test_bound_terms(self):
        cp = RobustnessCheckpoint(
            t=9,
            A=np.diag([4.0, 1.0]),
            theta_hat=np.array([0.5, 0.0]),
            alpha_t=1.0,
            theta_tilde=np.array([1.0, 0.0]),
            nontarget_corruption=2.0,
            gamma_realized=0.1,
            lam=4.0,
        )
        assert cp.lhs() == pytest.approx(1.0)
        assert cp.rhs() == pytest.approx(1.0 + 1.0 + 0.3)
        assert robustness_monitor([cp]) == []


class TestRunSingle:
    def test_clean_run_costs_nothing(self, orthonormal_env):
        result = run_single(small_cfg(attack="none"), 0, env=orthonormal_env)
        assert result.summary["total_cost"] == 0.0
        assert result.summary["asserted_attackable"] is None
        assert result.summary["regret_vs_theta_tilde"] is None
        assert result.summary["best_arm"] == 0
        assert result.summary["best_arm_fraction"] > 0.5

    def test_oracle_attack_redirects_learner(self, orthonormal_env):
        result = run_single(small_cfg(attack="oracle"), 0, env=orthonormal_env)
        summary = result.summary
        assert summary["true_attackable"]
        assert summary["epsilon_star"] == pytest.approx(1 / np.sqrt(2), abs=1e-6)
        assert summary["target_pull_fraction"] > 0.5
        assert summary["stage2_cost"] == summary["total_cost"]
        assert summary["stage1_cost"] == 0.0

    def test_two_stage_attack_enters_stage2(self, orthonormal_env):
        result = run_single(small_cfg(), 0, env=orthonormal_env)
        summary = result.summary
        assert summary["asserted_attackable"]
        assert not summary["aborted"]
        assert summary["n_target_stage1"] >= 1
        assert summary["epsilon_tilde_star"] == pytest.approx(summary["epsilon_star"], abs=1e-6)
        assert summary["compensation_done"]
        assert summary["target_pull_fraction"] > 0.5
        assert summary["bound_checkpoints"] == len(checkpoint_rounds(30, 200))
        assert math.isclose(summary["stage1_cost"] + summary["stage2_cost"], summary["total_cost"], rel_tol=1e-12)

    def test_robust_phe_run_has_no_checkpoints(self, orthonormal_env):
        result = run_single(small_cfg(victim="robust_phe", T1=None), 0, env=orthonormal_env)
        assert result.summary["bound_checkpoints"] == 0
        assert result.summary["final_active_arms"]
        assert result.summary["cb_violations"] is None

    def test_same_seed_is_bitwise_identical(self, orthonormal_env):
        env = orthonormal_env.with_sigma(0.1)
        cfg = small_cfg(sigma=0.1)
        a = run_single(cfg, 5, env=env)
        b = run_single(cfg, 5, env=env)
        assert dumps(a.summary) == dumps(b.summary)
        pd.testing.assert_frame_equal(a.log_frame(), b.log_frame())

    def test_sampled_environment(self):
        cfg = small_cfg(d=3, k=4, sigma=0.1, T=50, T1=8, env_source="sample_attackable")
        result = run_single(cfg, 1)
        assert result.summary["true_attackable"]
        assert result.summary["environment_tries"] >= 1
        assert len(result.ledger) == 50

    def test_file_environment(self, caplog):
        cfg = small_cfg(
            attack="oracle", T=40, env_source="file", env_path=fixture_path("near_collinear_attackable.json"),
            allow_unnormalized=True, sigma=0.05,
        )
        with caplog.at_level(logging.WARNING, logger="src.harness.campaign"):
            result = run_single(cfg, 0)
        assert result.summary["sigma"] == 0.05
        assert result.summary["epsilon_star"] == pytest.approx(0.005 / 1.11, abs=1e-12)
        assert "Config sigma 0.05 replaces sigma 0.1" in caplog.text

    def test_matching_file_sigma_is_kept_quietly(self, caplog):
        cfg = small_cfg(attack="none", T=10, env_source="file", env_path=fixture_path("faint_target.json"), sigma=0.1)
        with caplog.at_level(logging.WARNING, logger="src.harness.campaign"):
            result = run_single(cfg, 0)
        assert result.summary["sigma"] == 0.1
        assert "replaces sigma" not in caplog.text


class TestRunCampaign:
    def test_results_in_seed_order(self, orthonormal_env):
        cfg = small_cfg(seeds=(3, 1, 2), workers=3, sigma=0.1, T=60)
        results = run_campaign(cfg, env=orthonormal_env.with_sigma(0.1))
        assert [r.seed for r in results] == [3, 1, 2]
        serial = run_campaign(small_cfg(seeds=(3, 1, 2), sigma=0.1, T=60), env=orthonormal_env.with_sigma(0.1))
        assert [dumps(r.summary) for r in results] == [dumps(r.summary) for r in serial]


class TestOutputs:
    def test_round_log_conserves_cost(self, orthonormal_env, tmp_path):
        env = orthonormal_env.with_sigma(0.1)
        result = run_single(small_cfg(sigma=0.1), 2, env=env)
        paths = write_run_outputs(result, str(tmp_path))
        frame = pd.read_csv(paths["rounds"], float_precision="round_trip")
        assert len(frame) == 200
        assert math.fsum(abs(d) for d in frame["fed_reward"] - frame["true_reward"]) == pytest.approx(
            result.summary["total_cost"], rel=1e-12
        )
        assert math.fsum(abs(d) for d in frame["delta"]) == result.summary["total_cost"]
        curve = pd.read_csv(paths["cost"], float_precision="round_trip")
        assert list(curve.columns) == ["t", "value"]
        assert curve["t"].tolist() == list(range(1, 201))

    def test_campaign_files(self, orthonormal_env, tmp_path):
        cfg = small_cfg(seeds=(0, 1), T=40)
        results = run_campaign(cfg, env=orthonormal_env)
        paths = write_campaign_outputs(results, str(tmp_path))
        assert os.path.exists(paths["summary"])
        assert list_run_summaries(str(tmp_path)) == [paths["summary"]]
        averaged = averaged_curve(results, "cum_target_pulls")
        assert len(averaged) == 40
        assert averaged["value"].iloc[-1] == pytest.approx(
            np.mean([r.summary["target_pulls"] for r in results])
        )

    def test_summary_json_matches_canonical_text(self, orthonormal_env, tmp_path):
        result = run_single(small_cfg(T=40), 0, env=orthonormal_env)
        paths = write_run_outputs(result, str(tmp_path))
        with open(paths["summary"]) as f:
            assert f.read() == dumps(result.summary)

    def test_json_writer_converts_numpy_values(self, tmp_path):
        path = write_json_file(str(tmp_path / "nested" / "data.json"), {
            "count": np.int64(3), "rate": np.float64(0.25), "flag": np.bool_(True), "theta": np.array([0.5, -1.0]),
        })
        assert load_json_file(path) == {"count": 3, "rate": 0.25, "flag": True, "theta": [0.5, -1.0]}

    def test_missing_output_dir_lists_nothing(self, tmp_path):
        assert list_run_summaries(str(tmp_path / "absent")) == []


class TestExperiments:
    def test_noiseless_sweep_has_no_false_negatives(self, orthonormal_env):
        table = false_negative_sweep(small_cfg(), [5, 10], [0.0], reps=2, env=orthonormal_env)
        assert list(table.columns) == ["T1", "sigma", "reps", "false_negatives", "rate"]
        assert table["rate"].tolist() == [0.0, 0.0]

    def test_default_instance_noiseless_sweep(self):
        table = false_negative_sweep(small_cfg(), [5, 20], [0.0], reps=2)
        assert table["rate"].tolist() == [0.0, 0.0]

    def test_faint_target_pulled_in_first_round(self, faint_target):
        cfg = small_cfg(d=2, k=3, sigma=0.1, T=6, T1=5)
        result = run_single(cfg, (0, 0, 0, 0), env=faint_target)
        assert result.log_frame()["arm_index"].iloc[0] == faint_target.target_index
        assert result.summary["n_target_stage1"] >= 1

    def test_near_collinear_stage1_skips_target(self, near_collinear_attackable):
        env = near_collinear_attackable.with_sigma(0.1)
        table = false_negative_sweep(small_cfg(), [25, 100], [0.1], reps=3, env=near_collinear_attackable)
        assert table["rate"].tolist() == [1.0, 1.0]
        summary = run_single(small_cfg(sigma=0.1, T=101, T1=100), (0, 1, 0, 0), env=env).summary
        assert not summary["asserted_attackable"]
        assert summary["n_target_stage1"] == 0
        assert "never pulled" in summary["abort_reason"]

    def test_sweep_rejects_unattackable_instance(self, blocked_target):
        with pytest.raises(ConfigError):
            false_negative_sweep(small_cfg(), [5], [0.0], reps=1, env=blocked_target)

    def test_probe_reports_per_horizon_costs(self):
        cfg = small_cfg(
            attack="oracle", sigma=0.1, T=100, env_source="file", env_path=fixture_path("near_collinear_attackable.json"),
            allow_unnormalized=True,
        )
        report = sublinearity_probe(cfg, [50, 100])
        assert report.table["T"].tolist() == [50, 100]
        assert report.beta is not None
        assert set(report.to_dict()) == {"beta", "checkpoints"}

    def test_probe_needs_two_horizons(self):
        with pytest.raises(ConfigError):
            sublinearity_probe(small_cfg(), [100, 100])
