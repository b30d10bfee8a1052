"""
Campaign-scale checks at the experimental sizes (d=10, k=30, sigma=0.1, T=10^4).

Run with: pytest -m slow
"""

import numpy as np
import pytest

from src.attackability.certificate import attackability_index, project_parallel
from src.bandits.robust_phe import RobustPhE
from src.environment.instance_io import load_instance
from src.environment.model import RngStreams, draw_reward
from src.environment.sampling import sample_environment, sample_orthonormal_environment
from src.harness.campaign import run_campaign
from src.harness.config import ExperimentConfig
from src.harness.experiments import false_negative_sweep
from tests.conftest import FAST_SOLVER_ITER, fixture_path

pytestmark = pytest.mark.slow

SEEDS = tuple(range(10))


def campaign(**overrides):
    cfg = ExperimentConfig(seeds=SEEDS, solver_max_iter=FAST_SOLVER_ITER, **overrides)
    return run_campaign(cfg)


def count(results, predicate):
    return sum(bool(predicate(r.summary)) for r in results)


@pytest.fixture(scope="module")
def oracle_linucb():
    return campaign(victim="linucb", attack="oracle")


@pytest.fixture(scope="module")
def two_stage_linucb():
    return campaign(victim="linucb", attack="two_stage", T1=100)


@pytest.fixture(scope="module")
def two_stage_robust_phe():
    return campaign(victim="robust_phe", attack="two_stage", T1=40)


@pytest.fixture(scope="module")
def clean_linucb():
    return campaign(victim="linucb", attack="none")


def test_orthonormal_instances_attackable_for_every_target():
    gen = np.random.default_rng(0)
    for i in range(100):
        d = int(gen.integers(2, 9))
        k = int(gen.integers(2, d + 1))
        env = sample_orthonormal_environment(d, k, 0.1, RngStreams([3, i]))
        for target in range(k):
            retargeted = env.with_target(target)
            report = attackability_index(
                retargeted, project_parallel(retargeted, retargeted.theta_star), max_iter=500
            )
            assert report.attackable
            assert report.epsilon_star > 0


class TestOracleAttackOnLinUCB:
    def test_target_pulled_most_rounds(self, oracle_linucb):
        assert count(oracle_linucb, lambda s: s["target_pull_fraction"] >= 0.9) >= 8

    def test_cost_per_round_decreases(self, oracle_linucb):
        improving = 0
        for result in oracle_linucb:
            curve = dict(result.ledger.curve("cum_cost"))
            improving += curve[10_000] / 10_000 < curve[2_500] / 2_500
        assert improving >= 8

    def test_cost_growth_is_sublinear(self, oracle_linucb):
        early = np.mean([dict(r.ledger.curve("cum_cost"))[2_500] for r in oracle_linucb])
        late = np.mean([r.summary["total_cost"] for r in oracle_linucb])
        beta = np.log(late / early) / np.log(4.0)
        assert beta < 1.0


class TestTwoStageAttackOnLinUCB:
    def test_assertion_is_correct(self, two_stage_linucb):
        assert count(two_stage_linucb, lambda s: s["asserted_attackable"] == s["true_attackable"]) >= 0.95 * len(SEEDS)

    def test_target_pulled_most_rounds(self, two_stage_linucb):
        assert count(two_stage_linucb, lambda s: s["target_pull_fraction"] >= 0.8) >= 8

    def test_stage1_cost_is_per_round(self, two_stage_linucb):
        for result in two_stage_linucb:
            frame = result.log_frame()
            stage1 = frame[frame["phase"] == "stage1"]
            assert len(stage1) == 100
            assert result.summary["stage1_cost"] == pytest.approx(stage1["delta"].abs().sum(), rel=1e-9)

    def test_robustness_bound_holds(self, two_stage_linucb):
        assert sum(r.summary["bound_checkpoints"] for r in two_stage_linucb) > 0
        assert all(r.summary["bound_violations"] == 0 for r in two_stage_linucb)

    def test_confidence_bound_holds(self, two_stage_linucb, oracle_linucb, clean_linucb):
        for results in (two_stage_linucb, oracle_linucb, clean_linucb):
            assert all(r.summary["cb_violations"] == 0 for r in results)


class TestTwoStageAttackOnRobustPhE:
    def test_costs_more_than_linucb(self, two_stage_robust_phe, two_stage_linucb):
        pairs = zip(two_stage_robust_phe, two_stage_linucb)
        assert sum(a.summary["total_cost"] >= b.summary["total_cost"] for a, b in pairs) >= 7

    def test_target_pulled_majority_of_rounds(self, two_stage_robust_phe):
        assert count(two_stage_robust_phe, lambda s: s["target_pull_fraction"] > 0.5) >= 7


class TestCleanVictims:
    def test_linucb_finds_best_arm(self, clean_linucb):
        assert np.median([r.summary["best_arm_fraction"] for r in clean_linucb]) >= 0.8
        assert all(r.summary["total_cost"] == 0.0 for r in clean_linucb)

    def test_robust_phe_keeps_best_arm(self):
        kept = 0
        for seed in range(10):
            env = sample_environment(2, 5, 0.1, RngStreams(seed))
            victim = RobustPhE(env.arms, noise_scale=0.1)
            rng = RngStreams(seed)
            for _ in range(2_000):
                arm = victim.choose().arm_index
                victim.update(arm, draw_reward(env, arm, rng).realized)
            kept += env.best_arm() in victim.active_arms
        assert kept >= 9


class TestFalseNegativeSweep:
    @pytest.fixture(scope="class")
    def faint_target_table(self):
        base = ExperimentConfig(d=2, k=3, seeds=(0,), solver_max_iter=FAST_SOLVER_ITER)
        table = false_negative_sweep(base, [5, 10, 20, 100], [0.1, 0.3], reps=100)
        return table.set_index(["T1", "sigma"])["rate"]

    def test_rate_small_with_long_first_stage(self, faint_target_table):
        assert faint_target_table[(100, 0.1)] <= 0.05

    def test_noise_raises_rate_with_short_first_stage(self, faint_target_table):
        for T1 in (5, 10, 20):
            assert faint_target_table[(T1, 0.3)] >= faint_target_table[(T1, 0.1)]

    def test_near_collinear_stage1_never_observes_target(self):
        env = load_instance(fixture_path("near_collinear_attackable.json"), allow_unnormalized=True)
        base = ExperimentConfig(d=2, k=3, seeds=(0,), solver_max_iter=FAST_SOLVER_ITER)
        table = false_negative_sweep(base, [25, 100], [0.1], reps=20, env=env)
        assert table["rate"].tolist() == [1.0, 1.0]
