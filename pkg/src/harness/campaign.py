"""
Campaign runner: environment, victim and adversary wired round by round.

Each round the victim chooses an arm, the environment draws the true
reward, the adversary's interceptor produces the fed reward and the victim
updates on it. Seeds fan out over a thread pool; results come back in seed
order and are fully determined by (config, seed).

Usage:
    cfg = ExperimentConfig(T=10_000, victim="linucb", attack="two_stage")
    results = run_campaign(cfg)

External dependencies: numpy
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.attackability.certificate import attackability_index, project_parallel
from src.attacks.ledger import ORACLE, STAGE1, STAGE2
from src.attacks.oracle import NoAttack, OracleAttack
from src.attacks.two_stage import TwoStageAttack, estimate_error_bound
from src.bandits.linucb import LinUCB
from src.bandits.robust_phe import RobustPhE
from src.environment.instance_io import load_instance
from src.environment.model import RngStreams, draw_reward
from src.environment.sampling import (
    sample_attackable_environment,
    sample_environment,
    sample_orthonormal_environment,
)
from src.harness.config import RunResult
from src.harness.monitors import RobustnessCheckpoint, checkpoint_rounds, robustness_monitor

logger = logging.getLogger(__name__)

SAMPLER_FUNCTIONS = {
    "gaussian": sample_environment,
    "orthonormal": sample_orthonormal_environment,
}


def build_environment(cfg, rng):
    """
    Creates the environment of one run.

    Returns:
        tuple: (env, true AttackabilityReport, number of sampling tries).
    """
    sampler = SAMPLER_FUNCTIONS[cfg.sampler]
    if cfg.env_source == "sample_attackable":
        sample = sample_attackable_environment(
            cfg.d,
            cfg.k,
            cfg.sigma,
            rng,
            max_tries=cfg.max_tries,
            sampler=sampler,
            solver_max_iter=cfg.solver_max_iter,
        )
        return sample.env, sample.report, sample.tries
    if cfg.env_source == "file":
        env = load_instance(cfg.env_path, allow_unnormalized=cfg.allow_unnormalized)
        if env.noise_sigma != cfg.sigma:
            logger.warning(f"Config sigma {cfg.sigma} replaces sigma {env.noise_sigma} of {cfg.env_path}")
            env = env.with_sigma(cfg.sigma)
    else:
        env = sampler(cfg.d, cfg.k, cfg.sigma, rng)
    report = attackability_index(env, project_parallel(env, env.theta_star), max_iter=cfg.solver_max_iter)
    return env, report, 1


def build_victim(cfg, env):
    noise_scale = cfg.resolved_noise_scale()
    if cfg.victim == "robust_phe":
        return RobustPhE(env.arms, delta=cfg.delta, noise_scale=noise_scale)
    return LinUCB(env.arms, lam=cfg.lam, delta=cfg.delta, noise_scale=noise_scale)


def build_attack(cfg, env, report, rng):
    if cfg.attack == "oracle":
        return OracleAttack(env, report, attack_noise_sigma=env.noise_sigma, rng=rng)
    if cfg.attack == "two_stage":
        return TwoStageAttack(
            env.public_view(),
            T=cfg.T,
            T1=cfg.resolved_T1(),
            attack_noise_sigma=env.noise_sigma,
            rng=rng,
            compensate=cfg.resolved_compensate(),
            solver_max_iter=cfg.solver_max_iter,
        )
    return NoAttack(env.target_index)


def _asserted_attackable(cfg, attack, report):
    if cfg.attack == "two_stage":
        return attack.asserted_attackable
    if cfg.attack == "oracle":
        return report.attackable
    return None


def run_single(cfg, seed, env=None):
    """
    Runs one seed of a campaign.

    Args:
        cfg (ExperimentConfig): The campaign config.
        seed (int or sequence of int): Master seed.
        env (EnvironmentSpec, optional): Fixed environment; skips env_source.

    Returns:
        RunResult: Summary, round ledger and robustness checkpoints.
    """
    rng = RngStreams(seed)
    if env is None:
        env, report, tries = build_environment(cfg, rng)
    else:
        report = attackability_index(env, project_parallel(env, env.theta_star), max_iter=cfg.solver_max_iter)
        tries = 1
    victim = build_victim(cfg, env)
    attack = build_attack(cfg, env, report, rng)

    means = env.mean_rewards()
    best_arm = int(np.argmax(means))
    best_mean = float(means[best_arm])
    two_stage_linucb = cfg.attack == "two_stage" and cfg.victim == "linucb"
    checkpoint_set = set(checkpoint_rounds(cfg.resolved_T1(), cfg.T)) if two_stage_linucb else set()

    checkpoints = []
    regret_true = 0.0
    regret_tilde = 0.0
    tilde_rounds = 0
    best_pulls = 0
    for t in range(1, cfg.T + 1):
        arm = victim.choose().arm_index
        draw = draw_reward(env, arm, rng)
        theta_tilde = attack.theta_tilde if cfg.attack != "none" else None
        fed = attack.intercept(t, arm, draw.realized)
        victim.update(arm, fed)

        regret_true += best_mean - float(means[arm])
        best_pulls += arm == best_arm
        if theta_tilde is not None:
            tilde_means = env.arms @ theta_tilde
            regret_tilde += float(tilde_means.max() - tilde_means[arm])
            tilde_rounds += 1
        if t in checkpoint_set and attack.theta_tilde is not None:
            checkpoints.append(
                RobustnessCheckpoint(
                    t=t,
                    A=victim.state.A.copy(),
                    theta_hat=victim.state.theta_hat.copy(),
                    alpha_t=victim.state.alpha_t,
                    theta_tilde=attack.theta_tilde,
                    nontarget_corruption=attack.ledger.nontarget_corruption,
                    gamma_realized=attack.ledger.gamma_realized,
                    lam=cfg.lam,
                )
            )

    summary = summarize(cfg, seed, env, report, tries, victim, attack, best_arm, best_pulls)
    summary["regret_vs_theta_star"] = regret_true
    summary["regret_vs_theta_tilde"] = regret_tilde if tilde_rounds else None
    violations = robustness_monitor(checkpoints)
    summary["bound_checkpoints"] = len(checkpoints)
    summary["bound_violations"] = len(violations)
    logger.info(
        f"Seed {seed}: target {summary['target_pulls']}/{cfg.T} pulls, "
        f"cost {summary['total_cost']:.2f}, asserted attackable {summary['asserted_attackable']}"
    )
    return RunResult(
        config_hash=cfg.config_hash(),
        seed=seed,
        summary=summary,
        ledger=attack.ledger,
        checkpoints=checkpoints,
    )


def summarize(cfg, seed, env, report, tries, victim, attack, best_arm, best_pulls):
    """JSON-serializable metrics of a finished run."""
    ledger = attack.ledger
    summary = {
        "config_hash": cfg.config_hash(),
        "seed": seed if isinstance(seed, int) else list(seed),
        "victim": cfg.victim,
        "attack": cfg.attack,
        "T": cfg.T,
        "T1": cfg.resolved_T1() if cfg.attack == "two_stage" else None,
        "d": env.d,
        "k": env.k,
        "sigma": env.noise_sigma,
        "target_index": env.target_index,
        "best_arm": best_arm,
        "best_arm_pulls": int(best_pulls),
        "best_arm_fraction": best_pulls / cfg.T,
        "target_pulls": ledger.target_pulls,
        "target_pull_fraction": ledger.target_pulls / cfg.T,
        "total_cost": ledger.total_cost,
        "stage1_cost": ledger.stage_cost(STAGE1),
        "stage2_cost": ledger.stage_cost(STAGE2, ORACLE),
        "nontarget_corruption": ledger.nontarget_corruption,
        "gamma_realized": ledger.gamma_realized,
        "asserted_attackable": _asserted_attackable(cfg, attack, report),
        "true_attackable": report.attackable,
        "epsilon_star": report.epsilon_star,
        "epsilon_tilde_star": None,
        "environment_tries": tries,
        "cb_violations": getattr(victim, "cb_violations", None),
        "unit_ball_violations": getattr(victim, "unit_ball_violations", None),
        "final_active_arms": getattr(victim, "active_arms", None),
    }
    if cfg.attack == "two_stage":
        state = attack.state
        n = state.n_target_stage1
        summary.update(
            {
                "epsilon_tilde_star": state.epsilon_tilde_star,
                "epsilon0_star": state.epsilon0_star,
                "n_target_stage1": n,
                "estimate_radius": estimate_error_bound(n, cfg.resolved_noise_scale(), cfg.delta) if n else None,
                "aborted": state.phase != STAGE2,
                "abort_reason": state.abort_reason,
                "compensation_done": state.compensation_done,
            }
        )
    return summary


def run_campaign(cfg, env=None):
    """
    Runs every seed of cfg, in parallel threads.

    Args:
        cfg (ExperimentConfig): The campaign config.
        env (EnvironmentSpec, optional): Fixed environment shared by all seeds.

    Returns:
        list[RunResult]: One result per seed, in seed order.
    """
    workers = min(cfg.resolved_workers(), len(cfg.seeds))
    logger.info(
        f"Campaign {cfg.config_hash()}: {cfg.victim} vs {cfg.attack}, T={cfg.T}, "
        f"{len(cfg.seeds)} seeds on {workers} workers"
    )
    if workers <= 1:
        return [run_single(cfg, seed, env=env) for seed in cfg.seeds]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda seed: run_single(cfg, seed, env=env), cfg.seeds))
