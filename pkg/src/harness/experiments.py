"""
Desk-scale experiments built on the campaign runner.

false_negative_sweep measures how often the two-stage adversary wrongly
asserts "not attackable" on an attackable instance, per (T1, sigma) cell.
sublinearity_probe runs the same campaign at growing horizons and fits the
exponent beta of C(T) ~ T^beta.

External dependencies: numpy, pandas
"""

import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.attackability.certificate import attackability_index, project_parallel
from src.environment.instance_io import load_instance
from src.harness.campaign import run_campaign, run_single
from src.utils.common import get_fixtures_dir
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Normalized three-arm instance whose stage 1 pulls the target from round 1.
DEFAULT_SWEEP_INSTANCE = "faint_target.json"


def default_sweep_instance():
    return os.path.join(get_fixtures_dir(), DEFAULT_SWEEP_INSTANCE)


def false_negative_sweep(base_cfg, T1_values, sigma_values, reps, env=None):
    """
    False-negative rate of the two-stage attackability assertion.

    Every rep runs only T1 + 1 rounds, since the assertion happens at the
    stage boundary. Reps are seeded from the first config seed, the cell
    and the rep number.

    Args:
        base_cfg (ExperimentConfig): Victim, lambda, delta and instance source.
        T1_values (list[int]): Stage-1 lengths.
        sigma_values (list[float]): Noise levels, used for rewards and attack noise.
        reps (int): Repetitions per cell.
        env (EnvironmentSpec, optional): Instance; defaults to base_cfg's file
            or the shipped faint-target instance.

    Returns:
        pd.DataFrame: Columns T1, sigma, reps, false_negatives, rate.

    Raises:
        ConfigError: If the instance is not attackable.
    """
    if env is None:
        path = base_cfg.env_path if base_cfg.env_source == "file" else default_sweep_instance()
        env = load_instance(path, allow_unnormalized=True)
    report = attackability_index(env, project_parallel(env, env.theta_star), max_iter=base_cfg.solver_max_iter)
    if not report.attackable:
        raise ConfigError(f"sweep instance is not attackable (epsilon* = {report.epsilon_star:.6g})", field="env_path")

    base_seed = base_cfg.seeds[0]
    rows = []
    for i, T1 in enumerate(T1_values):
        for j, sigma in enumerate(sigma_values):
            cfg = base_cfg.with_overrides(attack="two_stage", T=T1 + 1, T1=T1, sigma=sigma)
            cell_env = env.with_sigma(sigma)
            negatives = 0
            for rep in range(reps):
                result = run_single(cfg, (base_seed, i, j, rep), env=cell_env)
                negatives += not result.summary["asserted_attackable"]
            rows.append(
                {"T1": T1, "sigma": sigma, "reps": reps, "false_negatives": negatives, "rate": negatives / reps}
            )
            logger.info(f"T1={T1}, sigma={sigma}: false-negative rate {negatives / reps:.3f}")
    return pd.DataFrame(rows, columns=["T1", "sigma", "reps", "false_negatives", "rate"])


@dataclass(eq=False)
class ProbeReport:
    """
    Attributes:
        table: One row per horizon with mean cost, cost per round and target fraction.
        beta: Fitted exponent of mean cost in T, None when some cost is 0.
        results: Campaign results per horizon.
    """

    table: pd.DataFrame
    beta: float
    results: dict

    def to_dict(self):
        return {"beta": self.beta, "checkpoints": self.table.to_dict(orient="records")}


def sublinearity_probe(cfg, checkpoints):
    """
    Runs cfg at every horizon in checkpoints and fits log C against log T.

    Args:
        cfg (ExperimentConfig): Campaign config; its T is replaced per checkpoint.
        checkpoints (list[int]): At least two horizons.

    Returns:
        ProbeReport: Per-horizon costs and the fitted exponent.
    """
    checkpoints = sorted(set(checkpoints))
    if len(checkpoints) < 2:
        raise ConfigError("need at least 2 distinct horizons", field="checkpoints")
    rows = []
    results = {}
    for T in checkpoints:
        run_cfg = cfg.with_overrides(T=T)
        results[T] = run_campaign(run_cfg)
        costs = [r.summary["total_cost"] for r in results[T]]
        fractions = [r.summary["target_pull_fraction"] for r in results[T]]
        mean_cost = float(np.mean(costs))
        rows.append(
            {
                "T": T,
                "mean_cost": mean_cost,
                "cost_per_round": mean_cost / T,
                "mean_target_fraction": float(np.mean(fractions)),
            }
        )
    table = pd.DataFrame(rows, columns=["T", "mean_cost", "cost_per_round", "mean_target_fraction"])
    beta = None
    if (table["mean_cost"] > 0).all():
        beta = float(np.polyfit(np.log(table["T"]), np.log(table["mean_cost"]), 1)[0])
        logger.info(f"Fitted cost exponent beta = {beta:.3f}")
    return ProbeReport(table=table, beta=beta, results=results)
