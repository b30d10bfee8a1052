"""
Random environment generators.

sample_environment draws the experimental family: per-dimension variances
from U(0,1) shared by all arms, Gaussian arm coordinates, unit-norm arms and
a unit-norm Gaussian theta*. sample_orthonormal_environment draws a
context-free multi-armed bandit embedded in R^d. sample_attackable_environment
re-samples until the drawn target is attackable.

Usage:
    rng = RngStreams(7)
    sample = sample_attackable_environment(10, 30, 0.1, rng)
    env = sample.env

External dependencies: numpy, scipy
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from src.attackability.certificate import (
    AttackabilityReport,
    attackability_index,
    project_parallel,
)
from src.attackability.solvers import DEFAULT_MAX_ITER
from src.environment.model import EnvironmentSpec
from src.utils.errors import ExhaustedTries, InvalidEnvironment

logger = logging.getLogger(__name__)

DEFAULT_MAX_TRIES = 1000


def _unit_rows(matrix, gen):
    """Normalizes rows, redrawing the (measure-zero) all-zero ones."""
    norms = np.linalg.norm(matrix, axis=1)
    while np.any(norms == 0.0):
        zero = norms == 0.0
        matrix[zero] = gen.normal(size=(int(zero.sum()), matrix.shape[1]))
        norms = np.linalg.norm(matrix, axis=1)
    return matrix / norms[:, None]


def sample_environment(d, k, sigma, rng, target_index=None):
    """
    Draws one environment from the experimental family.

    Args:
        d (int): Context dimension, at least 2.
        k (int): Number of arms, at least 2.
        sigma (float): Reward noise standard deviation.
        rng (RngStreams): Draws come from rng.sampler_stream.
        target_index (int, optional): Fixed target; drawn uniformly otherwise.

    Returns:
        EnvironmentSpec: A unit-norm environment.
    """
    if d < 2 or k < 2:
        raise InvalidEnvironment(f"need d >= 2 and k >= 2, got d={d}, k={k}")
    gen = rng.sampler_stream
    variances = gen.uniform(0.0, 1.0, size=d)
    arms = gen.normal(size=(k, d)) * np.sqrt(variances)[None, :]
    arms = _unit_rows(arms, gen)
    theta = _unit_rows(gen.normal(size=(1, d)), gen)[0]
    if target_index is None:
        target_index = int(gen.integers(k))
    return EnvironmentSpec(arms=arms, target_index=target_index, theta_star=theta, noise_sigma=sigma)


def sample_orthonormal_environment(d, k, sigma, rng, target_index=None):
    """
    Draws k orthonormal arms in R^d with non-negative arm means.

    The arms are the first k rows of a Haar-random orthogonal matrix, and
    theta* = sum_a mu_a x_a for a unit vector mu >= 0, so the mean reward of
    arm a is mu_a.

    Args:
        d (int): Context dimension.
        k (int): Number of arms, 2 <= k <= d.
        sigma (float): Reward noise standard deviation.
        rng (RngStreams): Draws come from rng.sampler_stream.
        target_index (int, optional): Fixed target; drawn uniformly otherwise.

    Returns:
        EnvironmentSpec: An orthonormal environment.
    """
    if not 2 <= k <= d:
        raise InvalidEnvironment(f"orthonormal arms need 2 <= k <= d, got d={d}, k={k}")
    gen = rng.sampler_stream
    basis = ortho_group.rvs(d, random_state=gen) if d > 1 else np.eye(1)
    arms = basis[:k]
    means = _unit_rows(np.abs(gen.normal(size=(1, k))), gen)[0]
    theta = arms.T @ means
    if target_index is None:
        target_index = int(gen.integers(k))
    return EnvironmentSpec(arms=arms, target_index=target_index, theta_star=theta, noise_sigma=sigma)


@dataclass(frozen=True)
class AttackableSample:
    env: EnvironmentSpec
    report: AttackabilityReport
    tries: int


def sample_attackable_environment(
    d,
    k,
    sigma,
    rng,
    max_tries=DEFAULT_MAX_TRIES,
    sampler=sample_environment,
    solver_max_iter=DEFAULT_MAX_ITER,
):
    """
    Re-samples environments, each with a fresh uniform target, until one is attackable.

    Args:
        d (int): Context dimension.
        k (int): Number of arms.
        sigma (float): Reward noise standard deviation.
        rng (RngStreams): Random streams; only sampler_stream is consumed.
        max_tries (int): Rejection budget, at least 1.
        sampler (callable): Environment generator with sample_environment's signature.
        solver_max_iter (int): Iteration budget for the attackability solver.

    Returns:
        AttackableSample: The accepted environment, its report and the number of tries.

    Raises:
        ExhaustedTries: If max_tries environments were all rejected.
    """
    if max_tries < 1:
        raise InvalidEnvironment(f"max_tries must be >= 1, got {max_tries}")
    for tries in range(1, max_tries + 1):
        env = sampler(d, k, sigma, rng)
        report = attackability_index(
            env, project_parallel(env, env.theta_star), max_iter=solver_max_iter
        )
        if report.attackable:
            logger.info(
                f"Accepted environment after {tries} tries "
                f"(target {env.target_index}, epsilon* = {report.epsilon_star:.6f})"
            )
            return AttackableSample(env=env, report=report, tries=tries)
        logger.debug(f"Try {tries}: epsilon* = {report.epsilon_star:.6f}, rejected")
    raise ExhaustedTries(max_tries)
