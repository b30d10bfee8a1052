"""
Oracle null-space attack and the clean passthrough.

The oracle adversary knows theta* and feeds every non-target pull the
reward of the attack parameter theta~ = theta*_par + theta_perp plus fresh
Gaussian noise. Target-arm rewards pass through untouched, which is sound
because theta~ and theta* give the target the same mean.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.attacks.ledger import CLEAN, ORACLE, AttackLedger
from src.utils.errors import CertificateError

logger = logging.getLogger(__name__)

MEAN_MATCH_TOL = 1e-8


def attack_noise(sigma, rng):
    """Fresh adversary noise from the attack stream."""
    return float(rng.attack_stream.normal(0.0, sigma)) if sigma > 0 else 0.0


@dataclass(frozen=True, eq=False)
class OracleAttackState:
    theta_tilde: np.ndarray
    attack_noise_sigma: float
    arms: np.ndarray
    target_index: int


def new_oracle_state(env, report, attack_noise_sigma):
    """
    Builds the oracle attack from a certified report.

    Args:
        env (EnvironmentSpec): Full environment.
        report (AttackabilityReport): Report computed from theta*'s projection.
        attack_noise_sigma (float): Standard deviation of the injected noise.

    Raises:
        CertificateError: If theta~ does not reproduce the target's true mean.
    """
    theta_tilde = report.theta_tilde
    gap = abs(float(env.target @ theta_tilde) - float(env.target @ env.theta_star))
    if gap > MEAN_MATCH_TOL:
        raise CertificateError(f"attack parameter shifts the target mean by {gap:.3e}")
    if not report.attackable:
        logger.warning(f"Oracle attack on an environment with epsilon* = {report.epsilon_star:.6f}")
    return OracleAttackState(
        theta_tilde=theta_tilde,
        attack_noise_sigma=float(attack_noise_sigma),
        arms=env.arms,
        target_index=env.target_index,
    )


def oracle_attack_intercept(state, arm, true_reward, rng):
    """
    Reward fed to the learner for one pull.

    Args:
        state (OracleAttackState): Attack parameters.
        arm (int): Pulled arm index.
        true_reward (float): Environment reward.
        rng (RngStreams): Noise comes from rng.attack_stream.

    Returns:
        float: The fed reward.
    """
    if arm == state.target_index:
        return true_reward
    return float(state.arms[arm] @ state.theta_tilde) + attack_noise(state.attack_noise_sigma, rng)


class NoAttack:
    """Passthrough interceptor for clean runs."""

    name = "none"

    def __init__(self, target_index):
        self.ledger = AttackLedger(target_index)

    def intercept(self, t, arm_index, true_reward):
        self.ledger.record(t, arm_index, true_reward, true_reward, CLEAN)
        return true_reward


class OracleAttack:
    """Oracle null-space attack with its ledger. Its whole cost counts as stage 2."""

    name = "oracle"

    def __init__(self, env, report, attack_noise_sigma, rng):
        self.state = new_oracle_state(env, report, attack_noise_sigma)
        self.report = report
        self.rng = rng
        self.ledger = AttackLedger(env.target_index)

    @property
    def theta_tilde(self):
        return self.state.theta_tilde

    def intercept(self, t, arm_index, true_reward):
        fed = oracle_attack_intercept(self.state, arm_index, true_reward, self.rng)
        self.ledger.record(t, arm_index, true_reward, fed, ORACLE)
        return fed
