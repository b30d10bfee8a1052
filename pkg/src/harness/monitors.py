"""
Run-time checks on the learner under attack.

The ridge robustness bound says that at every round t of stage 2

    ||theta~ - theta_hat_t||_{A_t} <= alpha_t + S'_t / sqrt(lambda) + gamma sqrt(t),

with S'_t the cumulative corruption on non-target arms and gamma the
largest corruption seen on the target arm. The harness records checkpoints
after the learner's update; robustness_monitor evaluates them afterwards.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.utils.numerics import quad_norm

logger = logging.getLogger(__name__)

BOUND_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class RobustnessCheckpoint:
    t: int
    A: np.ndarray
    theta_hat: np.ndarray
    alpha_t: float
    theta_tilde: np.ndarray
    nontarget_corruption: float
    gamma_realized: float
    lam: float

    def lhs(self):
        return quad_norm(self.theta_tilde - self.theta_hat, self.A)

    def rhs(self):
        return self.alpha_t + self.nontarget_corruption / np.sqrt(self.lam) + self.gamma_realized * np.sqrt(self.t)


def checkpoint_rounds(T1, T):
    """Rounds T1 + 1, 2 T1, 3 T1, ... and T."""
    rounds = {T1 + 1, T}
    rounds.update(range(2 * T1, T + 1, T1))
    return sorted(r for r in rounds if T1 < r <= T)


def robustness_monitor(checkpoints):
    """
    Evaluates the robustness bound at every checkpoint.

    Args:
        checkpoints (list[RobustnessCheckpoint]): Recorded checkpoints.

    Returns:
        list[dict]: One {t, lhs, rhs} entry per violated checkpoint.
    """
    violations = []
    for cp in checkpoints:
        lhs, rhs = cp.lhs(), cp.rhs()
        if lhs > rhs * (1.0 + BOUND_RTOL):
            violations.append({"t": cp.t, "lhs": lhs, "rhs": float(rhs)})
    if violations:
        logger.warning(f"Robustness bound violated at {len(violations)} of {len(checkpoints)} checkpoints")
    return violations
