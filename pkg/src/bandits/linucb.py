"""
LinUCB with ridge regression.

The learner keeps A_t = lambda I + sum x x^T and b_t = sum x r, estimates
theta_hat = A_t^{-1} b_t and pulls the arm maximizing

    x^T theta_hat + alpha_t ||x||_{A_t^{-1}},
    alpha_t = R sqrt(d log((1 + t/lambda) / delta)) + sqrt(lambda).

R is the sub-Gaussian noise scale and defaults to 1.

External dependencies: numpy, scipy
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.utils.numerics import cholesky_factor, quad_norm, quad_norms, rank1_update, spd_solve

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1.0
DEFAULT_DELTA = 0.01
CB_RTOL = 1e-9


@dataclass(frozen=True)
class ArmChoice:
    arm_index: int
    ucb_scores: tuple = ()


@dataclass(eq=False)
class RidgeState:
    """
    Ridge-regression state of a LinUCB learner.

    Attributes:
        A: Design matrix, lambda I plus the outer products of pulled arms.
        b: Reward-weighted sum of pulled arms.
        theta_hat: Current estimate A^{-1} b.
        lam: Ridge parameter.
        t: Number of updates so far.
        delta: Confidence level.
        alpha_t: Current exploration scale.
        noise_scale: Sub-Gaussian scale R in alpha_t.
    """

    A: np.ndarray
    b: np.ndarray
    theta_hat: np.ndarray
    lam: float
    t: int
    delta: float
    alpha_t: float
    noise_scale: float = 1.0
    factor: tuple = field(default=None, repr=False)

    @property
    def d(self):
        return self.b.shape[0]


def exploration_scale(d, t, lam, delta, noise_scale=1.0):
    """alpha_t = R sqrt(d log((1 + t/lambda)/delta)) + sqrt(lambda)."""
    return noise_scale * float(np.sqrt(d * np.log((1.0 + t / lam) / delta))) + float(np.sqrt(lam))


def new_ridge_state(d, lam=DEFAULT_LAMBDA, delta=DEFAULT_DELTA, noise_scale=1.0):
    """Fresh state with A = lambda I and theta_hat = 0."""
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    A = lam * np.eye(d)
    return RidgeState(
        A=A,
        b=np.zeros(d),
        theta_hat=np.zeros(d),
        lam=float(lam),
        t=0,
        delta=float(delta),
        alpha_t=exploration_scale(d, 0, lam, delta, noise_scale),
        noise_scale=float(noise_scale),
        factor=cholesky_factor(A),
    )


def ucb_scores(state, arms):
    """Upper confidence bound of every arm."""
    arms = np.asarray(arms, dtype=np.float64)
    widths = quad_norms(arms, state.A, inverse=True, factor=state.factor)
    return arms @ state.theta_hat + state.alpha_t * widths


def linucb_choose(state, arms):
    """
    Picks the arm with the highest upper confidence bound.

    Args:
        state (RidgeState): Learner state.
        arms (np.ndarray): (k, d) arm vectors.

    Returns:
        ArmChoice: The chosen arm (lowest index on ties) and all scores.
    """
    scores = ucb_scores(state, arms)
    return ArmChoice(arm_index=int(np.argmax(scores)), ucb_scores=tuple(float(s) for s in scores))


def linucb_update(state, arm, reward):
    """
    Folds one observation into the ridge state.

    Args:
        state (RidgeState): Updated in place.
        arm (np.ndarray): Pulled arm vector.
        reward (float): Observed (possibly corrupted) reward.

    Returns:
        RidgeState: The same state object.
    """
    arm = np.asarray(arm, dtype=np.float64)
    state.A = rank1_update(state.A, arm)
    state.b = state.b + reward * arm
    state.factor = cholesky_factor(state.A)
    state.theta_hat = spd_solve(None, state.b, factor=state.factor)
    state.t += 1
    state.alpha_t = exploration_scale(state.d, state.t, state.lam, state.delta, state.noise_scale)
    return state


def linucb_lambda_for_unit_ball(data_scale_hint=None):
    """
    Ridge parameter meant to keep ||theta_hat_t|| < 1.

    No constructive rule exists, so this returns the default and the
    learner's unit_ball_violations monitor records whether the norm bound
    actually held.

    Args:
        data_scale_hint (float, optional): Unused scale hint.

    Returns:
        float: 1.0
    """
    return DEFAULT_LAMBDA


class LinUCB:
    """
    LinUCB victim over a fixed arm set.

    Besides the ridge state it tracks pull counts, how often the bound
    alpha_t ||x||_{A^{-1}} <= alpha_t / sqrt(n) failed for the pulled arm,
    and how often ||theta_hat_t|| reached 1.
    """

    name = "linucb"

    def __init__(self, arms, lam=DEFAULT_LAMBDA, delta=DEFAULT_DELTA, noise_scale=1.0):
        self.arms = np.asarray(arms, dtype=np.float64)
        self.state = new_ridge_state(self.arms.shape[1], lam=lam, delta=delta, noise_scale=noise_scale)
        self.pull_counts = np.zeros(self.arms.shape[0], dtype=int)
        self.cb_violations = 0
        self.unit_ball_violations = 0

    @property
    def phase_label(self):
        return ""

    def choose(self):
        return linucb_choose(self.state, self.arms)

    def confidence_width(self, arm_index):
        """alpha_t ||x||_{A_t^{-1}} for one arm."""
        return self.state.alpha_t * quad_norm(
            self.arms[arm_index], self.state.A, inverse=True, factor=self.state.factor
        )

    def update(self, arm_index, reward):
        linucb_update(self.state, self.arms[arm_index], reward)
        self.pull_counts[arm_index] += 1
        n = self.pull_counts[arm_index]
        bound = self.state.alpha_t / np.sqrt(n)
        if self.confidence_width(arm_index) > bound * (1.0 + CB_RTOL):
            self.cb_violations += 1
        if np.linalg.norm(self.state.theta_hat) >= 1.0:
            self.unit_ball_violations += 1
