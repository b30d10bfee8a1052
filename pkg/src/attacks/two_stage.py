"""
Two-stage null-space attack for an adversary that does not know theta*.

Stage 1 (rounds 1..T1) feeds every pull the reward of theta0, the unit-ball
parameter under which the target leads by the widest margin, while
collecting the true target rewards. At the boundary the adversary estimates
theta~_par from those rewards and reruns the attackability test with it.
Stage 2 feeds non-target pulls the reward of theta~ = theta~_par + theta~_perp
and, on the first target pull, compensates for the theta0 rewards the
learner saw in stage 1. Later target pulls pass through.

The adversary only holds a PublicEnvironment: arms and target, no theta*.

Usage:
    attack = TwoStageAttack(env.public_view(), T=10_000, T1=100, attack_noise_sigma=0.1, rng=rng)
    fed = attack.intercept(t, arm_index, true_reward)
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.attackability.certificate import ProjectedParam, attackability_index, solve_theta0
from src.attackability.solvers import DEFAULT_MAX_ITER
from src.attacks.ledger import ABORTED, STAGE1, STAGE2, AttackLedger
from src.attacks.oracle import attack_noise
from src.utils.errors import AdversaryStateCorrupt, InfeasibleNorm

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class TwoStageState:
    """
    Adversary state across the two stages.

    Attributes:
        phase: STAGE1, STAGE2 or ABORTED.
        T1: Length of stage 1.
        theta0: Stage-1 attack parameter.
        epsilon0_star: Margin of the target under theta0.
        n_target_stage1: Target pulls seen in stage 1.
        sum_target_rewards_stage1: Sum of their true rewards.
        theta_tilde_parallel: Estimated parallel component (stage 2 only).
        epsilon_tilde_star: Estimated attackability index (set at the boundary).
        theta_tilde: Stage-2 attack parameter (stage 2 only).
        compensation_done: Whether the first target pull in stage 2 happened.
        compensate: Whether that first pull carries the compensation.
        abort_reason: Diagnostic when phase is ABORTED.
    """

    public: object
    T: int
    T1: int
    attack_noise_sigma: float
    theta0: np.ndarray
    epsilon0_star: float
    phase: str = STAGE1
    n_target_stage1: int = 0
    sum_target_rewards_stage1: float = 0.0
    theta_tilde_parallel: ProjectedParam = None
    epsilon_tilde_star: float = None
    theta_tilde: np.ndarray = None
    compensation_done: bool = False
    compensate: bool = True
    abort_reason: str = None
    solver_max_iter: int = DEFAULT_MAX_ITER


def default_T1(T, victim):
    """ceil(T^(1/2)) against LinUCB, ceil(T^(2/5)) against RobustPhE."""
    exponent = 0.4 if victim == "robust_phe" else 0.5
    return int(math.ceil(T ** exponent))


def estimate_error_bound(n, R, delta):
    """
    Hoeffding radius sqrt(2 R^2 log(1/delta) / n) of the stage-1 mean estimate.

    Args:
        n (int): Number of target observations, at least 1.
        R (float): Sub-Gaussian noise scale.
        delta (float): Failure probability.

    Returns:
        float: The radius.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(np.sqrt(2.0 * R * R * np.log(1.0 / delta) / n))


def _abort(state, reason):
    state.phase = ABORTED
    state.abort_reason = reason
    logger.info(f"Adversary aborted: {reason}")
    return state


def two_stage_init(env_public, T, T1, attack_noise_sigma=0.0, compensate=True, solver_max_iter=DEFAULT_MAX_ITER):
    """
    Runs the initial attackability test from public information.

    Args:
        env_public (PublicEnvironment): Arms and target only.
        T (int): Horizon.
        T1 (int): Stage-1 length, 0 < T1 < T.
        attack_noise_sigma (float): Injected noise standard deviation.
        compensate (bool): Whether the first stage-2 target pull compensates.
        solver_max_iter (int): Solver budget for both attackability tests.

    Returns:
        TwoStageState: In STAGE1, or ABORTED when epsilon0* <= 0.
    """
    if not 0 < T1 < T:
        raise ValueError(f"need 0 < T1 < T, got T1={T1}, T={T}")
    theta0, epsilon0 = solve_theta0(env_public, max_iter=solver_max_iter)
    state = TwoStageState(
        public=env_public,
        T=T,
        T1=T1,
        attack_noise_sigma=float(attack_noise_sigma),
        theta0=theta0,
        epsilon0_star=epsilon0,
        compensate=compensate,
        solver_max_iter=solver_max_iter,
    )
    if epsilon0 <= 0.0:
        return _abort(state, f"initial test failed, epsilon0* = {epsilon0:.6g}")
    logger.debug(f"Stage 1 for {T1} rounds, epsilon0* = {epsilon0:.6f}")
    return state


def estimate_parallel(env_public, n, reward_sum):
    """
    theta~_par = (sum r / (n ||x~||^2)) x~ from stage-1 target rewards.

    Raises:
        AdversaryStateCorrupt: If the target was never pulled.
    """
    if n == 0:
        raise AdversaryStateCorrupt("target arm never pulled during stage 1")
    target = env_public.target
    mean = reward_sum / n
    return ProjectedParam(theta_parallel=(mean / float(target @ target)) * target, target_mean=mean)


def enter_stage2(state):
    """Boundary step: estimate theta~_par and rerun the attackability test."""
    try:
        proj = estimate_parallel(state.public, state.n_target_stage1, state.sum_target_rewards_stage1)
        report = attackability_index(state.public, proj, max_iter=state.solver_max_iter)
    except (AdversaryStateCorrupt, InfeasibleNorm) as e:
        return _abort(state, str(e))
    state.epsilon_tilde_star = report.epsilon_star
    if not report.attackable:
        return _abort(state, f"attackability test failed, epsilon~* = {report.epsilon_star:.6g}")
    state.theta_tilde_parallel = proj
    state.theta_tilde = report.theta_tilde
    state.phase = STAGE2
    logger.info(
        f"Stage 2 from round {state.T1 + 1}: epsilon~* = {report.epsilon_star:.6f}, "
        f"n(x~) = {state.n_target_stage1}"
    )
    return state


def two_stage_intercept(state, t, arm, true_reward, rng):
    """
    Reward fed to the learner in round t.

    Args:
        state (TwoStageState): Updated in place.
        t (int): Round number, starting at 1.
        arm (int): Pulled arm index.
        true_reward (float): Environment reward, seen by the adversary.
        rng (RngStreams): Noise comes from rng.attack_stream.

    Returns:
        float: The fed reward.
    """
    public = state.public
    x = public.arms[arm]
    is_target = arm == public.target_index

    if state.phase == ABORTED:
        return true_reward

    if state.phase == STAGE1:
        fed = float(x @ state.theta0) + attack_noise(state.attack_noise_sigma, rng)
        if is_target:
            state.n_target_stage1 += 1
            state.sum_target_rewards_stage1 += true_reward
        if t >= state.T1:
            enter_stage2(state)
        return fed

    if not is_target:
        return float(x @ state.theta_tilde) + attack_noise(state.attack_noise_sigma, rng)
    if state.compensate and not state.compensation_done:
        state.compensation_done = True
        shift = state.n_target_stage1 * float(x @ (state.theta_tilde - state.theta0))
        return shift + float(x @ state.theta_tilde) + attack_noise(state.attack_noise_sigma, rng)
    return true_reward


class TwoStageAttack:
    """Two-stage attack with its ledger."""

    name = "two_stage"

    def __init__(self, env_public, T, T1, attack_noise_sigma, rng, compensate=True, solver_max_iter=DEFAULT_MAX_ITER):
        self.state = two_stage_init(
            env_public,
            T,
            T1,
            attack_noise_sigma=attack_noise_sigma,
            compensate=compensate,
            solver_max_iter=solver_max_iter,
        )
        self.rng = rng
        self.ledger = AttackLedger(env_public.target_index)

    @property
    def theta_tilde(self):
        return self.state.theta_tilde

    @property
    def asserted_attackable(self):
        return self.state.phase == STAGE2

    def intercept(self, t, arm_index, true_reward):
        stage = self.state.phase
        fed = two_stage_intercept(self.state, t, arm_index, true_reward, self.rng)
        self.ledger.record(t, arm_index, true_reward, fed, stage)
        return fed
