"""
Bandit environment model: arm geometry, ground truth and reward draws.

Rewards follow r = x_a^T theta* + eta with Gaussian eta of standard
deviation noise_sigma. The adversary only ever sees a PublicEnvironment
(arms and target), never theta*.
"""

from dataclasses import dataclass

import numpy as np

from src.utils.errors import IndexOutOfRange, InvalidEnvironment
from src.utils.numerics import as_vector

NORM_TOL = 1e-9


def _frozen(array):
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PublicEnvironment:
    """What an adversary without ground truth is allowed to know."""

    arms: np.ndarray
    target_index: int

    def __post_init__(self):
        arms = np.asarray(self.arms, dtype=np.float64)
        if arms.ndim != 2:
            raise InvalidEnvironment(f"arms must be a (k, d) matrix, got shape {arms.shape}")
        if arms.shape[0] < 2:
            raise InvalidEnvironment(f"need at least 2 arms, got {arms.shape[0]}")
        if not np.all(np.isfinite(arms)):
            raise InvalidEnvironment("arms have non-finite entries")
        if not 0 <= int(self.target_index) < arms.shape[0]:
            raise InvalidEnvironment(
                f"target_index {self.target_index} outside [0, {arms.shape[0]})"
            )
        object.__setattr__(self, "arms", _frozen(arms))
        object.__setattr__(self, "target_index", int(self.target_index))

    @property
    def k(self):
        return self.arms.shape[0]

    @property
    def d(self):
        return self.arms.shape[1]

    @property
    def target(self):
        """Context vector of the target arm."""
        return self.arms[self.target_index]

    def non_target_indices(self):
        return [a for a in range(self.k) if a != self.target_index]


@dataclass(frozen=True, eq=False)
class EnvironmentSpec(PublicEnvironment):
    """
    Full ground truth of a linear bandit environment.

    Attributes:
        arms: (k, d) context vectors.
        target_index: The arm the adversary wants pulled.
        theta_star: True parameter.
        noise_sigma: Gaussian reward noise standard deviation.
        unnormalized: Waives the unit-norm invariant (hand-built fixtures).
    """

    theta_star: np.ndarray = None
    noise_sigma: float = 0.0
    unnormalized: bool = False

    def __post_init__(self):
        super().__post_init__()
        if self.theta_star is None:
            raise InvalidEnvironment("theta_star is required")
        try:
            theta = as_vector(self.theta_star, self.d)
        except ValueError as e:
            raise InvalidEnvironment(f"theta_star: {e}") from e
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise InvalidEnvironment(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        object.__setattr__(self, "theta_star", _frozen(theta))
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))
        if not self.unnormalized:
            offending = norm_violations(self)
            if offending:
                raise InvalidEnvironment(
                    f"vectors exceed unit norm: {', '.join(offending)} "
                    "(use allow-unnormalized to load hand-built fixtures)"
                )

    def public_view(self):
        """Strips the ground truth for handing to an adversary."""
        return PublicEnvironment(arms=self.arms, target_index=self.target_index)

    def mean_rewards(self, theta=None):
        """Expected reward of every arm under theta (theta* by default)."""
        theta = self.theta_star if theta is None else np.asarray(theta, dtype=np.float64)
        return self.arms @ theta

    def best_arm(self):
        return int(np.argmax(self.mean_rewards()))

    def with_target(self, target_index):
        return EnvironmentSpec(
            arms=self.arms,
            target_index=target_index,
            theta_star=self.theta_star,
            noise_sigma=self.noise_sigma,
            unnormalized=self.unnormalized,
        )

    def with_sigma(self, noise_sigma):
        return EnvironmentSpec(
            arms=self.arms,
            target_index=self.target_index,
            theta_star=self.theta_star,
            noise_sigma=noise_sigma,
            unnormalized=self.unnormalized,
        )

    def with_theta(self, theta_star):
        return EnvironmentSpec(
            arms=self.arms,
            target_index=self.target_index,
            theta_star=theta_star,
            noise_sigma=self.noise_sigma,
            unnormalized=self.unnormalized,
        )

    def without_arm(self, arm_index):
        """Drops a non-target arm, keeping the same target vector."""
        if arm_index == self.target_index:
            raise InvalidEnvironment("cannot drop the target arm")
        keep = [a for a in range(self.k) if a != arm_index]
        return EnvironmentSpec(
            arms=self.arms[keep],
            target_index=keep.index(self.target_index),
            theta_star=self.theta_star,
            noise_sigma=self.noise_sigma,
            unnormalized=self.unnormalized,
        )


def norm_violations(env):
    """
    Names the vectors of env whose Euclidean norm exceeds 1.

    Returns:
        list[str]: Labels like 'arms[3]' or 'theta_star'.
    """
    offending = [
        f"arms[{a}]" for a, n in enumerate(np.linalg.norm(env.arms, axis=1)) if n > 1.0 + NORM_TOL
    ]
    if np.linalg.norm(env.theta_star) > 1.0 + NORM_TOL:
        offending.append("theta_star")
    return offending


@dataclass(frozen=True)
class RewardDraw:
    arm_index: int
    mean: float
    noise: float
    realized: float


class RngStreams:
    """
    Three independent generators spawned from one master seed.

    env_stream drives reward noise, attack_stream the adversary's injected
    noise, sampler_stream environment generation. A fixed master seed gives
    bitwise-identical runs.
    """

    def __init__(self, seed):
        self.seed = seed
        env_seq, attack_seq, sampler_seq = np.random.SeedSequence(seed).spawn(3)
        self.env_stream = np.random.default_rng(env_seq)
        self.attack_stream = np.random.default_rng(attack_seq)
        self.sampler_stream = np.random.default_rng(sampler_seq)


def draw_reward(env, arm, rng):
    """
    Draws a reward for one pull.

    Args:
        env (EnvironmentSpec): The environment.
        arm (int): Index of the pulled arm.
        rng (RngStreams): Noise comes from rng.env_stream.

    Returns:
        RewardDraw: Mean, noise and realized reward.
    """
    if not 0 <= arm < env.k:
        raise IndexOutOfRange(f"arm {arm} outside [0, {env.k})")
    mean = float(env.arms[arm] @ env.theta_star)
    noise = float(rng.env_stream.normal(0.0, env.noise_sigma)) if env.noise_sigma > 0 else 0.0
    return RewardDraw(arm_index=arm, mean=mean, noise=noise, realized=mean + noise)
