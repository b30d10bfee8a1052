"""
Robust Phase Elimination.

Phase l lasts m_l = 4 d 2^l rounds. Each phase plays a rounded G-optimal
design over the surviving arms in round-robin order, fits least squares on
the phase's rewards and eliminates every arm a with

    max_b (x_b - x_a)^T theta_phase > 2 W_l,
    W_l = 2 R sqrt(2 d log(k l (l + 1) / delta) / m_l) + S_l / m_l,

where S_l = sqrt(m_l) is the corruption budget tolerated per phase.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.bandits.design import DEFAULT_DESIGN_TOL, g_optimal_design, round_design
from src.bandits.linucb import DEFAULT_DELTA, ArmChoice

logger = logging.getLogger(__name__)

PHASE_BASE_FACTOR = 4


@dataclass(eq=False)
class PhaseState:
    """
    Bookkeeping of the current elimination phase.

    Attributes:
        phase_index: Phase number l >= 1.
        active_arms: Surviving arm indices, ascending.
        design_weights: Design over active_arms.
        phase_length: m_l.
        planned_counts: Rounded pulls per active arm.
        schedule: Arm indices in play order for the phase.
        position: Rounds already played in the phase.
        phase_estimate: Least-squares estimate from the previous phase.
        observations: (arm_index, reward) pairs of the current phase.
    """

    phase_index: int
    active_arms: list
    design_weights: np.ndarray
    phase_length: int
    planned_counts: np.ndarray
    schedule: list
    position: int = 0
    phase_estimate: np.ndarray = None
    observations: list = field(default_factory=list)

    @property
    def complete(self):
        return self.position >= self.phase_length

    def within_phase_counts(self):
        """Actual pulls so far per active arm."""
        counts = {a: 0 for a in self.active_arms}
        for arm_index, _ in self.observations:
            counts[arm_index] += 1
        return counts


def phase_length(d, phase_index):
    return PHASE_BASE_FACTOR * d * 2 ** phase_index


def phase_width(d, k, phase_index, length, delta, noise_scale=1.0):
    """Confidence width W_l with the sqrt(m_l) corruption allowance."""
    statistical = 2.0 * noise_scale * np.sqrt(
        2.0 * d * np.log(k * phase_index * (phase_index + 1) / delta) / length
    )
    return float(statistical + 1.0 / np.sqrt(length))


def round_robin(active_arms, counts):
    """Interleaves planned pulls: one pass over arms with pulls left, repeated."""
    remaining = dict(zip(active_arms, (int(c) for c in counts)))
    schedule = []
    while any(remaining.values()):
        for a in active_arms:
            if remaining[a] > 0:
                schedule.append(a)
                remaining[a] -= 1
    return schedule


def start_phase(arms, active_arms, phase_index, phase_estimate=None, design_tol=DEFAULT_DESIGN_TOL):
    """Builds the PhaseState for phase phase_index over active_arms."""
    d = arms.shape[1]
    length = phase_length(d, phase_index)
    weights = g_optimal_design(arms[active_arms], tol=design_tol)
    counts = round_design(weights, length)
    return PhaseState(
        phase_index=phase_index,
        active_arms=list(active_arms),
        design_weights=weights,
        phase_length=length,
        planned_counts=counts,
        schedule=round_robin(list(active_arms), counts),
        phase_estimate=phase_estimate,
    )


def robustphe_choose(state, arms):
    """
    Next arm of the current phase's plan.

    Args:
        state (PhaseState): Current phase.
        arms (np.ndarray): All arm vectors (unused, kept for the shared signature).

    Returns:
        ArmChoice: The planned arm.
    """
    if len(state.active_arms) == 1:
        return ArmChoice(arm_index=state.active_arms[0])
    return ArmChoice(arm_index=state.schedule[state.position])


def robustphe_end_phase(state, arms, delta=DEFAULT_DELTA, noise_scale=1.0, design_tol=DEFAULT_DESIGN_TOL):
    """
    Eliminates arms from the phase's data and opens the next phase.

    Args:
        state (PhaseState): A finished phase with its observations.
        arms (np.ndarray): All arm vectors.
        delta (float): Confidence level.
        noise_scale (float): Sub-Gaussian scale R.
        design_tol (float): Tolerance of the next design.

    Returns:
        PhaseState: The next phase.
    """
    k, d = arms.shape
    active = state.active_arms
    if state.observations:
        pulled = [a for a, _ in state.observations]
        X = arms[pulled]
        y = np.array([r for _, r in state.observations])
        estimate = np.linalg.lstsq(X, y, rcond=None)[0]
    else:
        estimate = np.zeros(d)

    width = phase_width(d, k, state.phase_index, state.phase_length, delta, noise_scale)
    means = arms[active] @ estimate
    gaps = means.max() - means
    survivors = [a for a, gap in zip(active, gaps) if gap <= 2.0 * width]
    eliminated = sorted(set(active) - set(survivors))
    if eliminated:
        logger.debug(f"Phase {state.phase_index}: eliminated arms {eliminated} (2W = {2 * width:.4f})")
    return start_phase(arms, survivors, state.phase_index + 1, phase_estimate=estimate, design_tol=design_tol)


class RobustPhE:
    """RobustPhE victim over a fixed arm set."""

    name = "robust_phe"

    def __init__(self, arms, delta=DEFAULT_DELTA, noise_scale=1.0, design_tol=DEFAULT_DESIGN_TOL):
        self.arms = np.asarray(arms, dtype=np.float64)
        self.delta = delta
        self.noise_scale = noise_scale
        self.design_tol = design_tol
        self.state = start_phase(self.arms, list(range(self.arms.shape[0])), 1, design_tol=design_tol)
        self.active_history = [len(self.state.active_arms)]

    @property
    def phase_label(self):
        return str(self.state.phase_index)

    @property
    def active_arms(self):
        return list(self.state.active_arms)

    def choose(self):
        return robustphe_choose(self.state, self.arms)

    def update(self, arm_index, reward):
        self.state.observations.append((arm_index, float(reward)))
        self.state.position += 1
        if self.state.complete:
            self.state = robustphe_end_phase(
                self.state,
                self.arms,
                delta=self.delta,
                noise_scale=self.noise_scale,
                design_tol=self.design_tol,
            )
            self.active_history.append(len(self.state.active_arms))
