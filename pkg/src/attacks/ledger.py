"""
Per-round cost ledger of a reward-poisoning adversary.

Every intercepted round is recorded with its true and fed reward; the
ledger derives the cost C(t) = sum |fed - true|, the non-target corruption
S'_t, the largest target-arm corruption and per-stage costs.

External dependencies: pandas
"""

import math

import pandas as pd

LEDGER_COLUMNS = [
    "round",
    "arm_index",
    "is_target",
    "true_reward",
    "fed_reward",
    "delta",
    "cum_cost",
    "cum_target_pulls",
    "phase",
]

STAGE1 = "stage1"
STAGE2 = "stage2"
ABORTED = "aborted"
ORACLE = "oracle"
CLEAN = "none"


class AttackLedger:
    """Append-only record of one run's rounds."""

    def __init__(self, target_index):
        self.target_index = target_index
        self.rows = []
        self.cum_cost = 0.0
        self.target_pulls = 0
        self.nontarget_corruption = 0.0
        self.gamma_realized = 0.0
        self._abs_deltas = []

    def __len__(self):
        return len(self.rows)

    def record(self, t, arm_index, true_reward, fed_reward, phase):
        """
        Appends one round.

        Args:
            t (int): Round number, starting at 1.
            arm_index (int): Pulled arm.
            true_reward (float): Reward drawn by the environment.
            fed_reward (float): Reward handed to the learner.
            phase (str): Adversary stage label for the round.

        Returns:
            float: delta = fed_reward - true_reward.
        """
        delta = fed_reward - true_reward
        cost = abs(delta)
        is_target = arm_index == self.target_index
        self.cum_cost += cost
        self._abs_deltas.append(cost)
        if is_target:
            self.target_pulls += 1
            self.gamma_realized = max(self.gamma_realized, cost)
        else:
            self.nontarget_corruption += cost
        self.rows.append(
            (t, arm_index, is_target, true_reward, fed_reward, delta, self.cum_cost, self.target_pulls, phase)
        )
        return delta

    @property
    def total_cost(self):
        """Exactly rounded sum of |delta| over all rounds."""
        return math.fsum(self._abs_deltas)

    def stage_cost(self, *phases):
        """Exactly rounded sum of |delta| over rounds in the given stages."""
        return math.fsum(cost for row, cost in zip(self.rows, self._abs_deltas) if row[-1] in phases)

    def curve(self, column):
        """(t, value) pairs of a cumulative column."""
        index = LEDGER_COLUMNS.index(column)
        return [(row[0], row[index]) for row in self.rows]

    def to_frame(self):
        """The ledger as a DataFrame with the round-log columns."""
        return pd.DataFrame(self.rows, columns=LEDGER_COLUMNS)
