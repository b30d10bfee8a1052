"""
Solvers for the reduced max-min problem

    maximize_{||z|| <= r}  min_a (offset_a - slope_a^T z)

The objective is concave and piecewise linear. solve_exact_1d enumerates
the breakpoints of the one-dimensional case; solve_subgradient runs
projected subgradient ascent in any dimension, polishes the iterate on its
active set and stops early once a dual bound certifies the polished value.

The dual of the problem is

    minimize_{w in simplex}  w^T offsets + r ||slopes^T w||

so every simplex vector w gives an upper bound on the optimum.

External dependencies: numpy, scipy
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from src.utils.errors import WrongDimension

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 200_000
DEFAULT_TOL = 1e-9
# Largest near-active set the polish enumerates subsets of.
POLISH_MAX_ACTIVE = 8
CONSISTENCY_TOL = 1e-10
ACTIVE_TOL = 1e-9
# Certification is attempted at FIRST_CHECK, then at every doubling.
FIRST_CHECK = 256


@dataclass(frozen=True, eq=False)
class MaxMinBallProblem:
    """
    Reduced form of the attackability program.

    Attributes:
        slopes: (m, p) matrix, one row per non-target arm in null-space coordinates.
        offsets: Length-m vector x~^T theta_par - x_a^T theta_par.
        radius: Feasible radius sqrt(max(0, 1 - ||theta_par||^2)).
        basis: (d, p) null-space basis mapping z back to R^d, if any.
        arm_indices: Arm index of every row.
    """

    slopes: np.ndarray
    offsets: np.ndarray
    radius: float
    basis: np.ndarray = None
    arm_indices: tuple = field(default=())

    def __post_init__(self):
        slopes = np.atleast_2d(np.asarray(self.slopes, dtype=np.float64))
        offsets = np.asarray(self.offsets, dtype=np.float64).reshape(-1)
        if slopes.shape[0] != offsets.shape[0]:
            raise ValueError(f"{slopes.shape[0]} slopes but {offsets.shape[0]} offsets")
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.slopes.shape[1]

    def objective(self, z):
        """Exact value min_a (offset_a - slope_a^T z)."""
        return float(np.min(self.offsets - self.slopes @ np.asarray(z, dtype=np.float64)))

    def lipschitz(self):
        """Largest slope norm, the Lipschitz constant of the objective."""
        if self.slopes.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.slopes, axis=1)))

    def dual_bound(self, weights):
        """Upper bound w^T offsets + r ||slopes^T w|| for simplex weights w."""
        w = np.asarray(weights, dtype=np.float64)
        return float(w @ self.offsets + self.radius * np.linalg.norm(self.slopes.T @ w))


def solve_exact_1d(problem):
    """
    Exact maximizer when the reduced dimension is 1.

    Evaluates the objective at the interval ends, at 0 and at every pairwise
    intersection of the lines offset_a - slope_a z inside [-r, r]. Ties go
    to the smaller |z|, then to the smaller z.

    Args:
        problem (MaxMinBallProblem): A problem with dim == 1.

    Returns:
        tuple: (epsilon_star, z_star) with z_star a length-1 array.

    Raises:
        WrongDimension: If the problem is not one-dimensional.
    """
    if problem.dim != 1:
        raise WrongDimension(f"exact solver needs reduced dimension 1, got {problem.dim}")
    r = problem.radius
    s = problem.slopes[:, 0]
    o = problem.offsets

    candidates = [0.0]
    if r > 0:
        candidates += [-r, r]
        for i, j in itertools.combinations(range(s.shape[0]), 2):
            if s[i] != s[j]:
                z = (o[i] - o[j]) / (s[i] - s[j])
                if -r <= z <= r:
                    candidates.append(float(z))

    values = [float(np.min(o - s * z)) for z in candidates]
    best = max(values)
    tie = 1e-12 * max(1.0, abs(best))
    z_star = min(
        (z for z, v in zip(candidates, values) if v >= best - tie),
        key=lambda z: (abs(z), z),
    )
    return float(np.min(o - s * z_star)), np.array([z_star])


def dual_weights(problem, z, value):
    """
    Simplex weights on the rows active at z that balance their slopes.

    Solves slopes_A^T w + mu z/||z|| = 0, sum(w) = 1 with w, mu >= 0 by
    nonnegative least squares; the mu column is only present when z sits
    on the sphere. Returns None when no weight lands on the active rows.
    """
    S, o, r = problem.slopes, problem.offsets, problem.radius
    active = np.flatnonzero((o - S @ z) - value <= ACTIVE_TOL * max(1.0, abs(value)))
    columns = [S[active].T]
    z_norm = float(np.linalg.norm(z))
    if r > 0 and z_norm >= r * (1.0 - ACTIVE_TOL):
        columns.append((z / z_norm)[:, None])
    M = np.hstack(columns)
    n_active = active.shape[0]
    M = np.vstack([M, np.concatenate([np.ones(n_active), np.zeros(M.shape[1] - n_active)])])
    rhs = np.zeros(M.shape[0])
    rhs[-1] = 1.0
    try:
        solution, _ = scipy.optimize.nnls(M, rhs)
    except RuntimeError:
        return None
    total = float(solution[:n_active].sum())
    if total <= 0.0:
        return None
    weights = np.zeros(S.shape[0])
    weights[active] = solution[:n_active] / total
    return weights


def _polish(problem, z, value, max_iter, tol):
    """
    Exact candidate from the near-active constraints at z.

    For each subset of near-active rows, the objective restricted to the
    affine set where those rows tie is linear; its maximum on the ball sits
    at the minimal-norm tie point pushed to the boundary along the descent
    direction of the shared value. A candidate is kept only if it beats the
    current value.
    """
    S, o, r = problem.slopes, problem.offsets, problem.radius
    G = problem.lipschitz()
    margins = (o - S @ z) - value
    window = max(10.0 * G * r / np.sqrt(max_iter), tol)
    near = [int(a) for a in np.argsort(margins, kind="stable") if margins[a] <= window]
    near = near[:POLISH_MAX_ACTIVE]

    best_z, best_value = z, value
    for size in range(1, min(len(near), problem.dim + 1) + 1):
        for subset in itertools.combinations(near, size):
            b, rest = subset[0], subset[1:]
            if rest:
                D = S[list(rest)] - S[b]
                rhs = o[list(rest)] - o[b]
                z_p = np.linalg.lstsq(D, rhs, rcond=None)[0]
                if np.max(np.abs(D @ z_p - rhs)) > CONSISTENCY_TOL * max(1.0, np.max(np.abs(rhs))):
                    continue
                Q = scipy.linalg.null_space(D)
            else:
                z_p = np.zeros(problem.dim)
                Q = np.eye(problem.dim)
            slack = r * r - float(z_p @ z_p)
            if slack < 0:
                continue
            g = Q.T @ S[b]
            g_norm = float(np.linalg.norm(g))
            candidate = z_p if g_norm == 0.0 else z_p - np.sqrt(slack) * (Q @ g) / g_norm
            candidate_value = problem.objective(candidate)
            if candidate_value > best_value:
                best_z, best_value = candidate, candidate_value
    return best_z, best_value


def solve_subgradient(problem, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL):
    """
    Projected subgradient ascent over the ball of the given radius.

    Steps are r / (G sqrt(t)) with G the largest slope norm; the active row
    on ties is the lowest index. At step FIRST_CHECK and every doubling
    after it, the better of the best and averaged iterates is polished on
    its active set; the run stops as soon as a dual bound is within tol of
    the polished value. Otherwise the full budget runs and the final
    polish is returned.

    Args:
        problem (MaxMinBallProblem): The reduced problem.
        max_iter (int): Largest number of ascent steps.
        tol (float): Relative duality gap accepted for an early stop.

    Returns:
        tuple: (epsilon_star, z_star).
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    S, o, r = problem.slopes, problem.offsets, problem.radius
    p = problem.dim
    G = problem.lipschitz()
    if r == 0.0 or p == 0 or G == 0.0:
        return float(np.min(o)), np.zeros(p)

    step = r / G
    z = np.zeros(p)
    average = np.zeros(p)
    best_z, best_value = z.copy(), problem.objective(z)
    next_check = min(FIRST_CHECK, max_iter)
    for t in range(1, max_iter + 1):
        values = o - S @ z
        a = int(np.argmin(values))
        if values[a] > best_value:
            best_z, best_value = z.copy(), float(values[a])
        z = z - (step / np.sqrt(t)) * S[a]
        norm = float(np.linalg.norm(z))
        if norm > r:
            z *= r / norm
        average += (z - average) / t

        if t == next_check:
            next_check = min(2 * next_check, max_iter)
            polished_z, polished_value = _polish_best(problem, z, average, best_z, best_value, t, tol)
            if polished_value > best_value:
                best_z, best_value = polished_z, polished_value
            weights = dual_weights(problem, polished_z, polished_value)
            if weights is not None:
                gap = problem.dual_bound(weights) - polished_value
                if gap <= tol * max(1.0, abs(polished_value)):
                    logger.debug(f"Certified after {t} steps, duality gap {gap:.3e}")
                    return polished_value, polished_z

    return best_value, best_z


def _polish_best(problem, z, average, best_z, best_value, iterations, tol):
    """Polishes the better of the best, last and averaged iterates."""
    for candidate in (z, average):
        value = problem.objective(candidate)
        if value > best_value:
            best_z, best_value = candidate.copy(), value
    polished_z, polished_value = _polish(problem, best_z, best_value, iterations, tol)
    if polished_value > best_value:
        logger.debug(f"Polish improved objective by {polished_value - best_value:.3e}")
    return polished_z, polished_value
