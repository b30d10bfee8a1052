"""
G-optimal experimental design over a finite arm set.
"""

import logging

import numpy as np

from src.utils.numerics import quad_norms

logger = logging.getLogger(__name__)

DEFAULT_DESIGN_TOL = 1e-2
DEFAULT_DESIGN_MAX_ITER = 10_000
RANK_RTOL = 1e-10


def span_coordinates(arms):
    """
    Expresses arms in an orthonormal basis of their span.

    Returns:
        np.ndarray: (k, r) coordinates, r the numerical rank.
    """
    arms = np.asarray(arms, dtype=np.float64)
    _, singular, vt = np.linalg.svd(arms, full_matrices=False)
    if singular.size == 0 or singular[0] == 0.0:
        return np.zeros((arms.shape[0], 0))
    rank = int(np.sum(singular > RANK_RTOL * singular[0]))
    return arms @ vt[:rank].T


def leverages(coords, weights):
    """||x_a||^2 in V(pi)^{-1} for every arm, V(pi) = sum pi_a x_a x_a^T."""
    V = coords.T @ (weights[:, None] * coords)
    return quad_norms(coords, V, inverse=True) ** 2


def g_optimal_design(arms, tol=DEFAULT_DESIGN_TOL, max_iter=DEFAULT_DESIGN_MAX_ITER):
    """
    Frank-Wolfe (Fedorov-Wynn) iterations on the log-det objective.

    Works in span coordinates so rank-deficient arm sets need no
    pseudo-inverse. Stops once the largest leverage is at most
    (1 + tol) times the span dimension.

    Args:
        arms (np.ndarray): (k, d) active arm vectors.
        tol (float): Relative slack on the Kiefer-Wolfowitz bound.
        max_iter (int): Iteration cap.

    Returns:
        np.ndarray: Probability vector over the arms.
    """
    arms = np.atleast_2d(np.asarray(arms, dtype=np.float64))
    k = arms.shape[0]
    weights = np.full(k, 1.0 / k)
    coords = span_coordinates(arms)
    dim = coords.shape[1]
    if k == 1 or dim == 0:
        return weights

    for iteration in range(max_iter):
        lev = leverages(coords, weights)
        j = int(np.argmax(lev))
        g = float(lev[j])
        if g <= (1.0 + tol) * dim:
            break
        gamma = (g / dim - 1.0) / (g - 1.0)
        weights = (1.0 - gamma) * weights
        weights[j] += gamma
    else:
        logger.warning(f"G-optimal design stopped at max_iter={max_iter} with leverage {g:.4f} > {dim}")
    return weights / weights.sum()


def round_design(weights, total):
    """
    Integer pull counts summing exactly to total, by largest remainder.

    Args:
        weights (np.ndarray): Probability vector.
        total (int): Number of pulls to allocate.

    Returns:
        np.ndarray: Non-negative integer counts.
    """
    raw = np.asarray(weights, dtype=np.float64) * total
    counts = np.floor(raw).astype(int)
    remainder = total - int(counts.sum())
    if remainder > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts
