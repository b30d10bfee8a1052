"""
Dense linear algebra used across the lab.

Covers exactly what the bandits and the attackability solver need: Cholesky
solves, rank-1 design updates, quadratic norms and an orthonormal basis of
the complement of a single vector. Tolerances are fixed module constants.

External dependencies: numpy, scipy
"""

import numpy as np
import scipy.linalg

from src.utils.errors import NotSPD, ZeroVector

SYMMETRY_RTOL = 1e-10


def as_vector(x, d=None):
    """
    Coerces x into a finite 1-D float array.

    Args:
        x (array-like): Vector entries.
        d (int, optional): Expected length.

    Returns:
        np.ndarray: A float64 vector.
    """
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if d is not None and v.shape[0] != d:
        raise ValueError(f"expected a vector of length {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def is_symmetric(A):
    """True when A equals its transpose within the fixed relative tolerance."""
    A = np.asarray(A, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return bool(np.max(np.abs(A - A.T), initial=0.0) <= SYMMETRY_RTOL * scale)


def cholesky_factor(A):
    """
    Cholesky-factors an SPD matrix.

    Args:
        A (np.ndarray): Symmetric positive-definite matrix.

    Returns:
        tuple: A factor usable with scipy.linalg.cho_solve.

    Raises:
        NotSPD: If A is asymmetric or a pivot is not positive.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSPD(f"expected a square matrix, got shape {A.shape}")
    if not is_symmetric(A):
        raise NotSPD("matrix is not symmetric")
    try:
        return scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as e:
        raise NotSPD(f"Cholesky pivot is not positive: {e}") from e


def spd_solve(A, b, factor=None):
    """
    Solves A x = b for SPD A.

    Args:
        A (np.ndarray): SPD matrix (ignored when factor is given).
        b (np.ndarray): Right-hand side, a vector or a matrix of columns.
        factor (tuple, optional): A precomputed cholesky_factor(A).

    Returns:
        np.ndarray: The solution x.
    """
    if factor is None:
        factor = cholesky_factor(A)
    return scipy.linalg.cho_solve(factor, np.asarray(b, dtype=np.float64), check_finite=False)


def quad_norm(x, M, inverse=False, factor=None):
    """
    Matrix norm ||x||_M = sqrt(x^T M x).

    With inverse=True the norm is taken in M^{-1} through a Cholesky solve,
    which is how confidence widths ||x||_{A^{-1}} are evaluated.

    Args:
        x (np.ndarray): Vector.
        M (np.ndarray): SPD matrix.
        inverse (bool): Use M^{-1} instead of M.
        factor (tuple, optional): Precomputed cholesky_factor(M).

    Returns:
        float: The non-negative norm.
    """
    x = np.asarray(x, dtype=np.float64)
    if factor is None:
        factor = cholesky_factor(M)
    if inverse:
        value = float(x @ spd_solve(None, x, factor=factor))
    else:
        value = float(x @ (np.asarray(M, dtype=np.float64) @ x))
    return float(np.sqrt(max(value, 0.0)))


def quad_norms(X, M, inverse=False, factor=None):
    """
    Row-wise quad_norm for a (k, d) matrix of vectors.

    Returns:
        np.ndarray: Length-k array of norms.
    """
    X = np.asarray(X, dtype=np.float64)
    if factor is None:
        factor = cholesky_factor(M)
    if inverse:
        Y = spd_solve(None, X.T, factor=factor).T
    else:
        Y = X @ np.asarray(M, dtype=np.float64)
    values = np.einsum("ij,ij->i", X, Y)
    return np.sqrt(np.maximum(values, 0.0))


def rank1_update(A, x):
    """
    Returns A + x x^T without modifying A.

    Args:
        A (np.ndarray): SPD matrix.
        x (np.ndarray): Vector.

    Returns:
        np.ndarray: The updated matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    return np.asarray(A, dtype=np.float64) + np.outer(x, x)


def nullspace_basis(v):
    """
    Orthonormal basis of the complement of v, via a Householder reflection.

    The reflection H maps e1 onto -sign(u_0) u with u = v/||v||. H is
    orthogonal, so its remaining d-1 columns are orthonormal and orthogonal
    to u. The construction is deterministic: the same v always gives the
    same basis.

    Args:
        v (np.ndarray): Non-zero vector of length d.

    Returns:
        np.ndarray: A (d, d-1) matrix B with B^T B = I and B^T v = 0.

    Raises:
        ZeroVector: If ||v|| = 0.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroVector("cannot build a null-space basis for the zero vector")
    u = v / norm
    d = u.shape[0]
    sign = 1.0 if u[0] >= 0 else -1.0
    w = u.copy()
    w[0] += sign
    H = np.eye(d) - 2.0 * np.outer(w, w) / float(w @ w)
    return H[:, 1:]
