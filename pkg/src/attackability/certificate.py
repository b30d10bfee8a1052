"""
Attackability index and certificate of a linear bandit environment.

For a target arm x~ and the parallel component theta_par of a parameter, the
environment is attackable iff

    eps* = max  x~^T theta_par - max_{a != x~} x_a^T (theta_par + theta_perp)
           s.t. x~^T theta_perp = 0,  ||theta_par + theta_perp|| <= 1

is strictly positive. theta_perp is written as B z with B an orthonormal
basis of the complement of x~, which turns the program into a max-min over
a ball of radius sqrt(1 - ||theta_par||^2).

Usage:
    proj = project_parallel(env, env.theta_star)
    report = attackability_index(env, proj)

External dependencies: numpy
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.attackability.solvers import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    MaxMinBallProblem,
    solve_exact_1d,
    solve_subgradient,
)
from src.utils.errors import CertificateError, InfeasibleNorm, ZeroTarget
from src.utils.numerics import nullspace_basis

logger = logging.getLogger(__name__)

NORM_SLACK = 1e-9
ORTHOGONALITY_TOL = 1e-8
BALL_TOL = 1e-8
MARGIN_TOL = 1e-7

METHOD_EXACT_1D = "exact_1d"
METHOD_SUBGRADIENT = "subgradient"


@dataclass(frozen=True, eq=False)
class ProjectedParam:
    theta_parallel: np.ndarray
    target_mean: float


@dataclass(frozen=True, eq=False)
class AttackabilityReport:
    """
    Outcome of an attackability test.

    Attributes:
        epsilon_star: Optimal margin; attackable iff strictly positive.
        certificate: theta_perp in R^d achieving the margin.
        attackable: epsilon_star > 0.
        iterations: Subgradient step budget (0 for the exact oracle).
        duality_gap_bound: G r / sqrt(max_iter) for the subgradient path, else 0.
        method: 'exact_1d' or 'subgradient'.
        theta_parallel: The parallel component the test was run with.
    """

    epsilon_star: float
    certificate: np.ndarray
    attackable: bool
    iterations: int
    duality_gap_bound: float
    method: str
    theta_parallel: np.ndarray = None

    @property
    def theta_tilde(self):
        """Attacker parameter theta_par + theta_perp."""
        return self.theta_parallel + self.certificate

    def to_dict(self):
        return {
            "epsilon_star": self.epsilon_star,
            "attackable": self.attackable,
            "certificate": self.certificate.tolist(),
            "theta_parallel": None if self.theta_parallel is None else self.theta_parallel.tolist(),
            "iterations": self.iterations,
            "duality_gap_bound": self.duality_gap_bound,
            "method": self.method,
        }


def project_parallel(env, theta):
    """
    Projects theta onto the target arm direction.

    Args:
        env: Anything exposing the target vector (EnvironmentSpec or PublicEnvironment).
        theta (np.ndarray): Parameter to project.

    Returns:
        ProjectedParam: theta_par = (x~^T theta / ||x~||^2) x~.

    Raises:
        ZeroTarget: If the target vector is zero.
    """
    target = np.asarray(env.target, dtype=np.float64)
    norm_sq = float(target @ target)
    if norm_sq == 0.0:
        raise ZeroTarget("target arm is the zero vector")
    theta_parallel = (float(target @ np.asarray(theta, dtype=np.float64)) / norm_sq) * target
    return ProjectedParam(theta_parallel=theta_parallel, target_mean=float(target @ theta_parallel))


def reduce_to_ball(env, proj):
    """
    Rewrites the attackability program as a max-min over a ball.

    Args:
        env: Environment (public view suffices).
        proj (ProjectedParam): Parallel component to test with.

    Returns:
        MaxMinBallProblem: Offsets x~^T theta_par - x_a^T theta_par and slopes B^T x_a.

    Raises:
        InfeasibleNorm: If ||theta_par|| > 1 + 1e-9.
    """
    theta_parallel = proj.theta_parallel
    norm = float(np.linalg.norm(theta_parallel))
    if norm > 1.0 + NORM_SLACK:
        raise InfeasibleNorm(f"||theta_parallel|| = {norm:.9f} exceeds 1")
    radius = float(np.sqrt(max(0.0, 1.0 - norm * norm)))
    basis = nullspace_basis(env.target)
    others = env.non_target_indices()
    arms = env.arms[others]
    offsets = proj.target_mean - arms @ theta_parallel
    slopes = arms @ basis
    return MaxMinBallProblem(
        slopes=slopes, offsets=offsets, radius=radius, basis=basis, arm_indices=tuple(others)
    )


def verify_certificate(env, proj, report):
    """
    Checks that a certificate satisfies every constraint of the program.

    Raises:
        CertificateError: Naming the first violated constraint.
    """
    certificate = report.certificate
    orthogonality = abs(float(env.target @ certificate))
    if orthogonality > ORTHOGONALITY_TOL:
        raise CertificateError(f"certificate not orthogonal to target: |x~^T theta_perp| = {orthogonality:.3e}")
    theta_tilde = proj.theta_parallel + certificate
    norm = float(np.linalg.norm(theta_tilde))
    if norm > 1.0 + BALL_TOL:
        raise CertificateError(f"||theta_par + theta_perp|| = {norm:.9f} exceeds 1")
    for a in env.non_target_indices():
        rhs = report.epsilon_star + float(env.arms[a] @ theta_tilde) - MARGIN_TOL
        if proj.target_mean < rhs:
            raise CertificateError(f"margin constraint fails for arm {a}")


def attackability_index(env, proj, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL):
    """
    Computes eps* and the certificate theta_perp.

    Uses the exact oracle when the null space is one-dimensional and the
    subgradient solver otherwise. Every result is checked against the
    program's constraints before it is returned.

    Args:
        env: Environment (public view suffices; theta* is never read).
        proj (ProjectedParam): Parallel component, true or estimated.
        max_iter (int): Subgradient budget.
        tol (float): Subgradient tolerance.

    Returns:
        AttackabilityReport: The verdict and certificate.
    """
    problem = reduce_to_ball(env, proj)
    if problem.dim == 1:
        epsilon_star, z = solve_exact_1d(problem)
        method, iterations, gap = METHOD_EXACT_1D, 0, 0.0
    else:
        epsilon_star, z = solve_subgradient(problem, max_iter=max_iter, tol=tol)
        degenerate = problem.radius == 0.0 or problem.dim == 0 or problem.lipschitz() == 0.0
        method = METHOD_SUBGRADIENT
        iterations = 0 if degenerate else max_iter
        gap = 0.0 if degenerate else problem.lipschitz() * problem.radius / np.sqrt(max_iter)

    certificate = problem.basis @ z if problem.dim else np.zeros(env.d)
    report = AttackabilityReport(
        epsilon_star=float(epsilon_star),
        certificate=certificate,
        attackable=bool(epsilon_star > 0.0),
        iterations=iterations,
        duality_gap_bound=float(gap),
        method=method,
        theta_parallel=proj.theta_parallel,
    )
    verify_certificate(env, proj, report)
    logger.debug(f"epsilon* = {report.epsilon_star:.6g} via {method}, attackable = {report.attackable}")
    return report


def solve_theta0(env, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL):
    """
    Parameter in the unit ball under which the target leads by the widest margin.

    Maximizes min_a (x~ - x_a)^T theta over ||theta|| <= 1 in full R^d,
    using the same max-min machinery with zero offsets and radius 1.

    Args:
        env: Environment (public view suffices).

    Returns:
        tuple: (theta0, epsilon0_star).
    """
    others = env.non_target_indices()
    problem = MaxMinBallProblem(
        slopes=env.arms[others] - env.target,
        offsets=np.zeros(len(others)),
        radius=1.0,
        arm_indices=tuple(others),
    )
    if problem.dim == 1:
        epsilon0, theta0 = solve_exact_1d(problem)
    else:
        epsilon0, theta0 = solve_subgradient(problem, max_iter=max_iter, tol=tol)
    return np.asarray(theta0, dtype=np.float64), float(epsilon0)
