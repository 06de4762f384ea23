"""Sandwich covariance and population information matrices."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from archpmle.estimator import FitResult
from archpmle.exceptions import BoundaryWarning, NonConvergenceWarning, SingularHessian
from archpmle.innovations import ged_cumulants
from archpmle.likelihood import Likelihood
from archpmle.params import ParamVector
from archpmle.process import SimConfig, simulate

__all__ = ["InferenceResult", "PopulationMatrices", "population_matrices", "sandwich", "sandwich_matrix"]

EIG_RTOL = 1e-10


@dataclass
class InferenceResult:
    names: list[str]
    theta_hat: np.ndarray
    covariance: np.ndarray
    std_errors: np.ndarray
    ci: np.ndarray  # (k, 2)
    level: float
    condition_number: float
    clt_safe: bool
    hessian_eigenvalues: np.ndarray


def _checked_inverse(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = 0.5 * (h + h.T)
    vals, vecs = np.linalg.eigh(h)
    if vals[-1] <= 0 or vals[0] <= EIG_RTOL * vals[-1]:
        raise SingularHessian(vals)
    return (vecs / vals) @ vecs.T, vals


def sandwich_matrix(hessian: np.ndarray, outer: np.ndarray) -> np.ndarray:
    """``H^-1 G H^-1``, refusing Hessians that are not safely positive definite."""
    hinv, _ = _checked_inverse(np.asarray(hessian, dtype=float))
    cov = hinv @ np.asarray(outer, dtype=float) @ hinv
    return 0.5 * (cov + cov.T)


def sandwich(fit: FitResult, T: int | None = None, level: float = 0.95) -> InferenceResult:
    """Covariance ``H^-1 G H^-1 / T`` at the estimate with normal CIs.

    Raises
    ------
    SingularHessian
        If the smallest Hessian eigenvalue is not above ``1e-10`` times the
        largest.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    T = fit.n_obs if T is None else int(T)
    if not fit.converged:
        warnings.warn("sandwich computed at a non-converged fit", NonConvergenceWarning, stacklevel=2)
    if np.any(fit.boundary_flags):
        names = [n for n, f in zip(fit.theta.names, fit.boundary_flags) if f]
        warnings.warn(f"estimates at the boundary: {', '.join(names)}", BoundaryWarning, stacklevel=2)
    hinv, vals = _checked_inverse(fit.hessian)
    cov = hinv @ fit.outer @ hinv / T
    cov = 0.5 * (cov + cov.T)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    z = norm.ppf(0.5 + 0.5 * level)
    th = fit.theta_hat
    spec = fit.spec
    clt_safe = True
    if spec.hyperbolic:
        clt_safe = bool(spec.unpack(fit.theta.zeta).d > 0.5)
    return InferenceResult(
        names=fit.theta.names,
        theta_hat=th,
        covariance=cov,
        std_errors=se,
        ci=np.column_stack([th - z * se, th + z * se]),
        level=level,
        condition_number=float(vals[-1] / vals[0]),
        clt_safe=clt_safe,
        hessian_eigenvalues=vals,
    )


@dataclass
class PopulationMatrices:
    """Monte Carlo estimates of the limiting matrices at ``theta0``.

    ``G``/``H`` are assembled from ``M, N, P`` and the innovation cumulants;
    ``G_direct``/``H_direct`` average ``u_t u_t'`` and the Hessian directly.
    The ``*_mcse`` entries are across-replication standard errors.
    """

    G: np.ndarray
    H: np.ndarray
    M: np.ndarray
    N: np.ndarray
    P: np.ndarray
    kappa3: float
    kappa4: float
    G_direct: np.ndarray
    H_direct: np.ndarray
    G_mcse: np.ndarray
    H_mcse: np.ndarray
    G_direct_mcse: np.ndarray
    H_direct_mcse: np.ndarray
    known_mu: bool


def population_matrices(
    theta0: ParamVector,
    gamma: float,
    T_mc: int,
    R: int,
    seed: int = 0,
    presample: int = 5_000,
    n_weights: int = 10_000,
    known_mu: bool = False,
) -> PopulationMatrices:
    """Estimate ``M = E tau tau'``, ``N``, ``P`` and the assembled ``G``, ``H``.

    Each replication simulates ``presample + T_mc`` observations and evaluates
    the variance recursion over the whole path, so the last ``T_mc`` rows
    approximate the infinite-past variance.  With ``nu_t = -2 x_t e_2``::

        N = -E(tau / sigma) e_2'        P = 4 E(sigma^-2) e_2 e_2'
        G = (2 + k4) M - 2 k3 (N + N') + P,    H = M + P / 2

    With ``known_mu`` the ``mu`` row and column are dropped and
    ``G = (2 + k4) M``, ``H = M``.
    """
    spec = theta0.spec
    k3, k4 = ged_cumulants(gamma)
    keep = np.array([i for i in range(spec.r + 2) if not (known_mu and i == 1)])
    ss = np.random.SeedSequence(seed)
    reps = []
    for child in ss.spawn(int(R)):
        cfg = SimConfig(theta0, presample + int(T_mc), gamma, child, n_weights, burn_in=0,
                        allow_nonstationary=True)
        y = simulate(cfg).y
        lik = Likelihood(spec, y, n_weights)
        ev = lik.evaluate(theta0.theta, 2, start=presample)
        s = ev.sigma2[presample:]
        tau = ev.tau
        k = tau.shape[1]
        e2 = np.zeros(k)
        e2[1] = 1.0
        M = tau.T @ tau / tau.shape[0]
        N = -np.outer((tau / np.sqrt(s)[:, None]).mean(axis=0), e2)
        P = 4.0 * np.mean(1.0 / s) * np.outer(e2, e2)
        if known_mu:
            # score without the mu coordinate and its nu_t / s_t term
            u = tau[:, keep] * (1.0 - (y[presample:] - theta0.mu) ** 2 / s)[:, None]
            Mk = M[np.ix_(keep, keep)]
            G = (2.0 + k4) * Mk
            H = Mk
            Gd = u.T @ u / u.shape[0]
            Hd = ev.hessian[np.ix_(keep, keep)]
            reps.append((G, H, Mk, N[np.ix_(keep, keep)], P[np.ix_(keep, keep)], Gd, Hd))
        else:
            G = (2.0 + k4) * M - 2.0 * k3 * (N + N.T) + P
            H = M + 0.5 * P
            reps.append((G, H, M, N, P, ev.outer, ev.hessian))

    stack = [np.array(x) for x in zip(*reps)]
    means = [a.mean(axis=0) for a in stack]
    R_ = len(reps)
    mcse = [a.std(axis=0, ddof=1) / np.sqrt(R_) if R_ > 1 else np.full(a.shape[1:], np.inf) for a in stack]
    return PopulationMatrices(
        G=means[0], H=means[1], M=means[2], N=means[3], P=means[4], kappa3=k3, kappa4=k4,
        G_direct=means[5], H_direct=means[6], G_mcse=mcse[0], H_mcse=mcse[1],
        G_direct_mcse=mcse[5], H_direct_mcse=mcse[6], known_mu=known_mu,
    )
