"""Truncated Gaussian quasi-likelihood with analytic first and second derivatives.

For ``theta = (omega, mu, zeta)`` and observations ``y_1..y_T``::

    x_t       = y_t - mu
    s_t       = omega + sum_{j=1}^{t-1} psi_j(zeta) x_{t-j}^2
    q_t       = x_t^2 / s_t + log s_t
    Q(theta)  = mean_t q_t

The per-observation score is ``u_t = tau_t (1 - chi_t) + nu_t / s_t`` with
``tau_t = grad s_t / s_t``, ``chi_t = x_t^2 / s_t`` and ``nu_t = -2 x_t e_2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from archpmle.exceptions import DomainError
from archpmle.weights import ModelSpec, weights_all

__all__ = [
    "Evaluation",
    "Likelihood",
    "hessian",
    "lagged_sum",
    "outer_product",
    "qll",
    "score",
    "sigma_bar_sq",
]

_DIRECT_LIMIT = 1 << 18


def lagged_sum(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``out[t] = sum_{j=1}^{t} w[j-1] v[t-j]`` for ``t = 0..T-1`` (0-based).

    ``w`` may be 2-D, in which case each column is summed separately.
    Lags beyond ``len(w)`` are dropped.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    T = v.shape[0]
    squeeze = w.ndim == 1
    if squeeze:
        w = w[:, None]
    k = w.shape[1]
    out = np.zeros((T, k))
    L = min(w.shape[0], T - 1)
    if L > 0 and k > 0:
        w = w[:L]
        vv = v[: T - 1]
        if L * (T - 1) <= _DIRECT_LIMIT:
            for c in range(k):
                out[1:, c] = np.convolve(w[:, c], vv)[: T - 1]
        else:
            out[1:] = fftconvolve(w, vv[:, None], axes=0)[: T - 1]
    return out[:, 0] if squeeze else out


def sigma_bar_sq(theta, y, psi) -> np.ndarray:
    """Truncated conditional variance ``s_1..s_T`` given precomputed weights."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(y, dtype=float) - theta[1]
    return theta[0] + lagged_sum(psi, x * x)


@dataclass
class Evaluation:
    """Objective and derivatives at one ``theta``.

    ``score``/``hessian``/``outer`` are averages over the observations from
    ``start`` on; ``u`` holds the per-observation scores for those rows.
    """

    qll: float
    sigma2: np.ndarray
    score: np.ndarray | None = None
    u: np.ndarray | None = None
    tau: np.ndarray | None = None
    hessian: np.ndarray | None = None

    @property
    def outer(self) -> np.ndarray:
        return self.u.T @ self.u / self.u.shape[0]


class Likelihood:
    """Quasi-likelihood for one series under one model.

    Parameters
    ----------
    spec : ModelSpec
    y : array_like
        Observations ``y_1..y_T``.
    n_weights : int, optional
        Truncate the variance recursion to this many lags.  The default uses
        the full history (``T - 1`` lags), which is exact.
    """

    def __init__(self, spec: ModelSpec, y, n_weights: int | None = None) -> None:
        self.spec = spec
        self.y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
        if self.y.shape[0] < 1:
            raise DomainError("need at least one observation")
        if not np.all(np.isfinite(self.y)):
            raise DomainError("observations must be finite")
        self.T = self.y.shape[0]
        lags = self.T - 1 if n_weights is None else min(int(n_weights), self.T - 1)
        self.n_lags = max(lags, 1)
        self.k = spec.r + 2

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape[0] != self.k:
            raise DomainError(f"theta must have length {self.k}, got {theta.shape[0]}")
        if not theta[0] > 0:
            raise DomainError("omega must be positive")
        return theta

    def evaluate(self, theta, order: int = 2, start: int = 0, check_positive: bool = True) -> Evaluation:
        """Objective plus derivatives up to ``order`` (0, 1 or 2)."""
        theta = self._check_theta(theta)
        spec = self.spec
        omega, mu, zeta = theta[0], theta[1], theta[2:]
        psi, jac, hess = weights_all(spec, zeta, self.n_lags, order, check_positive)
        x = self.y - mu
        x2 = x * x
        s = omega + lagged_sum(psi, x2)
        chi = x2 / s
        sl = slice(start, None)
        q = float(np.mean(chi[sl] + np.log(s[sl])))
        ev = Evaluation(qll=q, sigma2=s)
        if order == 0:
            return ev

        T, k, r = self.T, self.k, spec.r
        ds = np.empty((T, k))
        ds[:, 0] = 1.0
        ds[:, 1] = -2.0 * lagged_sum(psi, x)
        if r:
            ds[:, 2:] = lagged_sum(jac, x2)
        tau = ds / s[:, None]
        u = tau * (1.0 - chi)[:, None]
        u[:, 1] -= 2.0 * x / s
        ev.u = u[sl]
        ev.tau = tau[sl]
        ev.score = ev.u.mean(axis=0)
        if order == 1:
            return ev

        n_used = T - (start if start >= 0 else T + start)
        s_, x_, chi_, tau_ = s[sl], x[sl], chi[sl], tau[sl]
        # second derivatives of s_t, averaged with weight (1 - chi_t)/s_t
        wgt = (1.0 - chi_) / s_
        d2 = np.zeros((k, k))
        d2[1, 1] = wgt @ (2.0 * lagged_sum(psi, np.ones(T))[sl])
        if r:
            cross = -2.0 * lagged_sum(jac, x)[sl]
            d2[1, 2:] = d2[2:, 1] = wgt @ cross
            iu = np.triu_indices(r)
            hz = lagged_sum(hess[:, iu[0], iu[1]], x2)[sl]
            vals = wgt @ hz
            d2[2 + iu[0], 2 + iu[1]] = vals
            d2[2 + iu[1], 2 + iu[0]] = vals
        h = d2
        h += (tau_ * (2.0 * chi_ - 1.0)[:, None]).T @ tau_
        # -(tau nu' + nu tau')/s with nu = -2 x e2
        c = (2.0 * x_ / s_) @ tau_
        h[1, :] += c
        h[:, 1] += c
        h[1, 1] += 2.0 * np.sum(1.0 / s_)
        ev.hessian = h / n_used
        return ev

    def qll(self, theta) -> float:
        return self.evaluate(theta, 0).qll

    def score(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """Per-observation scores ``u_t`` and their average."""
        ev = self.evaluate(theta, 1)
        return ev.u, ev.score

    def hessian(self, theta) -> np.ndarray:
        return self.evaluate(theta, 2).hessian

    def outer_product(self, theta) -> np.ndarray:
        return self.evaluate(theta, 1).outer

    def sigma_bar_sq(self, theta) -> np.ndarray:
        return self.evaluate(theta, 0).sigma2


def qll(spec: ModelSpec, theta, y) -> float:
    return Likelihood(spec, y).qll(theta)


def score(spec: ModelSpec, theta, y) -> tuple[np.ndarray, np.ndarray]:
    return Likelihood(spec, y).score(theta)


def hessian(spec: ModelSpec, theta, y) -> np.ndarray:
    return Likelihood(spec, y).hessian(theta)


def outer_product(spec: ModelSpec, theta, y) -> np.ndarray:
    return Likelihood(spec, y).outer_product(theta)
