"""Box-constrained minimization of the truncated quasi-likelihood."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from archpmle.exceptions import ArchError, DomainError, NonConvergenceWarning
from archpmle.likelihood import Evaluation, Likelihood
from archpmle.params import ParamVector, check_bounds, default_bounds
from archpmle.weights import ModelSpec

__all__ = ["FitOptions", "FitResult", "StartResult", "fit", "minimize_box"]

EIG_FLOOR = 1e-8
TIE_TOL = 1e-10
BOUNDARY_FRAC = 1e-6
ARMIJO_C = 1e-4
MAX_BACKTRACK = 50


@dataclass
class FitOptions:
    """Optimizer settings.

    ``start_jitter`` is a fraction of each coordinate's box width.
    ``n_weights`` truncates the variance recursion (None = full history).
    """

    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    max_iter: int = 500
    n_starts: int = 5
    start_jitter: float = 0.25
    seed: int = 0
    n_weights: int | None = None

    def __post_init__(self) -> None:
        if min(self.grad_tol, self.step_tol, self.start_jitter) <= 0 or self.max_iter < 1 or self.n_starts < 1:
            raise DomainError("fit options must all be positive")


@dataclass
class StartResult:
    start: np.ndarray
    theta: np.ndarray
    qll: float
    projected_grad_norm: float
    converged: bool
    iterations: int
    message: str


@dataclass
class FitResult:
    theta: ParamVector
    qll_min: float
    projected_grad_norm: float
    hessian: np.ndarray
    outer: np.ndarray
    converged: bool
    iterations: int
    boundary_flags: np.ndarray
    n_obs: int
    message: str = ""
    starts: list[StartResult] = field(default_factory=list)

    @property
    def spec(self) -> ModelSpec:
        return self.theta.spec

    @property
    def theta_hat(self) -> np.ndarray:
        return self.theta.theta


def _projected_gradient(x, g, lo, hi) -> np.ndarray:
    return x - np.clip(x - g, lo, hi)


def _safe_qll(lik: Likelihood, x) -> float:
    try:
        return lik.evaluate(x, 0).qll
    except ArchError:
        return np.inf


def minimize_box(lik: Likelihood, x0, lo, hi, opts: FitOptions) -> tuple[StartResult, Evaluation]:
    """Projected Newton / BFGS descent from one start.

    The analytic Hessian of the free coordinates is used when its smallest
    eigenvalue exceeds ``1e-8``; otherwise a BFGS approximation built from
    successive gradients takes its place.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    start = x.copy()
    ev = lik.evaluate(x, 2)
    f, g = ev.qll, ev.score
    B = np.diag(np.maximum(np.abs(np.diag(ev.hessian)), 1e-6))
    width = hi - lo
    msg = "iteration limit reached"
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        pg = _projected_gradient(x, g, lo, hi)
        if np.max(np.abs(pg)) <= opts.grad_tol:
            converged, msg = True, "projected gradient below tolerance"
            it -= 1
            break
        tiny = 1e-12 * width
        active = ((x <= lo + tiny) & (g > 0)) | ((x >= hi - tiny) & (g < 0))
        free = ~active
        p = np.zeros_like(x)
        Hf = ev.hessian[np.ix_(free, free)]
        Hf = 0.5 * (Hf + Hf.T)
        eig = np.linalg.eigvalsh(Hf) if Hf.size else np.ones(1)
        curv = Hf if eig[0] > EIG_FLOOR else B[np.ix_(free, free)]
        try:
            p[free] = -np.linalg.solve(curv, g[free])
        except np.linalg.LinAlgError:
            p[free] = -g[free]
        if g @ p >= 0:
            p = np.where(free, -g, 0.0)

        x_new, f_new = _line_search(lik, x, f, g, p, lo, hi)
        if x_new is None:
            # fall back to a scaled projected-gradient step
            p = -g / max(np.max(np.abs(np.diag(B))), 1.0)
            x_new, f_new = _line_search(lik, x, f, g, p, lo, hi)
            if x_new is None:
                msg = "line search failed"
                break
        s = x_new - x
        ev_new = lik.evaluate(x_new, 2)
        y = ev_new.score - g
        sy = s @ y
        if sy > 1e-14:
            Bs = B @ s
            B = B + np.outer(y, y) / sy - np.outer(Bs, Bs) / (s @ Bs)
        x, f, g, ev = x_new, ev_new.qll, ev_new.score, ev_new
        if np.max(np.abs(s)) < opts.step_tol:
            pgn = np.max(np.abs(_projected_gradient(x, g, lo, hi)))
            converged = pgn <= opts.grad_tol
            msg = "step below tolerance"
            break
    else:
        pgn = np.max(np.abs(_projected_gradient(x, g, lo, hi)))
        converged = pgn <= opts.grad_tol
        if converged:
            msg = "projected gradient below tolerance"
    pgn = float(np.max(np.abs(_projected_gradient(x, g, lo, hi))))
    res = StartResult(start, x, float(f), pgn, bool(converged), it, msg)
    return res, ev


def _line_search(lik, x, f, g, p, lo, hi):
    alpha = 1.0
    for _ in range(MAX_BACKTRACK):
        x_new = np.clip(x + alpha * p, lo, hi)
        step = x_new - x
        if not np.any(step):
            return None, None
        f_new = _safe_qll(lik, x_new)
        if f_new <= f + ARMIJO_C * (g @ step):
            return x_new, f_new
        alpha *= 0.5
    return None, None


def _starts(lo, hi, opts: FitOptions) -> list[np.ndarray]:
    center = 0.5 * (lo + hi)
    rng = np.random.default_rng(opts.seed)
    out = [center]
    for _ in range(opts.n_starts - 1):
        jitter = opts.start_jitter * (hi - lo) * rng.uniform(-1.0, 1.0, size=lo.shape[0])
        out.append(np.clip(center + jitter, lo, hi))
    return out


def fit(y, spec: ModelSpec, bounds=None, opts: FitOptions | None = None, starts=None) -> FitResult:
    """Minimize the quasi-likelihood over the box from several starts.

    The start with the lowest objective wins; objectives within ``1e-10`` of
    the best are tie-broken by the lexicographically smallest estimate.

    Parameters
    ----------
    y : array_like
    spec : ModelSpec
    bounds : array_like, optional
        ``(r + 2) x 2`` box; defaults to :func:`archpmle.params.default_bounds`.
    opts : FitOptions, optional
    starts : sequence of array_like, optional
        Explicit starting points; overrides the box-centre-plus-jitter rule.

    Raises
    ------
    DomainError
        If ``T < r + 2`` or the bounds are malformed.
    PositivityError
        If the weights are not positive at a starting point.
    """
    opts = opts or FitOptions()
    y = np.asarray(y, dtype=float).ravel()
    k = spec.r + 2
    if y.shape[0] < k:
        raise DomainError(f"need at least r + 2 = {k} observations, got {y.shape[0]}")
    box = check_bounds(spec, default_bounds(spec) if bounds is None else bounds)
    lo, hi = box[:, 0], box[:, 1]
    lik = Likelihood(spec, y, opts.n_weights)
    start_points = _starts(lo, hi, opts) if starts is None else [np.asarray(s, dtype=float) for s in starts]

    results = []
    for x0 in start_points:
        results.append(minimize_box(lik, x0, lo, hi, opts))
    best_q = min(r.qll for r, _ in results)
    tied = [(r, ev) for r, ev in results if r.qll <= best_q + TIE_TOL]
    best, ev = min(tied, key=lambda item: tuple(item[0].theta))

    theta = best.theta
    width = hi - lo
    flags = (theta - lo <= BOUNDARY_FRAC * width) | (hi - theta <= BOUNDARY_FRAC * width)
    if not best.converged:
        warnings.warn(f"optimizer did not converge: {best.message}", NonConvergenceWarning, stacklevel=2)
    return FitResult(
        theta=ParamVector.from_theta(spec, theta, box),
        qll_min=best.qll,
        projected_grad_norm=best.projected_grad_norm,
        hessian=ev.hessian,
        outer=ev.outer,
        converged=best.converged,
        iterations=best.iterations,
        boundary_flags=flags,
        n_obs=y.shape[0],
        message=best.message,
        starts=[r for r, _ in results],
    )
