"""Simulation of ARCH(infinity) paths and the fractional-moment condition."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from archpmle.exceptions import DomainError, SimulationOverflowError, StationarityWarning
from archpmle.innovations import ged_abs_moment, ged_sample
from archpmle.params import ParamVector
from archpmle.weights import Family, ModelSpec, psi_at_one, validate, weights

__all__ = ["MomentCheck", "Series", "SimConfig", "find_rho", "moment_condition", "scan_rho", "simulate"]

MAX_BURN_IN = 100_000


@dataclass
class Series:
    """Observed returns with free-form provenance metadata."""

    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.y, dtype=dtype)

    def __len__(self) -> int:
        return self.y.shape[0]


@dataclass
class SimConfig:
    """Simulation settings.

    ``burn_in=None`` uses ``min(10 * n_weights, 100_000)``.  Set
    ``allow_nonstationary`` to simulate weights that sum to one or more.
    """

    theta0: ParamVector
    T: int
    gamma: float = 0.5
    seed: int | None = 0
    n_weights: int = 10_000
    burn_in: int | None = None
    allow_nonstationary: bool = False

    def __post_init__(self) -> None:
        if int(self.T) < 1:
            raise DomainError("T must be at least 1")
        if int(self.n_weights) < 1:
            raise DomainError("n_weights must be at least 1")
        if self.burn_in is not None and int(self.burn_in) < 0:
            raise DomainError("burn_in must be nonnegative")

    @property
    def effective_burn_in(self) -> int:
        if self.burn_in is None:
            return min(10 * int(self.n_weights), MAX_BURN_IN)
        return int(self.burn_in)


def _trimmed_weights(spec: ModelSpec, zeta, n: int) -> np.ndarray:
    if spec.family is Family.ZERO:
        return np.zeros(0)
    psi = weights(spec, zeta, n)
    nz = np.flatnonzero(psi)
    return psi[: nz[-1] + 1] if nz.size else psi[:0]


def simulate(cfg: SimConfig) -> Series:
    """Simulate ``y_t = mu + x_t``, ``x_t = sigma_t eps_t`` with GED innovations.

    The recursion starts from ``x_s = 0`` for ``s <= 0``, runs
    ``burn_in + T`` steps with ``sigma_t^2 = omega + sum_{j <= min(t-1, N_w)} psi_j x_{t-j}^2``
    and keeps the last ``T`` values.

    Raises
    ------
    SimulationOverflowError
        If ``sigma_t^2`` is not finite; ``t`` counts from the first burn-in step.
    """
    th = cfg.theta0
    spec = th.spec
    total_sum = psi_at_one(spec, th.zeta)
    psi = _trimmed_weights(spec, th.zeta, int(cfg.n_weights))
    if total_sum is None:
        total_sum = float(psi.sum())
    if total_sum >= 1.0:
        if not cfg.allow_nonstationary:
            raise DomainError(
                f"weights sum to {total_sum:.6g} >= 1; pass allow_nonstationary=True to simulate anyway"
            )
        warnings.warn(f"simulating with weight sum {total_sum:.6g} >= 1", StationarityWarning, stacklevel=2)

    burn = cfg.effective_burn_in
    total = burn + int(cfg.T)
    rng = np.random.default_rng(cfg.seed)
    eps = ged_sample(cfg.gamma, total, rng)
    omega = th.omega

    if psi.size == 0:
        x = math.sqrt(omega) * eps
    else:
        rev = psi[::-1].copy()
        K = rev.shape[0]
        x = np.empty(total)
        x2 = np.zeros(total)
        for t in range(total):
            k = t if t < K else K
            s2 = omega + (rev[K - k :] @ x2[t - k : t] if k else 0.0)
            if not math.isfinite(s2):
                raise SimulationOverflowError(t + 1)
            xt = math.sqrt(s2) * eps[t]
            if not math.isfinite(xt * xt):
                raise SimulationOverflowError(t + 1)
            x[t] = xt
            x2[t] = xt * xt
    y = th.mu + x[burn:]
    meta = {
        "family": spec.family.value,
        "theta0": th.theta.tolist(),
        "gamma": float(cfg.gamma),
        "seed": cfg.seed,
        "burn_in": burn,
        "n_weights": int(cfg.n_weights),
    }
    return Series(y=y, meta=meta)


# ---------------------------------------------------------------------------
# moment condition E|eps|^(2 rho) sum psi_j^rho < 1


@dataclass
class MomentCheck:
    rho: float
    moment_factor: float
    weight_sum: float
    value: float
    tail_bound: float
    verdict: str  # "yes" | "no" | "inconclusive" | "divergent-sum"

    @property
    def satisfied(self) -> str:
        return self.verdict


def _decay_exponent(spec: ModelSpec, zeta) -> float | None:
    if not spec.hyperbolic:
        return None
    return validate(spec, zeta).d + 1.0


def _tail_sum(spec: ModelSpec, zeta, psi: np.ndarray, rho: float) -> float:
    n = psi.shape[0]
    last = psi[-1]
    if spec.family is Family.ZERO or last == 0.0:
        return 0.0
    if spec.hyperbolic:
        # sum_{j>N} K j^-p <= K N^(1-p)/(p-1) with K = psi_N^rho N^p
        p = rho * _decay_exponent(spec, zeta)
        return float(last**rho * n / (p - 1.0))
    if n < 2 or psi[-2] <= 0:
        return math.inf
    q = (last / psi[-2]) ** rho
    if q >= 1.0:
        return math.inf
    return float(last**rho * q / (1.0 - q))


def moment_condition(
    spec: ModelSpec, zeta, gamma: float, rho: float, n_weights: int = 1_000_000, psi: np.ndarray | None = None
) -> MomentCheck:
    """Evaluate ``E|eps|^(2 rho) * sum_{j <= N_w} psi_j^rho`` with a tail bound.

    For hyperbolic families the sum diverges unless ``rho (d + 1) > 1``;
    such rows get verdict ``divergent-sum`` and infinite value.
    ``psi`` may be passed to reuse precomputed weights.
    """
    rho = float(rho)
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    mf = ged_abs_moment(gamma, 2.0 * rho)
    expo = _decay_exponent(spec, zeta)
    if expo is not None and rho * expo <= 1.0:
        return MomentCheck(rho, mf, math.inf, math.inf, math.inf, "divergent-sum")
    if psi is None:
        psi = np.zeros(int(n_weights)) if spec.family is Family.ZERO else weights(spec, zeta, int(n_weights))
    s = float(np.sum(psi**rho))
    tail = mf * _tail_sum(spec, zeta, psi, rho)
    value = mf * s
    if value >= 1.0:
        verdict = "no"
    elif value + tail < 1.0:
        verdict = "yes"
    else:
        verdict = "inconclusive"
    return MomentCheck(rho, mf, s, value, tail, verdict)


def scan_rho(spec: ModelSpec, zeta, gamma: float, grid, n_weights: int = 1_000_000) -> list[MomentCheck]:
    """:func:`moment_condition` at every ``rho`` of ``grid``, weights computed once."""
    grid = [float(r) for r in grid]
    for r in grid:
        if not (0.0 < r < 1.0):
            raise DomainError(f"rho must lie in (0, 1), got {r}")
    psi = np.zeros(int(n_weights)) if spec.family is Family.ZERO else weights(spec, zeta, int(n_weights))
    return [moment_condition(spec, zeta, gamma, r, n_weights, psi=psi) for r in grid]


def find_rho(spec: ModelSpec, zeta, gamma: float, grid, n_weights: int = 1_000_000) -> MomentCheck | None:
    """Among grid points with verdict ``yes``, the one with the smallest value."""
    ok = [c for c in scan_rho(spec, zeta, gamma, grid, n_weights) if c.verdict == "yes"]
    if not ok:
        return None
    return min(ok, key=lambda c: (c.value, c.rho))
