"""Full parameter vector ``theta = (omega, mu, zeta)`` and its box."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from archpmle.exceptions import DomainError
from archpmle.weights import Family, ModelSpec

__all__ = ["ParamVector", "default_bounds"]

# Practitioner defaults for the compact box; any fit may override them.
_DEFAULT_BOX = {
    "omega": (1e-3, 5.0),
    "mu": (-2.0, 2.0),
    "a": (1e-3, 0.999),
    "b": (1e-3, 0.95),
    "e": (1e-3, 2.0),
    "f": (0.0, 5.0),
    "d_frac": (0.05, 0.95),
    "d_gexp": (0.05, 5.0),
    "d_ghyp": (0.05, 3.0),
}


def default_bounds(spec: ModelSpec) -> np.ndarray:
    """Default ``(r + 2) x 2`` box for ``spec``."""
    rows = [_DEFAULT_BOX["omega"], _DEFAULT_BOX["mu"]]
    fam = spec.family
    if fam in (Family.GARCH, Family.FGARCH, Family.FIGARCH):
        rows += [_DEFAULT_BOX["a"]] * spec.m + [_DEFAULT_BOX["b"]] * spec.n
        if fam is not Family.GARCH:
            rows.append(_DEFAULT_BOX["d_frac"])
    elif fam in (Family.GEXP, Family.GHYP):
        rows += [_DEFAULT_BOX["e"]] * spec.m
        if spec.free_f:
            rows += [_DEFAULT_BOX["f"]] * spec.m
        rows.append(_DEFAULT_BOX["d_gexp" if fam is Family.GEXP else "d_ghyp"])
    return np.array(rows, dtype=float)


@dataclass
class ParamVector:
    """``(omega, mu, zeta)`` with an optional box ``bounds`` of shape ``(r+2, 2)``."""

    spec: ModelSpec
    omega: float
    mu: float
    zeta: np.ndarray
    bounds: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.omega = float(self.omega)
        self.mu = float(self.mu)
        self.zeta = np.asarray(self.zeta, dtype=float).ravel()
        if self.zeta.shape[0] != self.spec.r:
            raise DomainError(f"zeta must have length {self.spec.r}, got {self.zeta.shape[0]}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.bounds is not None:
            self.bounds = check_bounds(self.spec, self.bounds)

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([[self.omega, self.mu], self.zeta])

    @property
    def names(self) -> list[str]:
        return ["omega", "mu"] + self.spec.param_names()

    @classmethod
    def from_theta(cls, spec: ModelSpec, theta, bounds=None) -> ParamVector:
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape[0] != spec.r + 2:
            raise DomainError(f"theta must have length {spec.r + 2}, got {theta.shape[0]}")
        return cls(spec, theta[0], theta[1], theta[2:], bounds)

    def inside(self) -> bool:
        if self.bounds is None:
            return True
        th = self.theta
        return bool(np.all(th >= self.bounds[:, 0]) and np.all(th <= self.bounds[:, 1]))


def check_bounds(spec: ModelSpec, bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.shape != (spec.r + 2, 2):
        raise DomainError(f"bounds must have shape ({spec.r + 2}, 2), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DomainError("bounds must be finite")
    if np.any(b[:, 0] >= b[:, 1]):
        raise DomainError("every bound needs lo < hi")
    if b[0, 0] <= 0:
        raise DomainError("the omega lower bound must be positive")
    return b
