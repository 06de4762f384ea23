"""Gaussian pseudo-maximum likelihood for ARCH(infinity) models."""

from archpmle.estimator import FitOptions, FitResult, fit
from archpmle.exceptions import (
    ArchError,
    BoundaryWarning,
    DomainError,
    NonConvergenceWarning,
    PositivityError,
    SimulationOverflowError,
    SingularHessian,
    StabilityError,
    StationarityWarning,
)
from archpmle.inference import InferenceResult, population_matrices, sandwich
from archpmle.likelihood import Likelihood
from archpmle.montecarlo import MCConfig, MCReport, gaussian_identity_check, run_mc
from archpmle.params import ParamVector, default_bounds
from archpmle.process import SimConfig, find_rho, moment_condition, simulate
from archpmle.weights import Family, ModelSpec, check_assumptions, weights

__all__ = [
    "ArchError",
    "BoundaryWarning",
    "DomainError",
    "Family",
    "FitOptions",
    "FitResult",
    "InferenceResult",
    "Likelihood",
    "MCConfig",
    "MCReport",
    "ModelSpec",
    "NonConvergenceWarning",
    "ParamVector",
    "PositivityError",
    "SimConfig",
    "SimulationOverflowError",
    "SingularHessian",
    "StabilityError",
    "StationarityWarning",
    "check_assumptions",
    "default_bounds",
    "find_rho",
    "fit",
    "gaussian_identity_check",
    "moment_condition",
    "population_matrices",
    "run_mc",
    "sandwich",
    "simulate",
    "weights",
]
