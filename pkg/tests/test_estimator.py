import warnings

import numpy as np
import pytest

from archpmle.estimator import FitOptions, fit
from archpmle.exceptions import DomainError, NonConvergenceWarning, PositivityError
from archpmle.likelihood import Likelihood
from archpmle.params import ParamVector
from archpmle.process import SimConfig, simulate
from archpmle.weights import ModelSpec

from conftest import GEXP_BOUNDS

ZERO = ModelSpec("zero")


@pytest.fixture(scope="module")
def gexp_data():
    th = ParamVector(ModelSpec("gexp", 1), 0.2, 0.0, [0.5, 0.7])
    return simulate(SimConfig(th, 2000, seed=21, burn_in=2000)).y


def test_zero_family_closed_form():
    y = np.random.default_rng(0).standard_normal(5000) * 0.8 + 0.3
    res = fit(y, ZERO, [[0.01, 5.0], [-1.0, 1.0]])
    assert res.converged
    np.testing.assert_allclose(res.theta_hat, [y.var(), y.mean()], rtol=1e-7)


def test_zero_family_clipped():
    y = np.random.default_rng(1).standard_normal(2000) * 2.0 + 0.9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = fit(y, ZERO, [[0.01, 1.0], [-0.5, 0.5]])
    np.testing.assert_allclose(res.theta_hat, [1.0, 0.5])
    assert res.boundary_flags.all()


def test_too_short():
    with pytest.raises(DomainError):
        fit(np.ones(3), ModelSpec("gexp", 1), GEXP_BOUNDS)


def test_bad_bounds():
    with pytest.raises(DomainError):
        fit(np.ones(30), ZERO, [[0.0, 1.0], [-1, 1]])
    with pytest.raises(DomainError):
        fit(np.ones(30), ZERO, [[0.5, 0.1], [-1, 1]])


def test_gexp_fit_properties(gexp_data):
    spec = ModelSpec("gexp", 1)
    opts = FitOptions(seed=3)
    res = fit(gexp_data, spec, GEXP_BOUNDS, opts)
    assert res.converged and res.projected_grad_norm <= opts.grad_tol
    lik = Likelihood(spec, gexp_data)
    for st in res.starts:
        assert st.qll <= lik.qll(st.start)
    assert res.qll_min <= min(st.qll for st in res.starts) + 1e-10
    again = fit(gexp_data, spec, GEXP_BOUNDS, opts)
    assert again.theta_hat.tobytes() == res.theta_hat.tobytes()
    assert again.hessian.tobytes() == res.hessian.tobytes()


def test_more_iterations_never_worse(gexp_data):
    spec = ModelSpec("gexp", 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        few = fit(gexp_data, spec, GEXP_BOUNDS, FitOptions(max_iter=3))
        more = fit(gexp_data, spec, GEXP_BOUNDS, FitOptions(max_iter=6))
    assert more.qll_min <= few.qll_min


def test_start_order_irrelevant(gexp_data):
    spec = ModelSpec("gexp", 1)
    starts = [[0.3, 0.0, 0.4, 1.0], [0.5, 0.1, 0.8, 0.5], [0.1, -0.1, 0.3, 2.0]]
    a = fit(gexp_data, spec, GEXP_BOUNDS, starts=starts)
    b = fit(gexp_data, spec, GEXP_BOUNDS, starts=starts[::-1])
    assert a.theta_hat.tobytes() == b.theta_hat.tobytes()


def test_nonconvergence_warns(gexp_data):
    with pytest.warns(NonConvergenceWarning):
        res = fit(gexp_data, ModelSpec("gexp", 1), GEXP_BOUNDS, FitOptions(max_iter=1, n_starts=1))
    assert not res.converged


def test_figarch_negative_start():
    y = np.random.default_rng(0).standard_normal(100)
    bounds = [[0.05, 1.0], [-0.5, 0.5], [0.05, 0.15], [0.55, 0.65], [0.25, 0.35]]
    with pytest.raises(PositivityError):
        fit(y, ModelSpec("figarch", 1, 1), bounds, FitOptions(n_starts=1))


def test_fit_options_validation():
    with pytest.raises(DomainError):
        FitOptions(grad_tol=0)
    with pytest.raises(DomainError):
        FitOptions(n_starts=0)
