import math
import warnings

import numpy as np
import pytest

from archpmle.exceptions import DomainError, SimulationOverflowError, StationarityWarning
from archpmle.innovations import ged_abs_moment, ged_sample
from archpmle.params import ParamVector
from archpmle.process import SimConfig, find_rho, moment_condition, scan_rho, simulate
from archpmle.weights import ModelSpec, weights

GEXP = ModelSpec("gexp", 1)
FIG0 = ModelSpec("figarch", 0, 0)


def test_zero_family_is_location_scale():
    th = ParamVector(ModelSpec("zero"), 4.0, 1.0, [])
    y = simulate(SimConfig(th, 50, gamma=0.5, seed=3, burn_in=0)).y
    eps = ged_sample(0.5, 50, np.random.default_rng(3))
    np.testing.assert_array_equal(y, 1.0 + 2.0 * eps)


def test_first_step_uses_omega_only(gexp_theta):
    y = simulate(SimConfig(gexp_theta, 3, seed=5, burn_in=0)).y
    eps = ged_sample(0.5, 3, np.random.default_rng(5))
    assert y[0] == math.sqrt(0.2) * eps[0]
    psi = weights(GEXP, [0.5, 0.7], 2)
    s2 = 0.2 + psi[0] * y[0] ** 2
    assert y[1] == pytest.approx(math.sqrt(s2) * eps[1], rel=1e-14)


def test_brute_force_recursion():
    th = ParamVector(ModelSpec("fgarch", 1, 1), 0.3, 0.1, [0.3, 0.4, 0.45])
    T = 300
    y = simulate(SimConfig(th, T, gamma=1.0, seed=8, burn_in=0, n_weights=T)).y
    eps = ged_sample(1.0, T, np.random.default_rng(8))
    psi = weights(th.spec, th.zeta, T)
    x = np.zeros(T)
    for t in range(T):
        s2 = th.omega + sum(psi[j - 1] * x[t - j] ** 2 for j in range(1, t + 1))
        x[t] = math.sqrt(s2) * eps[t]
    np.testing.assert_allclose(y, 0.1 + x, rtol=1e-12, atol=1e-14)


def test_reproducible(gexp_theta):
    a = simulate(SimConfig(gexp_theta, 500, seed=42, burn_in=100)).y
    b = simulate(SimConfig(gexp_theta, 500, seed=42, burn_in=100)).y
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("seed", [1])
def test_unconditional_variance_and_autocorrelation(gexp_theta, seed):
    y = simulate(SimConfig(gexp_theta, 100_000, seed=seed, burn_in=5_000)).y
    total = 0.5 * 0.7 * math.exp(-0.7) / (1 - math.exp(-0.7))
    assert y.var() == pytest.approx(0.2 / (1 - total), abs=0.02)
    yc = y - y.mean()
    for lag in range(1, 6):
        rho = (yc[lag:] @ yc[:-lag]) / (yc @ yc)
        assert abs(rho) < 0.02


def test_nonstationary_guard():
    th = ParamVector(FIG0, 0.1, 0.0, [0.4])
    with pytest.raises(DomainError):
        simulate(SimConfig(th, 10, burn_in=0))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        y = simulate(SimConfig(th, 10, burn_in=0, allow_nonstationary=True)).y
    assert y.shape == (10,)
    assert any(issubclass(w.category, StationarityWarning) for w in rec)


def test_overflow_reports_step():
    # explosive ARCH(1): log x_t^2 drifts upward by about 0.34 per step
    th = ParamVector(ModelSpec("garch", 1, 0), 1.0, 0.0, [5.0])
    with pytest.raises(SimulationOverflowError) as err, warnings.catch_warnings():
        warnings.simplefilter("ignore")
        simulate(SimConfig(th, 5000, seed=0, burn_in=0, allow_nonstationary=True))
    assert 100 < err.value.t <= 5000


def test_simconfig_invariants(gexp_theta):
    for kw in ({"T": 0}, {"T": 5, "n_weights": 0}, {"T": 5, "burn_in": -1}):
        with pytest.raises(DomainError):
            SimConfig(gexp_theta, **kw)
    assert SimConfig(gexp_theta, 5, n_weights=100).effective_burn_in == 1000
    assert SimConfig(gexp_theta, 5).effective_burn_in == 100_000


# -- moment condition -------------------------------------------------------------


def test_gexp_moment_example():
    rho = 0.95
    c = moment_condition(GEXP, [0.5, 0.7], 0.5, rho)
    q = math.exp(-0.7 * rho)
    closed = (0.35**rho) * q / (1 - q) * 2**0.95 * math.gamma(1.45) / math.sqrt(math.pi)
    assert c.value == pytest.approx(closed, rel=1e-10)
    assert c.value == pytest.approx(0.377, abs=5e-4)
    assert c.verdict == "yes"


def test_figarch_divergent_rows():
    d = 0.45
    rows = scan_rho(FIG0, [d], 0.5, [0.5, 0.6, 1 / (1 + d) - 1e-9], 10_000)
    assert all(r.verdict == "divergent-sum" and math.isinf(r.value) for r in rows)


def test_figarch_no_rho_gaussian():
    assert find_rho(FIG0, [0.45], 0.5, np.arange(0.70, 0.995, 0.01), 1_000_000) is None


def test_figarch_heavy_shape_finds_rho():
    # the heavy-tailed GED makes the moment factor small enough
    best = find_rho(FIG0, [0.45], 20.0, np.round(np.arange(0.70, 0.995, 0.01), 2), 1_000_000)
    assert best is not None and best.verdict == "yes"
    assert best.value + best.tail_bound < 1


def test_value_monotone_in_gamma():
    for spec, z, rho in ((GEXP, [0.5, 0.7], 0.9), (FIG0, [0.45], 0.9)):
        vals = [moment_condition(spec, z, g, rho, 100_000).value for g in (0.5, 1, 10, 20)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("spec,z", [(FIG0, [0.3]), (ModelSpec("ghyp", 1), [0.5, 0.8])])
def test_tail_bound_covers_doubling(spec, z):
    a = moment_condition(spec, z, 0.5, 0.9, 50_000)
    b = moment_condition(spec, z, 0.5, 0.9, 100_000)
    assert 0 <= b.value - a.value <= a.tail_bound


def test_rho_to_one_recovers_weight_sum():
    c = moment_condition(GEXP, [0.5, 0.7], 0.5, 1 - 1e-9)
    assert c.value == pytest.approx(weights(GEXP, [0.5, 0.7], 10_000).sum(), rel=1e-6)
    assert ged_abs_moment(0.5, 2 - 2e-9) == pytest.approx(1.0, abs=1e-8)


def test_rho_domain():
    for rho in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            moment_condition(GEXP, [0.5, 0.7], 0.5, rho)


def test_gexp_find_rho():
    best = find_rho(GEXP, [0.5, 0.7], 0.5, np.round(np.arange(0.5, 0.995, 0.01), 2), 100_000)
    assert best is not None and best.verdict == "yes"
