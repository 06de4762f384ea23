import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from archpmle.exceptions import DomainError, PositivityError, StabilityError
from archpmle.weights import (
    ModelSpec,
    check_assumptions,
    frac_coeffs,
    frac_coeffs_d_deriv,
    psi_at_one,
    ratio_coeffs,
    weights,
    weights_hessian,
    weights_jacobian,
)

from conftest import central_diff, rel_err


def gamma_ratio_frac(d, n):
    # coefficient of z^j in 1 - (1 - z)^d is -Gamma(j-d)/(Gamma(-d) Gamma(j+1))
    j = np.arange(1, n + 1)
    sign = -np.sign(math.gamma(-d))
    return sign * np.exp(gammaln(j - d) - gammaln(-d) - gammaln(j + 1))


def long_division(num, den, n):
    """Power-series coefficients of num(z)/den(z), both given lowest order first."""
    num = list(num) + [0.0] * (n + 1)
    out = []
    for j in range(n + 1):
        c = num[j] - sum(den[i] * out[j - i] for i in range(1, min(j, len(den) - 1) + 1))
        out.append(c / den[0])
    return np.array(out)


# -- frac_coeffs ---------------------------------------------------------------


def test_frac_coeffs_examples():
    np.testing.assert_allclose(frac_coeffs(1.0, 3), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(frac_coeffs(0.5, 3), [0.5, 0.125, 0.0625], rtol=1e-14)
    np.testing.assert_allclose(frac_coeffs(0.3, 2), [0.3, 0.105], rtol=1e-14)


@pytest.mark.parametrize("d", [0.1, 0.3, 0.5, 0.77])
def test_frac_coeffs_matches_gamma_ratio(d):
    np.testing.assert_allclose(frac_coeffs(d, 150), gamma_ratio_frac(d, 150), rtol=1e-11)


@pytest.mark.parametrize("d", [0.2, 0.45, 0.9])
def test_frac_partial_sums_closed_form(d):
    n = 1000
    p = frac_coeffs(d, n)
    closed = 1.0 - np.exp(gammaln(n + 1 - d) - gammaln(1 - d) - gammaln(n + 1))
    assert abs(p.sum() - closed) < 1e-10
    assert np.all(p > 0)
    assert np.all(np.diff(np.cumsum(p)) > 0)


def test_frac_coeffs_domain():
    for d in (0.0, -0.1, 1.2):
        with pytest.raises(DomainError):
            frac_coeffs(d, 3)
    with pytest.raises(DomainError):
        frac_coeffs(0.5, 0)


def test_frac_deriv_examples():
    np.testing.assert_allclose(frac_coeffs_d_deriv(0.5, 1, 1), [1.0])
    np.testing.assert_allclose(frac_coeffs_d_deriv(0.5, 2, 1), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(frac_coeffs_d_deriv(0.3, 2, 2), [0.0, -1.0], atol=1e-14)


@pytest.mark.parametrize("d", [0.2, 0.6, 1.0])
def test_frac_deriv_finite_difference(d):
    h = 1e-5
    lo, hi = d - h, min(d + h, 1.0)
    fd1 = (frac_coeffs(hi, 40) - frac_coeffs(lo, 40)) / (hi - lo)
    # one-sided at d = 1, so only first-order accurate there
    assert rel_err(frac_coeffs_d_deriv(d, 40, 1), fd1) < (1e-4 if d == 1.0 else 1e-6)
    dd = 0.4
    fd2 = (frac_coeffs_d_deriv(dd + h, 40, 1) - frac_coeffs_d_deriv(dd - h, 40, 1)) / (2 * h)
    assert rel_err(frac_coeffs_d_deriv(dd, 40, 2), fd2) < 1e-6


# -- ratio_coeffs ----------------------------------------------------------------


def test_ratio_examples():
    np.testing.assert_allclose(ratio_coeffs([0.4], [], 3), [0.4, 0, 0])
    np.testing.assert_allclose(ratio_coeffs([0.4], [0.5], 3), [0.4, 0.2, 0.1], rtol=1e-14)
    np.testing.assert_allclose(ratio_coeffs([], [], 2, figarch_form=True), [0.0, 0.0])


@given(
    a=st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3),
    b=st.lists(st.floats(0.01, 0.3), min_size=0, max_size=2),
)
@settings(max_examples=40, deadline=None)
def test_ratio_matches_long_division(a, b):
    n = 25
    ref = long_division([0.0] + a, [1.0] + [-x for x in b], n)[1:]
    np.testing.assert_allclose(ratio_coeffs(a, b, n), ref, rtol=1e-12, atol=1e-15)


def test_ratio_unstable_denominator():
    with pytest.raises(StabilityError):
        ratio_coeffs([0.4], [1.1], 5)
    with pytest.raises(StabilityError):
        ratio_coeffs([0.4], [0.6, 0.5], 5)


# -- weights ---------------------------------------------------------------------


def test_weights_examples():
    np.testing.assert_allclose(weights(ModelSpec("gexp", 1), [0.5, 1.0], 1), [0.5 * math.exp(-1)], rtol=1e-14)
    np.testing.assert_allclose(weights(ModelSpec("ghyp", 1), [0.5, 1.0], 1), [0.125], rtol=1e-14)
    np.testing.assert_allclose(weights(ModelSpec("fgarch", 1, 0), [1.0, 0.5], 2), [0.5, 0.125], rtol=1e-14)


def test_fgarch_is_convolution_of_ratio_and_frac():
    spec = ModelSpec("fgarch", 2, 1)
    a, b, d = [0.3, 0.1], [0.4], 0.35
    n = 60
    c = ratio_coeffs(a, b, n)
    # psi(z) = a(z)/b(z) * z^-1 * (1 - (1 - z)^d)
    frac = frac_coeffs(d, n + 1)
    ref = np.array([sum(c[k - 1] * frac[j - k] for k in range(1, j + 1)) for j in range(1, n + 1)])
    np.testing.assert_allclose(weights(spec, a + b + [d], n), ref, rtol=1e-12)


def test_figarch_matches_generating_function():
    # psi(z) = 1 - (1 - a(z)) (1 - z)^d / b(z), expanded by long division
    a, b, d = [0.2], [0.5], 0.4
    n = 30
    one_minus_z_d = np.concatenate([[1.0], -frac_coeffs(d, n)])
    num = np.convolve([1.0, -a[0]], one_minus_z_d)[: n + 1]
    q = long_division(num, [1.0, -b[0]], n)
    ref = -q[1:]
    np.testing.assert_allclose(weights(ModelSpec("figarch", 1, 1), a + b + [d], n), ref, rtol=1e-11)


def test_gexp_ghyp_free_f_closed_form():
    j = np.arange(1, 21)
    e, f, d = [0.4, 0.2], [0.5, 1.5], 0.9
    ref = sum(ei * d ** (fi + 1) * j**fi * np.exp(-d * j) / math.gamma(fi + 1) for ei, fi in zip(e, f))
    np.testing.assert_allclose(weights(ModelSpec("gexp", 2, free_f=True), e + f + [d], 20), ref, rtol=1e-13)
    ref = sum(ei * d * np.log(j + 1) ** fi * (j + 1.0) ** (-d - 1) / math.gamma(fi + 1) for ei, fi in zip(e, f))
    np.testing.assert_allclose(weights(ModelSpec("ghyp", 2, free_f=True), e + f + [d], 20), ref, rtol=1e-13)


def test_figarch_negative_weight_raises():
    spec = ModelSpec("figarch", 1, 1)
    with pytest.raises(PositivityError):
        weights(spec, [0.1, 0.6, 0.3], 10)
    psi = weights(spec, [0.1, 0.6, 0.3], 10, check_positive=False)
    assert psi[0] == pytest.approx(-0.2)


def test_spec_invariants():
    with pytest.raises(DomainError):
        ModelSpec("fgarch", 0, 0)
    with pytest.raises(DomainError):
        ModelSpec("gexp", 0)
    with pytest.raises(DomainError):
        ModelSpec("nope", 1)
    assert ModelSpec("figarch", 0, 0).r == 1
    assert ModelSpec("zero").r == 0
    with pytest.raises(DomainError):
        weights(ModelSpec("gexp", 2, free_f=True), [0.1, 0.1, 2.0, 1.0, 0.5], 3)  # f decreasing
    with pytest.raises(DomainError):
        weights(ModelSpec("fgarch", 1, 0), [0.5, 1.0], 3)  # d must be < 1


def test_partial_sums_below_closed_form():
    spec = ModelSpec("fgarch", 1, 1)
    z = [0.3, 0.4, 0.6]
    total = psi_at_one(spec, z)
    assert total == pytest.approx(0.3 / 0.6)
    s = np.cumsum(weights(spec, z, 10_000))
    assert np.all(np.diff(s) > 0) and s[-1] < total
    spec = ModelSpec("gexp", 1)
    assert weights(spec, [0.5, 0.7], 5000).sum() == pytest.approx(psi_at_one(spec, [0.5, 0.7]), rel=1e-12)


# -- derivatives -----------------------------------------------------------------

FD_CASES = [
    ("garch", 1, 1, False, lambda r: [r.uniform(0.05, 0.5), r.uniform(0.05, 0.6)]),
    ("fgarch", 1, 1, False, lambda r: [r.uniform(0.1, 1.0), r.uniform(0.1, 0.7), r.uniform(0.15, 0.85)]),
    ("figarch", 1, 1, False, lambda r: [r.uniform(0.05, 0.2), r.uniform(0.3, 0.6), r.uniform(0.5, 0.8)]),
    ("gexp", 1, 0, False, lambda r: [r.uniform(0.1, 1.0), r.uniform(0.2, 2.0)]),
    ("ghyp", 1, 0, False, lambda r: [r.uniform(0.1, 1.0), r.uniform(0.2, 2.0)]),
    ("gexp", 2, 0, True, lambda r: [*r.uniform(0.1, 1.0, 2), *np.sort(r.uniform(0.2, 2.0, 2)), r.uniform(0.3, 2.0)]),
    ("ghyp", 2, 0, True, lambda r: [*r.uniform(0.1, 1.0, 2), *np.sort(r.uniform(0.2, 2.0, 2)), r.uniform(0.3, 2.0)]),
]


@pytest.mark.parametrize("family,m,n,free,draw", FD_CASES)
def test_jacobian_hessian_finite_differences(family, m, n, free, draw):
    spec = ModelSpec(family, m, n, free_f=free)
    rng = np.random.default_rng(5)
    for _ in range(5):
        z = np.array(draw(rng), dtype=float)
        h = 1e-5 * (1 + np.abs(z))
        f = lambda x: weights(spec, x, 60, check_positive=False)  # noqa: E731
        jac = weights_jacobian(spec, z, 60, check_positive=False)
        assert rel_err(jac, central_diff(f, z, h)) < 1e-5
        g = lambda x: weights_jacobian(spec, x, 60, check_positive=False)  # noqa: E731
        assert rel_err(weights_hessian(spec, z, 60, check_positive=False), central_diff(g, z, h)) < 1e-5


def test_jacobian_examples():
    spec = ModelSpec("gexp", 1)
    assert weights_jacobian(spec, [0.5, 1.0], 1)[0, 0] == pytest.approx(math.exp(-1), rel=1e-14)
    a, d = 0.6, 0.8
    jac = weights_jacobian(ModelSpec("fgarch", 1, 0), [a, d], 2)
    np.testing.assert_allclose(jac, [[d, a], [d * (1 - d) / 2, a * (1 - 2 * d) / 2]], rtol=1e-13)


# -- assumption report -----------------------------------------------------------


def test_rank_example():
    rep = check_assumptions(ModelSpec("fgarch", 1, 0), [0.8, 0.6], 10_000)
    assert rep.rank == 2 and rep.rank_ok
    assert rep.rank_rows == [1, 2]
    assert rep.rank_determinant == pytest.approx(-0.8 * 0.36 / 2, abs=1e-12)
    assert not rep.clt_unsafe


def test_gexp_report():
    rep = check_assumptions(ModelSpec("gexp", 1), [0.5, 0.7], 10_000)
    assert rep.positive and rep.decay_kind == "exponential" and not rep.clt_unsafe


def test_figarch_tail_exponent():
    rep = check_assumptions(ModelSpec("figarch", 0, 0), [0.3], 10_000)
    assert rep.positive
    assert rep.decay_rate == pytest.approx(1.3, abs=0.05)
    assert rep.clt_unsafe


def test_empirical_k_stable_under_doubling():
    spec = ModelSpec("ghyp", 1)
    k1 = check_assumptions(spec, [0.5, 0.6], 5000).tail_constant
    k2 = check_assumptions(spec, [0.5, 0.6], 10_000).tail_constant
    assert np.isfinite(k1) and abs(k2 - k1) / k1 < 0.05
