"""ARCH(infinity) weight sequences and their derivatives.

Every supported family maps a shape vector ``zeta`` to coefficients
``psi_1, psi_2, ...`` of the generating function ``psi(z) = sum_j psi_j z^j``.
The rational families (GARCH, FGARCH, FIGARCH) are evaluated as power-series
algebra: a numerator sequence filtered through ``1 / b(z)``.  The exponential
and hyperbolic kernels (GEXP, GHYP) are evaluated in closed form.

Shape-vector layout per family:

======== =============================================
GARCH    a[1..m], b[1..n]
FGARCH   a[1..m], b[1..n], d
FIGARCH  a[1..m], b[1..n], d
GEXP     e[1..m], f[1..m] (only when free), d
GHYP     e[1..m], f[1..m] (only when free), d
ZERO     (empty)
======== =============================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import lfilter
from scipy.special import digamma, gammaln, polygamma

from archpmle.exceptions import DomainError, PositivityError, StabilityError

__all__ = [
    "AssumptionReport",
    "Family",
    "ModelSpec",
    "WeightParams",
    "check_assumptions",
    "frac_coeffs",
    "frac_coeffs_d_deriv",
    "psi_at_one",
    "ratio_coeffs",
    "weights",
    "weights_hessian",
    "weights_jacobian",
]

ROOT_MARGIN = 1e-8
RANK_RTOL = 1e-10


class Family(str, Enum):
    GARCH = "garch"
    FGARCH = "fgarch"
    FIGARCH = "figarch"
    GEXP = "gexp"
    GHYP = "ghyp"
    ZERO = "zero"


HYPERBOLIC = frozenset({Family.FGARCH, Family.FIGARCH, Family.GHYP})
RATIONAL = frozenset({Family.GARCH, Family.FGARCH, Family.FIGARCH})
KERNEL = frozenset({Family.GEXP, Family.GHYP})


@dataclass(frozen=True)
class ModelSpec:
    """Weight family plus structural orders.

    Parameters
    ----------
    family : Family or str
        One of ``garch``, ``fgarch``, ``figarch``, ``gexp``, ``ghyp``, ``zero``.
    m : int
        Numerator order (rational families) or number of kernel components.
    n : int
        Denominator order; rational families only.
    free_f : bool
        GEXP/GHYP only: estimate the shape exponents ``f_i``.
    fixed_f : tuple of float
        GEXP/GHYP only: the exponents used when ``free_f`` is False.
        Defaults to zeros.
    """

    family: Family
    m: int = 0
    n: int = 0
    free_f: bool = False
    fixed_f: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        try:
            fam = Family(self.family)
        except ValueError:
            raise DomainError(f"unknown weight family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        m, n = int(self.m), int(self.n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        if m < 0 or n < 0:
            raise DomainError("orders m and n must be nonnegative")
        if fam is Family.GARCH and m < 1:
            raise DomainError("garch requires m >= 1")
        if fam is Family.FGARCH and m < 1:
            raise DomainError("fgarch requires m >= 1")
        if fam in KERNEL:
            if m < 1:
                raise DomainError(f"{fam.value} requires m >= 1")
            if n != 0:
                raise DomainError(f"{fam.value} has no denominator order; n must be 0")
            if self.free_f:
                object.__setattr__(self, "fixed_f", ())
            else:
                f = tuple(float(v) for v in self.fixed_f) or (0.0,) * m
                if len(f) != m:
                    raise DomainError(f"fixed_f must have length m={m}")
                _check_f(np.asarray(f))
                object.__setattr__(self, "fixed_f", f)
        else:
            if self.free_f or self.fixed_f:
                raise DomainError("free_f/fixed_f apply only to gexp and ghyp")
        if fam is Family.ZERO and (m or n):
            raise DomainError("zero family takes no orders")

    @property
    def r(self) -> int:
        """Dimension of the shape vector."""
        fam = self.family
        if fam is Family.ZERO:
            return 0
        if fam is Family.GARCH:
            return self.m + self.n
        if fam in RATIONAL:
            return self.m + self.n + 1
        return self.m * (2 if self.free_f else 1) + 1

    @property
    def hyperbolic(self) -> bool:
        return self.family in HYPERBOLIC

    def param_names(self) -> list[str]:
        fam = self.family
        if fam is Family.ZERO:
            return []
        if fam in RATIONAL:
            names = [f"a[{i + 1}]" for i in range(self.m)]
            names += [f"b[{i + 1}]" for i in range(self.n)]
        else:
            names = [f"e[{i + 1}]" for i in range(self.m)]
            if self.free_f:
                names += [f"f[{i + 1}]" for i in range(self.m)]
        if fam is not Family.GARCH:
            names.append("d")
        return names

    def unpack(self, zeta) -> WeightParams:
        """Split a shape vector into named blocks."""
        z = np.asarray(zeta, dtype=float).ravel()
        if z.shape[0] != self.r:
            raise DomainError(f"{self.family.value} expects {self.r} shape parameters, got {z.shape[0]}")
        m, n = self.m, self.n
        fam = self.family
        if fam is Family.ZERO:
            return WeightParams()
        if fam in RATIONAL:
            d = float(z[m + n]) if fam is not Family.GARCH else None
            return WeightParams(a=z[:m].copy(), b=z[m : m + n].copy(), d=d)
        e = z[:m].copy()
        f = z[m : 2 * m].copy() if self.free_f else np.asarray(self.fixed_f, dtype=float)
        return WeightParams(e=e, f=f, d=float(z[-1]))

    def pack(self, params: WeightParams) -> np.ndarray:
        fam = self.family
        if fam is Family.ZERO:
            return np.zeros(0)
        parts: list = []
        if fam in RATIONAL:
            parts += [params.a, params.b]
        else:
            parts.append(params.e)
            if self.free_f:
                parts.append(params.f)
        if fam is not Family.GARCH:
            parts.append([params.d])
        z = np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])
        if z.shape[0] != self.r:
            raise DomainError(f"{fam.value} expects {self.r} shape parameters, got {z.shape[0]}")
        return z


@dataclass
class WeightParams:
    """Named view of a shape vector; unused blocks are empty."""

    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    e: np.ndarray = field(default_factory=lambda: np.zeros(0))
    f: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d: float | None = None


def _check_f(f: np.ndarray) -> None:
    if np.any(~np.isfinite(f)) or np.any(f < 0) or np.any(np.diff(f) < 0):
        raise DomainError("shape exponents must satisfy 0 <= f_1 <= ... <= f_m < inf")


def _check_count(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"sequence length must be a positive integer, got {n}")
    return int(n)


def _check_frac(d: float, n: int) -> int:
    if not (0.0 < d <= 1.0):
        raise DomainError(f"fractional order d must lie in (0, 1], got {d}")
    return _check_count(n)


def _check_stable(b) -> None:
    b = np.asarray(b, dtype=float)
    if b.size == 0:
        return
    # np.roots wants highest degree first: -b_n z^n - ... - b_1 z + 1
    coeffs = np.concatenate([-b[::-1], [1.0]])
    coeffs = np.trim_zeros(coeffs, "f")
    if coeffs.size <= 1:
        return
    roots = np.roots(coeffs)
    if np.any(np.abs(roots) <= 1.0 + ROOT_MARGIN):
        raise StabilityError(
            f"b(z) has a root with modulus {np.abs(roots).min():.6g} <= 1; denominator not invertible"
        )


def validate(spec: ModelSpec, zeta) -> WeightParams:
    """Check the family invariants; return the unpacked parameters."""
    p = spec.unpack(zeta)
    fam = spec.family
    if fam in RATIONAL:
        if np.any(p.a <= 0) or np.any(p.b <= 0):
            raise DomainError("a_j and b_j must be strictly positive")
        if fam is not Family.GARCH and not (0.0 < p.d < 1.0):
            raise DomainError(f"{fam.value} requires d in (0, 1), got {p.d}")
        _check_stable(p.b)
    elif fam in KERNEL:
        if np.any(p.e <= 0):
            raise DomainError("e_i must be strictly positive")
        if not (0.0 < p.d < np.inf):
            raise DomainError(f"{fam.value} requires d in (0, inf), got {p.d}")
        _check_f(p.f)
    return p


# ---------------------------------------------------------------------------
# fractional and ratio expansions


def frac_coeffs(d: float, n: int) -> np.ndarray:
    """Coefficients of ``z^1 .. z^n`` in ``1 - (1 - z)^d``.

    Uses the recursion ``p_1 = d``, ``p_{j+1} = p_j (j - d) / (j + 1)``.
    """
    n = _check_frac(d, n)
    factors = np.empty(n)
    factors[0] = d
    j = np.arange(1, n, dtype=float)
    factors[1:] = (j - d) / (j + 1.0)
    return np.cumprod(factors)


def frac_coeffs_d_deriv(d: float, n: int, order: int = 1) -> np.ndarray:
    """First or second derivative in ``d`` of :func:`frac_coeffs`.

    Differentiating ``p_{j+1} = p_j (j - d)/(j + 1)`` gives
    ``D_{j+1} = D_j (j - d)/(j + 1) - p_j/(j + 1)``; the second derivative
    follows the same pattern with ``-2 D_j/(j + 1)``.
    """
    n = _check_frac(d, n)
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    p = frac_coeffs(d, n)
    if d == 1.0:
        return _frac_deriv_loop(p, d, order)
    # p_j = d prod_{i<j} (i - d)/(i + 1), so the recursion has the closed
    # form D1 = p s, D2 = p (s^2 + s') with s the log-derivative of p_j.
    i = np.arange(1, n, dtype=float)
    s = np.empty(n)
    s[0] = 1.0 / d
    s[1:] = 1.0 / d - np.cumsum(1.0 / (i - d))
    if order == 1:
        return p * s
    ds = np.empty(n)
    ds[0] = -1.0 / d**2
    ds[1:] = -1.0 / d**2 - np.cumsum(1.0 / (i - d) ** 2)
    return p * (s * s + ds)


def _frac_deriv_loop(p: np.ndarray, d: float, order: int) -> np.ndarray:
    n = p.shape[0]
    d1 = np.empty(n)
    d2 = np.empty(n)
    d1[0], d2[0] = 1.0, 0.0
    for j in range(1, n):
        r = (j - d) / (j + 1.0)
        d1[j] = d1[j - 1] * r - p[j - 1] / (j + 1.0)
        d2[j] = d2[j - 1] * r - 2.0 * d1[j - 1] / (j + 1.0)
    return d1 if order == 1 else d2


def ratio_coeffs(a, b, n: int, figarch_form: bool = False) -> np.ndarray:
    """Coefficients of ``z^1 .. z^n`` in ``a(z)/b(z)`` or ``{1 - a(z)}/b(z)``.

    ``a(z) = sum_{j=1}^m a_j z^j`` and ``b(z) = 1 - sum_{j=1}^n b_j z^j``.

    Raises
    ------
    StabilityError
        If ``b(z)`` has a zero with modulus at most ``1 + 1e-8``.
    """
    n = _check_count(n)
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    _check_stable(b)
    num = np.zeros(n + 1)
    k = min(a.size, n)
    if figarch_form:
        num[0] = 1.0
        num[1 : k + 1] = -a[:k]
    else:
        num[1 : k + 1] = a[:k]
    return lfilter([1.0], np.concatenate([[1.0], -b]), num)[1:]


# ---------------------------------------------------------------------------
# power-series helpers; all sequences are indexed 0..N along axis 0


def _shift(seq: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(seq)
    if k < seq.shape[0]:
        out[k:] = seq[: seq.shape[0] - k]
    return out


def _fir(poly: np.ndarray, seq: np.ndarray) -> np.ndarray:
    return lfilter(poly, [1.0], seq, axis=0)


def _rational(spec: ModelSpec, p: WeightParams, n: int, order: int):
    """GARCH/FGARCH/FIGARCH as ``psi = K + Num(z)/b(z)``."""
    fam = spec.family
    m, nb = spec.m, spec.n
    bpoly = np.concatenate([[1.0], -p.b])

    def div_b(seq, times=1):
        for _ in range(times):
            seq = lfilter([1.0], bpoly, seq, axis=0)
        return seq

    L = n + 1
    # Columns of dnum/d2num follow the (a..., d) coordinates; b handled apart.
    nx = m + (0 if fam is Family.GARCH else 1)
    dnum = np.zeros((L, nx))
    d2num = np.zeros((L, nx, nx))
    const = 0.0
    if fam is Family.GARCH:
        num = np.zeros(L)
        k = min(m, n)
        num[1 : k + 1] = p.a[:k]
        for l in range(1, k + 1):
            dnum[l, l - 1] = 1.0
    else:
        pi = np.zeros(L)
        pi[1:] = frac_coeffs(p.d, n)
        pi1 = np.zeros(L)
        pi2 = np.zeros(L)
        if order >= 1:
            pi1[1:] = frac_coeffs_d_deriv(p.d, n, 1)
        if order >= 2:
            pi2[1:] = frac_coeffs_d_deriv(p.d, n, 2)
        if fam is Family.FGARCH:
            # a(z)/z times Pi(z)
            num = _fir(p.a, pi)
            for l in range(1, m + 1):
                dnum[:, l - 1] = _shift(pi, l - 1)
                d2num[:, l - 1, m] = d2num[:, m, l - 1] = _shift(pi1, l - 1)
            dnum[:, m] = _fir(p.a, pi1)
            d2num[:, m, m] = _fir(p.a, pi2)
        else:
            const = 1.0
            one_minus_a = np.concatenate([[1.0], -p.a])
            one_minus_pi = -pi
            one_minus_pi[0] = 1.0
            num = -_fir(one_minus_a, one_minus_pi)
            for l in range(1, m + 1):
                dnum[:, l - 1] = _shift(one_minus_pi, l)
                d2num[:, l - 1, m] = d2num[:, m, l - 1] = -_shift(pi1, l)
            dnum[:, m] = _fir(one_minus_a, pi1)
            d2num[:, m, m] = _fir(one_minus_a, pi2)

    psi = div_b(num)
    psi[0] += const
    if order == 0:
        return psi[1:], None, None

    r = spec.r
    # coordinate index of each x-column in zeta: a -> 0..m-1, d -> m+n
    xidx = list(range(m)) + ([m + nb] if fam is not Family.GARCH else [])
    jac = np.zeros((L, r))
    jac[:, xidx] = div_b(dnum)
    num_b2 = div_b(num, 2) if nb else None
    for l in range(1, nb + 1):
        jac[:, m + l - 1] = _shift(num_b2, l)
    if order == 1:
        return psi[1:], jac[1:], None

    hess = np.zeros((L, r, r))
    hx = div_b(d2num.reshape(L, -1)).reshape(L, nx, nx)
    for u, iu in enumerate(xidx):
        for v, iv in enumerate(xidx):
            hess[:, iu, iv] = hx[:, u, v]
    if nb:
        dnum_b2 = div_b(dnum, 2)
        num_b3 = div_b(num_b2)
        for l in range(1, nb + 1):
            cross = _shift(dnum_b2, l)
            hess[:, xidx, m + l - 1] = cross
            hess[:, m + l - 1, xidx] = cross
            for k in range(1, nb + 1):
                hess[:, m + l - 1, m + k - 1] = 2.0 * _shift(num_b3, l + k)
    return psi[1:], jac[1:], hess[1:]


def _kernel(spec: ModelSpec, p: WeightParams, n: int, order: int):
    """GEXP/GHYP: psi_j = sum_i e_i k_i(j) with closed-form log-derivatives."""
    m = spec.m
    d = p.d
    f = np.asarray(p.f, dtype=float)[None, :]
    j = np.arange(1, n + 1, dtype=float)[:, None]
    if spec.family is Family.GEXP:
        logj = np.log(j)
        logk = (f + 1.0) * np.log(d) + f * logj - d * j - gammaln(f + 1.0)
        lf = np.log(d) + logj - digamma(f + 1.0)
        ld = (f + 1.0) / d - j
        ldd = -(f + 1.0) / d**2
        lfd = np.full_like(logk, 1.0 / d)
    else:
        logj1 = np.log(j + 1.0)
        loglog = np.log(logj1)
        logk = np.log(d) + f * loglog - (d + 1.0) * logj1 - gammaln(f + 1.0)
        lf = loglog - digamma(f + 1.0)
        ld = 1.0 / d - logj1
        ldd = np.full_like(logk, -1.0 / d**2)
        lfd = np.zeros_like(logk)
    k = np.exp(logk)
    terms = p.e[None, :] * k
    psi = terms.sum(axis=1)
    if order == 0:
        return psi, None, None

    r = spec.r
    free = spec.free_f
    ie = np.arange(m)
    jf = np.arange(m, 2 * m) if free else None
    jd = r - 1
    jac = np.zeros((n, r))
    jac[:, ie] = k
    if free:
        jac[:, jf] = terms * lf
    jac[:, jd] = (terms * ld).sum(axis=1)
    if order == 1:
        return psi, jac, None

    hess = np.zeros((n, r, r))
    ked = k * ld
    hess[:, ie, jd] = ked
    hess[:, jd, ie] = ked
    hess[:, jd, jd] = (terms * (ld * ld + ldd)).sum(axis=1)
    if free:
        lff = -polygamma(1, f + 1.0)
        kef = k * lf
        hess[:, ie, jf] = kef
        hess[:, jf, ie] = kef
        hess[:, jf, jf] = terms * (lf * lf + lff)
        tfd = terms * (lf * ld + lfd)
        hess[:, jf, jd] = tfd
        hess[:, jd, jf] = tfd
    return psi, jac, hess


def _nonpositive(psi: np.ndarray) -> np.ndarray:
    """Indices of weights that are negative or vanish before the last nonzero.

    Trailing exact zeros come from floating-point underflow of exponentially
    decaying weights (or a finite ARCH order) and are not counted.
    """
    nz = np.flatnonzero(psi != 0)
    last = nz[-1] if nz.size else -1
    bad = (psi < 0) | ((psi == 0) & (np.arange(psi.shape[0]) < last))
    if last < 0:
        bad[:] = True
    return np.flatnonzero(bad)


def _evaluate(spec: ModelSpec, zeta, n: int, order: int, check_positive: bool = True):
    n = _check_count(n)
    p = validate(spec, zeta)
    fam = spec.family
    if fam is Family.ZERO:
        psi = np.zeros(n)
        jac = np.zeros((n, 0)) if order >= 1 else None
        hess = np.zeros((n, 0, 0)) if order >= 2 else None
        return psi, jac, hess
    if fam in RATIONAL:
        out = _rational(spec, p, n, order)
    else:
        out = _kernel(spec, p, n, order)
    psi = out[0]
    if not np.all(np.isfinite(psi)):
        raise DomainError("non-finite weight encountered")
    if check_positive:
        bad = _nonpositive(psi)
        if bad.size:
            j = int(bad[0]) + 1
            raise PositivityError(f"weight psi_{j} = {psi[j - 1]:.6g} is not positive", index=j)
    return out


def weights(spec: ModelSpec, zeta, n: int, check_positive: bool = True) -> np.ndarray:
    """Weights ``psi_1 .. psi_n``.

    Raises
    ------
    PositivityError
        If any weight is ``<= 0`` (only FIGARCH can trigger this for valid
        parameters; the ZERO family is exempt).
    """
    return _evaluate(spec, zeta, n, 0, check_positive)[0]


def weights_jacobian(spec: ModelSpec, zeta, n: int, check_positive: bool = True) -> np.ndarray:
    """``n x r`` matrix of first derivatives ``d psi_j / d zeta``."""
    return _evaluate(spec, zeta, n, 1, check_positive)[1]


def weights_hessian(spec: ModelSpec, zeta, n: int, check_positive: bool = True) -> np.ndarray:
    """``n x r x r`` array of second derivatives."""
    return _evaluate(spec, zeta, n, 2, check_positive)[2]


def weights_all(spec: ModelSpec, zeta, n: int, order: int = 2, check_positive: bool = True):
    """Weights with derivatives up to ``order`` in one pass: ``(psi, jac, hess)``."""
    return _evaluate(spec, zeta, n, order, check_positive)


def psi_at_one(spec: ModelSpec, zeta) -> float | None:
    """Closed-form ``sum_j psi_j`` where one is available, else None."""
    p = validate(spec, zeta)
    fam = spec.family
    if fam is Family.ZERO:
        return 0.0
    if fam in (Family.GARCH, Family.FGARCH):
        return float(p.a.sum() / (1.0 - p.b.sum()))
    if fam is Family.FIGARCH:
        return 1.0
    if np.any(p.f != 0):
        return None
    if fam is Family.GEXP:
        q = np.exp(-p.d)
        return float(p.e.sum() * p.d * q / (1.0 - q))
    from scipy.special import zeta as hurwitz

    return float(p.e.sum() * p.d * hurwitz(p.d + 1.0, 2.0))


# ---------------------------------------------------------------------------
# regularity diagnostics


@dataclass
class AssumptionReport:
    """Numeric diagnostics of the weight regularity conditions.

    ``empirical_k`` is ``max_{k <= j <= N} psi_j / psi_k``; ``tail_constant``
    is ``max psi_j j^(d+1)`` over the upper half of the lags (hyperbolic
    families only).  ``rank_rows`` are 1-based lags.
    """

    positive: bool
    min_weight: float
    first_nonpositive: int | None
    decay_kind: str
    decay_rate: float | None
    theoretical_rate: float | None
    empirical_k: float
    tail_constant: float | None
    rank: int
    r: int
    rank_rows: list[int]
    rank_determinant: float | None
    rank_ok: bool
    common_zeros: bool
    clt_unsafe: bool
    notes: list[str] = field(default_factory=list)


def _greedy_rows(jac: np.ndarray, window: int) -> list[int]:
    rows: list[int] = []
    for j in range(min(window, jac.shape[0])):
        trial = jac[rows + [j]]
        if _numeric_rank(trial) > len(rows):
            rows.append(j)
            if len(rows) == jac.shape[1]:
                break
    return rows


def _numeric_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def check_assumptions(spec: ModelSpec, zeta, n: int = 10_000, window: int = 64) -> AssumptionReport:
    """Positivity, decay, quasi-monotonicity, rank and CLT-threshold checks."""
    n = _check_count(n)
    p = validate(spec, zeta)
    psi, jac, _ = _evaluate(spec, zeta, max(n, window), 1, check_positive=False)
    psi_n = psi[:n]
    notes: list[str] = []
    fam = spec.family

    nonpos = _nonpositive(psi_n)
    positive = nonpos.size == 0
    if fam is Family.ZERO:
        notes.append("zero family: weights vanish identically (test-only)")
    elif positive and psi_n[-1] == 0:
        last = int(np.flatnonzero(psi_n)[-1]) + 1
        notes.append(f"weights beyond lag {last} are exactly zero (underflow or finite order)")

    lags = np.arange(1, n + 1, dtype=float)
    tail = slice(n // 2, n)
    decay_kind = "hyperbolic" if spec.hyperbolic else ("none" if fam is Family.ZERO else "exponential")
    theoretical = None
    decay_rate = None
    tail_constant = None
    sel = np.flatnonzero(psi_n[tail] > 0) + n // 2
    if spec.hyperbolic:
        theoretical = p.d + 1.0
        if sel.size >= 2:
            slope = np.polyfit(np.log(lags[sel]), np.log(psi_n[sel]), 1)[0]
            decay_rate = float(-slope)
            tail_constant = float(np.max(psi_n[sel] * lags[sel] ** theoretical))
    elif decay_kind == "exponential":
        if fam is Family.GEXP:
            theoretical = p.d
        # exponential weights underflow quickly; fit over the positive range
        pos = np.flatnonzero(psi_n > 0)
        pos = pos[pos.size // 2 :]
        if pos.size >= 2:
            slope = np.polyfit(lags[pos], np.log(psi_n[pos]), 1)[0]
            decay_rate = float(-slope)

    if positive and fam is not Family.ZERO:
        head = psi_n[: int(np.flatnonzero(psi_n)[-1]) + 1]
        running_min = np.minimum.accumulate(head)
        empirical_k = float(np.max(head / running_min))
    else:
        empirical_k = float("inf") if fam is not Family.ZERO else 1.0

    r = spec.r
    rows = _greedy_rows(jac, window) if r else []
    rank = len(rows)
    det = float(np.linalg.det(jac[rows])) if rank == r and r > 0 else None

    common = False
    if fam in RATIONAL and spec.n and spec.m:
        broots = np.roots(np.concatenate([-p.b[::-1], [1.0]]))
        apoly = p.a[::-1]  # a(z)/z, highest degree first
        common = bool(np.any(np.abs(np.polyval(apoly, broots)) < 1e-8))
        if common:
            notes.append("a(z) and b(z) share a zero: shape parameters not identified")

    clt_unsafe = bool(spec.hyperbolic and p.d <= 0.5)
    if clt_unsafe:
        notes.append("d <= 1/2: truncation bias may invalidate normal approximation")

    return AssumptionReport(
        positive=positive,
        min_weight=float(psi_n.min()),
        first_nonpositive=int(nonpos[0]) + 1 if nonpos.size else None,
        decay_kind=decay_kind,
        decay_rate=decay_rate,
        theoretical_rate=theoretical,
        empirical_k=empirical_k,
        tail_constant=tail_constant,
        rank=rank,
        r=r,
        rank_rows=[j + 1 for j in rows],
        rank_determinant=det,
        rank_ok=rank == r,
        common_zeros=common,
        clt_unsafe=clt_unsafe,
        notes=notes,
    )
