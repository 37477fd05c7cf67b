"""Scalar special functions used by the closed-form throughput and outage math.

Thin, domain-checked wrappers over scipy.special, plus the Beta x Gamma
product CDF evaluated by adaptive quadrature (the one place a Meijer-G value
is needed, specialized rather than general).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    est_abs_error: float


def lambert_w0(x):
    """Principal branch W0: solves W e^W = x for x >= -1/e, W >= -1."""
    arr = np.asarray(x, dtype=np.float64)
    branch = -1.0 / np.e
    if np.any(arr < branch * (1.0 + 1e-12)):
        raise ValueError("lambert_w0 requires x >= -1/e")
    w = sp.lambertw(np.maximum(arr, branch), k=0).real
    # the float branch point itself can round below the true -1/e; W there is -1
    w = np.where(arr <= branch * (1.0 - 1e-12), -1.0, w)
    w = np.where(np.isnan(w) & (np.abs(arr - branch) < 1e-12), -1.0, w)
    return float(w) if np.isscalar(x) else w


def gamma_upper_reg(a: float, x) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a)."""
    if a <= 0.0:
        raise ValueError("gamma_upper_reg requires a > 0")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("gamma_upper_reg requires x >= 0")
    q = sp.gammaincc(a, arr)
    return float(q) if np.isscalar(x) else q


def gamma_lower_reg(a: float, x) -> float:
    """Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x)."""
    if a <= 0.0:
        raise ValueError("gamma_lower_reg requires a > 0")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("gamma_lower_reg requires x >= 0")
    p = sp.gammainc(a, arr)
    return float(p) if np.isscalar(x) else p


def expint_en(n: int, x) -> float:
    """Exponential integral E_n(x) = int_1^inf e^{-x t} / t^n dt, x > 0."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("expint_en requires integer n >= 1")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ValueError("expint_en requires x > 0")
    e = sp.expn(n, arr)
    return float(e) if np.isscalar(x) else e


def bessel_k(nu: int, x) -> float:
    """Modified Bessel function of the second kind, integer order."""
    if not (isinstance(nu, (int, np.integer)) and nu >= 0):
        raise ValueError("bessel_k requires integer nu >= 0")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ValueError("bessel_k requires x > 0")
    k = sp.kv(nu, arr)
    return float(k) if np.isscalar(x) else k


def digamma(x) -> float:
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ValueError("digamma requires x > 0")
    d = sp.psi(arr)
    return float(d) if np.isscalar(x) else d


def _beta_gamma_integrand(x: float, t: float, m_r: int) -> float:
    # P(Z2 <= t/x) * gamma-pdf(x), for x > t (else the beta CDF saturates at 1)
    u = t / x
    fbeta = 1.0 - (1.0 - u) ** (m_r - 1)
    return fbeta * x ** (m_r - 1) * np.exp(-x) / sp.gamma(m_r)


def cdf_beta_gamma_product_result(t: float, m_r: int) -> SpecFunResult:
    """CDF of X = Z * G with Z ~ Beta(1, m_r - 1), G ~ Gamma(m_r, 1).

    Evaluated as the mixture integral over the Gamma density; for x <= t the
    Beta factor is 1 and the contribution is the Gamma CDF up to t.
    """
    if not (isinstance(m_r, (int, np.integer)) and m_r >= 2):
        raise ValueError("cdf_beta_gamma_product requires integer m_r >= 2")
    if t < 0.0:
        raise ValueError("cdf_beta_gamma_product requires t >= 0")
    if t == 0.0:
        return SpecFunResult(0.0, 0.0)
    head = sp.gammainc(m_r, t)  # x in (0, t]: F_beta == 1
    upper = t + 50.0 + 10.0 * m_r  # e^{-x} tail beyond this is < 1e-12 relative
    tail, err = integrate.quad(
        _beta_gamma_integrand, t, upper, args=(t, m_r),
        epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    if err > 1e-8:
        raise ArithmeticError(f"quadrature error {err:.2e} exceeds tolerance")
    value = min(1.0, head + tail)
    return SpecFunResult(float(value), float(err))


def cdf_beta_gamma_product(t: float, m_r: int) -> float:
    return cdf_beta_gamma_product_result(t, m_r).value


def _beta_gamma_cdf_closed(t: float, m_r: int) -> float:
    """Binomial expansion of the mixture integral: a finite sum of upper
    incomplete gammas. Used in quadrature hot loops; agrees with
    cdf_beta_gamma_product to ~1e-12 (tested)."""
    if t <= 0.0:
        return 0.0
    if not np.isfinite(t):
        return 1.0
    head = sp.gammainc(m_r, t)
    tail = 0.0
    for j in range(1, m_r):
        tail -= sp.comb(m_r - 1, j, exact=True) * (-t) ** j * sp.gammaincc(m_r - j, t) * sp.gamma(m_r - j)
    return float(min(1.0, max(0.0, head + tail / sp.gamma(m_r))))
