"""Exact and high-SNR outage probability, and delay-constrained throughput.

Exact CDFs are single quadratures over the first-hop channel gain; high-SNR
forms expose the diversity order per scheme. All probabilities are clipped to
[0, 1]. Asymptotic operations are never silently substituted for exact ones;
curve assembly tags every point with its provenance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy import special as sp

from .beamforming import Scheme, SchemeInfeasibleError
from .channel import kappa
from .config import SystemConfig
from .specfun import (bessel_k, cdf_beta_gamma_product, expint_en,
                      gamma_lower_reg, gamma_upper_reg)

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-11, limit=300)
# beyond this lower limit the no-outage mass is below double precision
_HOPELESS_L = 600.0


def _quad_features(fn, lo: float, hi: float, features) -> float:
    """Adaptive quadrature with breakpoints at known transition scales.

    The integrands here mix widely separated scales (a sharp onset near the
    lower limit, a CDF transition at the second-hop scale, the exp tail);
    unhinted adaptive panels can step straight over the narrow ones.
    """
    pts = sorted({float(p) for p in features if lo < p < hi})
    total = 0.0
    for a, b in zip([lo] + pts, pts + [hi]):
        val, _ = integrate.quad(fn, a, b, **_QUAD_OPTS)
        total += val
    return total


def _decades(scale: float, lo_exp: int = -3, hi_exp: int = 9):
    if scale <= 0.0 or not math.isfinite(scale):
        return ()
    return tuple(scale * 10.0 ** k for k in range(lo_exp, hi_exp + 1))


def _onsets(low: float):
    return tuple(low * (1.0 + 10.0 ** k) for k in range(-9, 3))


@dataclass(frozen=True)
class OutageQuery:
    scheme: Scheme
    cfg: SystemConfig
    alpha: float
    gamma_th: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError("alpha must lie in [0, 1)")
        if self.gamma_th < 0.0:
            raise ValueError("gamma_th must be nonnegative")

    @classmethod
    def from_rate(cls, scheme: Scheme, cfg: SystemConfig, alpha: float) -> "OutageQuery":
        return cls(scheme=scheme, cfg=cfg, alpha=alpha, gamma_th=cfg.gamma_th)

    @property
    def kappa(self) -> float:
        return kappa(self.alpha, self.cfg.eta)


@dataclass(frozen=True)
class OutageCurve:
    axis: str
    grid: tuple
    values: tuple
    provenance: tuple
    ci95: tuple = field(default=())


def _clip01(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


def _upper(limit: float, m_r: int) -> float:
    return limit + 50.0 + 10.0 * m_r


# ---------------------------------------------------------------------------
# exact CDFs


def outage_tzf_exact(q: OutageQuery) -> float:
    if q.cfg.m_t <= 1:
        raise SchemeInfeasibleError("TZF needs more than one transmit antenna")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    cfg = q.cfg
    low = cfg.dl1 * z / cfg.rho1
    if low > _HOPELESS_L:
        return 1.0
    beta = cfg.dl1 * cfg.dl2 * z / (k * cfg.rho2)
    norm = sp.gamma(cfg.m_r)

    # complementary form: head = first-hop-only outage, tail = second-hop
    # shortfall given the first hop survives; additive, cancellation-free
    def integrand(x: float) -> float:
        return (gamma_lower_reg(cfg.m_t - 1, beta / x)
                * x ** (cfg.m_r - 1) * math.exp(-x) / norm)

    hi = _upper(low, cfg.m_r)
    tail = _quad_features(integrand, low, hi, _decades(beta) + _onsets(low))
    return _clip01(gamma_lower_reg(cfg.m_r, low) + tail)


def outage_rzf_exact(q: OutageQuery) -> float:
    if q.cfg.m_r <= 1:
        raise SchemeInfeasibleError("RZF needs more than one receive antenna")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    cfg = q.cfg
    low = cfg.dl1 * z / cfg.rho1
    if low > _HOPELESS_L:
        return 1.0
    beta = cfg.dl1 * cfg.dl2 * z / (k * cfg.rho2)
    norm = sp.gamma(cfg.m_r)
    hi = _upper(low, cfg.m_r)
    features = _decades(beta) + _onsets(low)

    def part_a(x: float) -> float:
        return gamma_lower_reg(cfg.m_t, beta / x) * x ** (cfg.m_r - 1) * math.exp(-x)

    def part_b(x: float) -> float:
        return gamma_upper_reg(cfg.m_t, beta / x) * math.exp(-x)

    ia = _quad_features(part_a, low, hi, features)
    ib = _quad_features(part_b, low, hi, features)
    val = (gamma_lower_reg(cfg.m_r, low)
           + (ia + low ** (cfg.m_r - 1) * ib) / norm)
    return _clip01(val)


def _mrc_constants(q: OutageQuery):
    cfg = q.cfg
    k = q.kappa
    c1 = cfg.rho1 / cfg.dl1
    c2 = k * cfg.rho1 * cfg.sigma2_rr / cfg.dl1
    c3 = k * cfg.rho2 / (cfg.dl1 * cfg.dl2)
    return c1, c2, c3


def outage_mrc_case1_exact(q: OutageQuery) -> float:
    """MRC/MRT outage with a single transmit antenna (m_t = 1, m_r >= 2)."""
    cfg = q.cfg
    if cfg.m_t != 1 or cfg.m_r < 2:
        raise SchemeInfeasibleError("case requires m_t = 1 and m_r >= 2")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    if q.kappa == 0.0:
        return 1.0
    c1, c2, c3 = _mrc_constants(q)
    low = z / c1
    if low > _HOPELESS_L:
        return 1.0
    norm = sp.gamma(cfg.m_r)

    from .specfun import _beta_gamma_cdf_closed

    def survive_deficit(y: float) -> float:
        if c2 == 0.0:
            li_cdf = 1.0
        else:
            li_cdf = _beta_gamma_cdf_closed((c1 / z - 1.0 / y) / c2, cfg.m_r)
        deficit = 1.0 - li_cdf * math.exp(-z / (c3 * y))
        return deficit * y ** (cfg.m_r - 1) * math.exp(-y) / norm

    features = _decades(z / c3) + _onsets(low)
    tail = _quad_features(survive_deficit, low, _upper(low, cfg.m_r), features)
    return _clip01(gamma_lower_reg(cfg.m_r, low) + tail)


def outage_mrc_case2_exact(q: OutageQuery) -> float:
    """MRC/MRT outage with a single receive antenna (m_r = 1)."""
    cfg = q.cfg
    if cfg.m_r != 1:
        raise SchemeInfeasibleError("case requires m_r = 1")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    if q.kappa == 0.0:
        return 1.0
    c1, c2, c3 = _mrc_constants(q)
    low = z / c1
    if low > _HOPELESS_L:
        return 1.0

    def survive_deficit(x: float) -> float:
        if c2 == 0.0:
            li_factor = 1.0
        else:
            li_factor = 1.0 - math.exp(-(c1 * x / z - 1.0) / (c2 * x))
        deficit = 1.0 - li_factor * gamma_upper_reg(cfg.m_t, z / (c3 * x))
        return deficit * math.exp(-x)

    features = _decades(z / c3) + _onsets(low)
    tail = _quad_features(survive_deficit, low, _upper(low, 1), features)
    return _clip01((1.0 - math.exp(-low)) + tail)


def outage_exact(q: OutageQuery) -> float:
    """Dispatch to the scheme's exact expression, if one exists."""
    if q.scheme is Scheme.TZF:
        return outage_tzf_exact(q)
    if q.scheme is Scheme.RZF:
        return outage_rzf_exact(q)
    if q.scheme is Scheme.MRC_MRT:
        if q.cfg.m_t == 1 and q.cfg.m_r >= 2:
            return outage_mrc_case1_exact(q)
        if q.cfg.m_r == 1:
            return outage_mrc_case2_exact(q)
        raise SchemeInfeasibleError(
            "MRC/MRT outage has closed form only for m_t = 1 or m_r = 1")
    raise SchemeInfeasibleError(
        "the optimum scheme has no closed-form outage; use the Monte Carlo engine")


def has_exact_outage(scheme: Scheme, cfg: SystemConfig) -> bool:
    if scheme is Scheme.TZF:
        return cfg.m_t > 1
    if scheme is Scheme.RZF:
        return cfg.m_r > 1
    if scheme is Scheme.MRC_MRT:
        return cfg.m_t == 1 or cfg.m_r == 1
    return False


# ---------------------------------------------------------------------------
# high-SNR approximations


def outage_tzf_asymptotic(q: OutageQuery) -> float:
    if q.cfg.m_t <= 1:
        raise SchemeInfeasibleError("TZF needs more than one transmit antenna")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    cfg = q.cfg
    m_r, m_t = cfg.m_r, cfg.m_t
    low = cfg.dl1 * z / cfg.rho1
    x = (cfg.rho1 / cfg.rho2) * cfg.dl2 / k
    gam = sp.gamma
    if m_t > m_r + 1:
        # k-series of the second-hop gamma CDF, resummed to lower incomplete
        # gammas: exact in x, truncated only in the vanishing first-hop scale
        series = (x ** m_r * gam(m_t - 1 - m_r) * gamma_lower_reg(m_t - 1 - m_r, x)
                  - gam(m_t - 1) * gamma_lower_reg(m_t - 1, x)) / m_r
        val = (1.0 / gam(m_r + 1)
               + series / (gam(m_t - 1) * gam(m_r))) * low ** m_r
    elif m_t == m_r + 1:
        # both hops decay at the same order; E_1(low) carries the log growth
        # and the x-dependent pieces resum exactly
        ein_x = np.euler_gamma + math.log(x) + expint_en(1, x)
        bracket = (x ** m_r * (expint_en(1, low) - ein_x + 1.0 / m_r)
                   - gam(m_r) * gamma_lower_reg(m_r, x))
        val = (1.0 / gam(m_r + 1) + bracket / (m_r * gam(m_r) ** 2)) * low ** m_r
    else:
        val = (gam(m_r - m_t + 1) / (gam(m_t) * gam(m_r))
               * (cfg.dl2 / k) ** (m_t - 1) * (cfg.dl1 * z / cfg.rho2) ** (m_t - 1))
    return _clip01(val)


def outage_rzf_asymptotic(q: OutageQuery) -> float:
    if q.cfg.m_r <= 1:
        raise SchemeInfeasibleError("RZF needs more than one receive antenna")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    cfg = q.cfg
    m_r, m_t = cfg.m_r, cfg.m_t
    low = cfg.dl1 * z / cfg.rho1
    x = (cfg.rho1 / cfg.rho2) * cfg.dl2 / k
    if m_r < m_t + 1:
        val = low ** (m_r - 1) / sp.gamma(m_r)
    elif m_r == m_t + 1:
        val = (1.0 + x ** m_t / sp.gamma(m_t + 1)) * low ** m_t / sp.gamma(m_r)
    else:
        val = (sp.gamma(m_r - m_t) / (sp.gamma(m_r) * sp.gamma(m_t + 1))
               * (cfg.dl2 / k) ** m_t * (cfg.dl1 * z / cfg.rho2) ** m_t)
    return _clip01(val)


def outage_mrc_case1_asymptotic(q: OutageQuery) -> float:
    cfg = q.cfg
    if cfg.m_t != 1 or cfg.m_r < 2:
        raise SchemeInfeasibleError("case requires m_t = 1 and m_r >= 2")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    if cfg.sigma2_rr == 0.0:
        li_cdf = 1.0
    else:
        li_cdf = cdf_beta_gamma_product(1.0 / (k * cfg.sigma2_rr * z), cfg.m_r)
    y = cfg.dl1 * cfg.dl2 * z / (cfg.rho2 * k)
    tail = 2.0 / sp.gamma(cfg.m_r) * y ** (cfg.m_r / 2.0) * bessel_k(cfg.m_r, 2.0 * math.sqrt(y))
    return _clip01(1.0 - li_cdf * tail)


def outage_mrc_floor(q: OutageQuery) -> float:
    """SNR-independent outage level set by residual loopback interference."""
    cfg = q.cfg
    if cfg.m_t != 1 or cfg.m_r < 2:
        raise SchemeInfeasibleError("floor requires m_t = 1 and m_r >= 2")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0 or cfg.sigma2_rr == 0.0:
        return 0.0
    return _clip01(1.0 - cdf_beta_gamma_product(1.0 / (k * cfg.sigma2_rr * z), cfg.m_r))


def outage_mrc_case2_asymptotic(q: OutageQuery, k_max: int = 0) -> float:
    cfg = q.cfg
    if cfg.m_r != 1:
        raise SchemeInfeasibleError("case requires m_r = 1")
    if not (0 <= k_max <= 10):
        raise ValueError("k_max must lie in 0..10")
    z = q.gamma_th
    if z <= 0.0:
        return 0.0
    k = q.kappa
    if k == 0.0:
        return 1.0
    low = cfg.dl1 * z / cfg.rho1
    if low > _HOPELESS_L:
        return 1.0
    x = (cfg.rho1 / cfg.rho2) * cfg.dl2 / k
    series = 0.0
    for j in range(k_max + 1):
        term = ((-1.0) ** j / (math.factorial(j) * (cfg.m_t + j))
                * x ** (cfg.m_t + j) * expint_en(cfg.m_t + j, low))
        series += term
    bracket = math.exp(-low) - low * series / sp.gamma(cfg.m_t)
    if cfg.sigma2_rr == 0.0:
        li_factor = 1.0
    else:
        li_factor = 1.0 - math.exp(-1.0 / (k * cfg.sigma2_rr * z))
    return _clip01(1.0 - li_factor * bracket)


def outage_asymptotic(q: OutageQuery) -> float:
    if q.scheme is Scheme.TZF:
        return outage_tzf_asymptotic(q)
    if q.scheme is Scheme.RZF:
        return outage_rzf_asymptotic(q)
    if q.scheme is Scheme.MRC_MRT:
        if q.cfg.m_t == 1 and q.cfg.m_r >= 2:
            return outage_mrc_case1_asymptotic(q)
        if q.cfg.m_r == 1:
            return outage_mrc_case2_asymptotic(q)
        raise SchemeInfeasibleError(
            "MRC/MRT high-SNR form exists only for m_t = 1 or m_r = 1")
    raise SchemeInfeasibleError("the optimum scheme has no high-SNR closed form")


# ---------------------------------------------------------------------------
# delay-constrained throughput


def build_outage_curve(scheme: Scheme, cfg: SystemConfig, alpha: float,
                       p_s_dbm_grid, engine: str = "exact",
                       n_trials: int = 100_000, seed: int = 1) -> OutageCurve:
    """Outage versus source power (dBm axis) with per-point provenance."""
    from dataclasses import replace as dc_replace

    from .config import dbm_to_watts

    values, provenance, ci = [], [], []
    for ps in p_s_dbm_grid:
        cfg_p = dc_replace(cfg, p_s=dbm_to_watts(float(ps)))
        q = OutageQuery.from_rate(scheme, cfg_p, alpha)
        if engine == "exact":
            values.append(outage_exact(q))
            provenance.append("exact")
            ci.append(0.0)
        elif engine == "asymptotic":
            values.append(outage_asymptotic(q))
            provenance.append("asymptotic")
            ci.append(0.0)
        elif engine == "monte-carlo":
            from .montecarlo import estimate_outage
            est = estimate_outage(scheme, cfg_p, alpha, cfg_p.gamma_th,
                                  n_trials, seed)
            values.append(est.mean)
            provenance.append(f"monte-carlo({est.ci_halfwidth_95:.3g})")
            ci.append(est.ci_halfwidth_95)
        else:
            raise ValueError(f"unknown engine: {engine!r}")
    curve = OutageCurve(axis="p_s_dbm", grid=tuple(float(p) for p in p_s_dbm_grid),
                        values=tuple(values), provenance=tuple(provenance),
                        ci95=tuple(ci))
    if any(not (0.0 <= v <= 1.0) for v in curve.values):
        raise AssertionError("outage values must be probabilities")
    return curve


def delay_throughput(alpha: float, r_c: float, p_out: float) -> float:
    """(1 - p_out) * R_c * (1 - alpha)."""
    if not (0.0 <= p_out <= 1.0):
        raise ValueError("p_out must lie in [0, 1]")
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    return (1.0 - p_out) * r_c * (1.0 - alpha)


def optimal_alpha_delay(scheme: Scheme, cfg: SystemConfig,
                        n_trials: int = 200_000, seed: int = 1,
                        coarse_step: float = 0.01, refine_tol: float = 1e-5):
    """Maximize delay-constrained throughput over the time split.

    Uses the scheme's exact outage expression when one exists, otherwise the
    Monte Carlo engine with common random numbers across alpha. Coarse grid
    plus golden-section refinement.
    """
    if has_exact_outage(scheme, cfg):
        def p_out(a: float) -> float:
            return outage_exact(OutageQuery.from_rate(scheme, cfg, a))
    else:
        from .montecarlo import estimate_outage

        def p_out(a: float) -> float:
            return estimate_outage(scheme, cfg, a, cfg.gamma_th,
                                   n_trials, seed).mean

    def objective(a: float) -> float:
        return delay_throughput(a, cfg.r_c, p_out(a))

    grid = np.arange(coarse_step, 1.0, coarse_step)
    vals = [objective(float(a)) for a in grid]
    best_idx = int(np.argmax(vals))
    best_alpha, best_val = float(grid[best_idx]), vals[best_idx]
    lo = max(1e-9, best_alpha - coarse_step)
    hi = min(1.0 - 1e-9, best_alpha + coarse_step)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    v1, v2 = objective(x1), objective(x2)
    while hi - lo > refine_tol:
        if v1 >= v2:
            hi, x2, v2 = x2, x1, v1
            x1 = hi - invphi * (hi - lo)
            v1 = objective(x1)
        else:
            lo, x1, v1 = x1, x2, v2
            x2 = lo + invphi * (hi - lo)
            v2 = objective(x2)
    for v, a in ((v1, x1), (v2, x2)):
        if v > best_val:
            best_val, best_alpha = v, a
    return best_alpha, best_val
