import math
from dataclasses import replace

import numpy as np
import pytest

from fdrelay.beamforming import Scheme, SchemeInfeasibleError
from fdrelay.channel import kappa
from fdrelay.config import config_from_key_values, dbm_to_watts
from fdrelay.montecarlo import estimate_outage
from fdrelay.outage import (OutageQuery, delay_throughput, has_exact_outage,
                            optimal_alpha_delay, outage_asymptotic,
                            outage_exact, outage_mrc_case1_asymptotic,
                            outage_mrc_case1_exact, outage_mrc_case2_asymptotic,
                            outage_mrc_case2_exact, outage_mrc_floor,
                            outage_rzf_asymptotic, outage_rzf_exact,
                            outage_tzf_asymptotic, outage_tzf_exact)
from fdrelay.specfun import expint_en


def _cfg(p_s_dbm=10, d1=25.0, d2=12.0, m_r=3, m_t=3, sig=0.1, **kw):
    cfg = config_from_key_values({"p_s_dbm": p_s_dbm, "d1": d1, "d2": d2,
                                  "m_r": m_r, "m_t": m_t, **kw})
    return replace(cfg, sigma2_rr=sig)


def _q(cfg, alpha=0.5, scheme=Scheme.TZF, gamma=None):
    return OutageQuery(scheme=scheme, cfg=cfg, alpha=alpha,
                       gamma_th=cfg.gamma_th if gamma is None else gamma)


def test_limits_zero_and_one():
    cfg = _cfg()
    for fn in (outage_tzf_exact, outage_rzf_exact):
        assert fn(_q(cfg, gamma=0.0)) == 0.0
        assert fn(_q(cfg, gamma=1e12)) == pytest.approx(1.0, abs=1e-9)
    cfg1 = _cfg(m_r=3, m_t=1)
    assert outage_mrc_case1_exact(_q(cfg1, gamma=0.0, scheme=Scheme.MRC_MRT)) == 0.0
    assert outage_mrc_case1_exact(_q(cfg1, gamma=1e12, scheme=Scheme.MRC_MRT)) == pytest.approx(1.0, abs=1e-9)
    cfg2 = _cfg(m_r=1, m_t=3)
    assert outage_mrc_case2_exact(_q(cfg2, gamma=0.0, scheme=Scheme.MRC_MRT)) == 0.0
    assert outage_mrc_case2_exact(_q(cfg2, gamma=1e12, scheme=Scheme.MRC_MRT)) == pytest.approx(1.0, abs=1e-9)


def test_antenna_guards():
    with pytest.raises(SchemeInfeasibleError):
        outage_tzf_exact(_q(_cfg(m_t=1)))
    with pytest.raises(SchemeInfeasibleError):
        outage_rzf_exact(_q(_cfg(m_r=1)))
    with pytest.raises(SchemeInfeasibleError):
        outage_mrc_case1_exact(_q(_cfg(m_r=3, m_t=2), scheme=Scheme.MRC_MRT))
    with pytest.raises(SchemeInfeasibleError):
        outage_mrc_case2_exact(_q(_cfg(m_r=2, m_t=3), scheme=Scheme.MRC_MRT))
    with pytest.raises(SchemeInfeasibleError):
        outage_exact(_q(_cfg(), scheme=Scheme.OPTIMUM))
    assert has_exact_outage(Scheme.MRC_MRT, _cfg(m_r=2, m_t=2)) is False
    assert has_exact_outage(Scheme.MRC_MRT, _cfg(m_r=1, m_t=2)) is True


def test_exact_cdfs_monotone_in_threshold():
    cases = [
        (outage_tzf_exact, _cfg()),
        (outage_rzf_exact, _cfg()),
        (outage_mrc_case1_exact, _cfg(m_r=3, m_t=1)),
        (outage_mrc_case2_exact, _cfg(m_r=1, m_t=3)),
    ]
    zs = np.geomspace(0.01, 100.0, 1000)
    for fn, cfg in cases:
        vals = [fn(_q(cfg, scheme=Scheme.MRC_MRT if "mrc" in fn.__name__ else Scheme.TZF,
                      gamma=float(z))) for z in zs]
        arr = np.array(vals)
        assert np.all((arr >= 0.0) & (arr <= 1.0))
        assert np.all(np.diff(arr) >= -1e-9)


@pytest.mark.parametrize("scheme,cfg,alpha", [
    (Scheme.TZF, _cfg(), 0.5),
    (Scheme.TZF, _cfg(p_s_dbm=14, d2=8.0), 0.3),
    (Scheme.RZF, _cfg(), 0.5),
    (Scheme.RZF, _cfg(p_s_dbm=14), 0.7),
    (Scheme.MRC_MRT, _cfg(p_s_dbm=15, d1=20, d2=10, m_r=3, m_t=1, sig=0.15), 0.5),
    (Scheme.MRC_MRT, _cfg(p_s_dbm=15, d1=20, d2=10, m_r=1, m_t=3, sig=0.15), 0.5),
    (Scheme.TZF, _cfg(m_r=1, m_t=3, p_s_dbm=8, d1=15.0, d2=10.0), 0.5),
])
def test_exact_matches_monte_carlo(scheme, cfg, alpha):
    n = 250_000
    exact = outage_exact(_q(cfg, alpha=alpha, scheme=scheme))
    mc = estimate_outage(scheme, cfg, alpha, cfg.gamma_th, n, seed=1234)
    se = max(math.sqrt(max(mc.mean * (1 - mc.mean), 1e-12) / n), 1e-9)
    assert abs(exact - mc.mean) <= 3.0 * se


def test_li_free_limits_match_monte_carlo():
    cfg1 = _cfg(p_s_dbm=12, d1=20, d2=10, m_r=3, m_t=1, sig=0.0)
    exact = outage_mrc_case1_exact(_q(cfg1, scheme=Scheme.MRC_MRT))
    mc = estimate_outage(Scheme.MRC_MRT, cfg1, 0.5, cfg1.gamma_th, 200_000, 7)
    se = math.sqrt(max(mc.mean * (1 - mc.mean), 1e-12) / 200_000)
    assert abs(exact - mc.mean) <= 3.0 * se
    cfg2 = _cfg(p_s_dbm=12, d1=20, d2=10, m_r=1, m_t=3, sig=0.0)
    exact = outage_mrc_case2_exact(_q(cfg2, scheme=Scheme.MRC_MRT))
    mc = estimate_outage(Scheme.MRC_MRT, cfg2, 0.5, cfg2.gamma_th, 200_000, 8)
    se = math.sqrt(max(mc.mean * (1 - mc.mean), 1e-12) / 200_000)
    assert abs(exact - mc.mean) <= 3.0 * se


def _slope(fn, cfg, grid_dbm):
    vals = []
    for ps in grid_dbm:
        q = _q(replace(cfg, p_s=dbm_to_watts(ps)),
               scheme=Scheme.TZF if fn is outage_tzf_asymptotic else Scheme.RZF)
        vals.append(fn(q))
    coef = np.polyfit(grid_dbm / 10.0, np.log10(vals), 1)
    return -coef[0]


@pytest.mark.parametrize("fn,m_r,m_t,order", [
    (outage_tzf_asymptotic, 2, 3, 2), (outage_tzf_asymptotic, 3, 3, 2),
    (outage_tzf_asymptotic, 3, 2, 1), (outage_tzf_asymptotic, 1, 3, 1),
    (outage_rzf_asymptotic, 2, 3, 1), (outage_rzf_asymptotic, 3, 3, 2),
    (outage_rzf_asymptotic, 3, 2, 2), (outage_rzf_asymptotic, 3, 1, 1),
])
def test_diversity_slopes(fn, m_r, m_t, order):
    cfg = _cfg(d1=10.0, d2=2.0, m_r=m_r, m_t=m_t)
    slope = _slope(fn, cfg, np.arange(20.0, 40.1, 2.0))
    assert abs(slope - order) <= 0.1


def test_power_law_branches_scale_exactly():
    # M_T < M_R + 1: pure (1/rho2)^(M_T-1) law
    cfg = _cfg(d1=10.0, d2=2.0, m_r=3, m_t=2)
    v1 = outage_tzf_asymptotic(_q(cfg))
    v2 = outage_tzf_asymptotic(_q(replace(cfg, sigma2_d=cfg.sigma2_d / 2.0)))
    assert v2 == pytest.approx(v1 / 2.0 ** (cfg.m_t - 1), rel=1e-12)
    # RZF with M_R < M_T + 1: pure (1/rho1)^(M_R-1) law
    cfg = _cfg(d1=10.0, d2=2.0, m_r=2, m_t=3)
    v1 = outage_rzf_asymptotic(_q(cfg, scheme=Scheme.RZF))
    v2 = outage_rzf_asymptotic(_q(replace(cfg, sigma2_r=cfg.sigma2_r / 2.0),
                                  scheme=Scheme.RZF))
    assert v2 == pytest.approx(v1 / 2.0, rel=1e-12)


@pytest.mark.parametrize("m_r,m_t,scheme", [
    (2, 3, Scheme.TZF), (3, 3, Scheme.TZF), (3, 2, Scheme.TZF), (1, 3, Scheme.TZF),
    (2, 3, Scheme.RZF), (3, 3, Scheme.RZF), (3, 2, Scheme.RZF), (3, 1, Scheme.RZF),
])
def test_asymptotic_consistent_with_exact(m_r, m_t, scheme):
    cfg = _cfg(p_s_dbm=22, d1=10.0, d2=2.0, m_r=m_r, m_t=m_t, sig=0.05)
    q = _q(cfg, scheme=scheme)
    exact = outage_exact(q)
    approx = outage_asymptotic(q)
    assert exact > 1e-12  # the quadrature still resolves this point
    assert abs(approx - exact) <= 0.10 * exact


def test_mrc_case1_asymptotics_and_floor():
    cfg = _cfg(p_s_dbm=30, d1=10.0, d2=10.0, m_r=3, m_t=1, sig=0.1)
    q = _q(cfg, scheme=Scheme.MRC_MRT)
    exact = outage_mrc_case1_exact(q)
    approx = outage_mrc_case1_asymptotic(q)
    assert abs(approx - exact) <= 0.10 * exact
    floor = outage_mrc_floor(q)
    # the high-SNR form approaches the floor as the second hop strengthens
    big = replace(cfg, sigma2_d=cfg.sigma2_d * 1e-12)
    assert outage_mrc_case1_asymptotic(_q(big, scheme=Scheme.MRC_MRT)) == pytest.approx(
        outage_mrc_floor(_q(big, scheme=Scheme.MRC_MRT)), abs=1e-6)
    assert floor > 0.0
    # floor limits
    assert outage_mrc_floor(_q(replace(cfg, sigma2_rr=0.0), scheme=Scheme.MRC_MRT)) == 0.0
    assert outage_mrc_floor(_q(cfg, scheme=Scheme.MRC_MRT, gamma=1e15)) == pytest.approx(1.0, abs=1e-9)


def test_mrc_case2_series():
    # k_max = 0 must reproduce the compact one-term expression exactly
    cfg = _cfg(p_s_dbm=26, d1=10.0, d2=1.0, m_r=1, m_t=3, sig=0.1)
    q = _q(cfg, scheme=Scheme.MRC_MRT)
    k = kappa(q.alpha, cfg.eta)
    z = q.gamma_th
    low = cfg.dl1 * z / cfg.rho1
    x = (cfg.rho1 / cfg.rho2) * cfg.dl2 / k
    compact = 1.0 - (1.0 - math.exp(-1.0 / (k * cfg.sigma2_rr * z))) * (
        math.exp(-low) - x ** cfg.m_t / math.gamma(cfg.m_t + 1)
        * low * expint_en(cfg.m_t, low))
    assert outage_mrc_case2_asymptotic(q, 0) == pytest.approx(compact, rel=1e-12)
    # convergence at moderate arguments
    a9 = outage_mrc_case2_asymptotic(q, 9)
    a10 = outage_mrc_case2_asymptotic(q, 10)
    assert abs(a10 - a9) <= 1e-8
    exact = outage_mrc_case2_exact(q)
    assert abs(a10 - exact) <= 0.10 * exact
    with pytest.raises(ValueError):
        outage_mrc_case2_asymptotic(q, 11)


def test_delay_throughput_values():
    assert delay_throughput(0.3, 2.0, 1.0) == 0.0
    assert delay_throughput(0.5, 2.0, 0.0) == pytest.approx(1.0)
    lo = delay_throughput(0.2, 2.0, 0.2)
    hi = delay_throughput(0.2, 2.0, 0.4)
    mid = delay_throughput(0.2, 2.0, 0.3)
    assert mid == pytest.approx(0.5 * (lo + hi), rel=1e-12)
    with pytest.raises(ValueError):
        delay_throughput(0.5, 2.0, 1.5)


def test_optimal_alpha_delay_analytic():
    cfg = _cfg()
    alpha, value = optimal_alpha_delay(Scheme.TZF, cfg)
    grid = np.arange(0.01, 1.0, 0.01)
    best = max(delay_throughput(float(a), cfg.r_c,
                                outage_exact(_q(cfg, alpha=float(a)))) for a in grid)
    assert value >= best - 1e-9
    assert 0.0 < alpha < 1.0
    # refinement stability
    _, v2 = optimal_alpha_delay(Scheme.TZF, cfg, coarse_step=0.005)
    assert abs(v2 - value) <= 1e-4 * max(value, 1e-12)


def test_optimal_alpha_delay_outage_free_pushes_alpha_down():
    # overwhelming SNR: outage is ~0 for alpha in a wide range, so the
    # (1 - alpha) factor drives the optimum toward the left edge
    cfg = _cfg(p_s_dbm=30, d1=5.0, d2=2.0)
    alpha, value = optimal_alpha_delay(Scheme.TZF, cfg)
    assert alpha <= 0.02
    assert value == pytest.approx(cfg.r_c * (1.0 - alpha), rel=1e-3)
