"""Monte Carlo link-level engine: the universal oracle for every scheme and
the only outage/throughput evaluator for the optimum scheme.

Trials are addressed by (seed, trial index) substreams, evaluated in fixed
chunks, and aggregated with a deterministic pairwise-combinable running
mean/variance, so results are identical regardless of chunking or workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .beamforming import Scheme, SchemeInfeasibleError, scheme_feasible, sinr_coefficients
from .channel import ChannelRealization, draw_channel_batch
from .config import SystemConfig
from .sdr import SdrProblem, optimum_transmit, solve_feasibility
from .timesplit import JointMethod, joint_optimum

CHUNK = 65536
PER_DRAW_OPTIMAL = "per-draw-optimal"

_TIE = 1e-12


@dataclass(frozen=True)
class McEstimate:
    mean: float
    ci_halfwidth_95: float
    n_trials: int
    seed: int


class _RunningMoments:
    """Chan-style combinable running mean and M2 over fixed-order chunks."""

    def __init__(self) -> None:
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add_chunk(self, values: np.ndarray) -> None:
        m = values.size
        if m == 0:
            return
        mean_b = float(values.mean())
        m2_b = float(((values - mean_b) ** 2).sum())
        if self.n == 0:
            self.n, self.mean, self.m2 = m, mean_b, m2_b
            return
        delta = mean_b - self.mean
        n_tot = self.n + m
        self.m2 = self.m2 + m2_b + delta * delta * self.n * m / n_tot
        self.mean = self.mean + delta * m / n_tot
        self.n = n_tot

    def estimate(self, seed: int) -> McEstimate:
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        ci = 1.96 * math.sqrt(var / self.n) if self.n > 0 else math.inf
        return McEstimate(mean=self.mean, ci_halfwidth_95=ci,
                          n_trials=self.n, seed=seed)


# ---------------------------------------------------------------------------
# batched per-scheme SINR


def _norm2(a: np.ndarray, axis=-1) -> np.ndarray:
    return np.sum(np.abs(a) ** 2, axis=axis)


def _unit(a: np.ndarray) -> np.ndarray:
    n = np.sqrt(_norm2(a))[..., None]
    return a / np.maximum(n, 1e-300)


def _pairs_batch(scheme: Scheme, h_sr, h_rd, h_rr):
    """Unit (w_r, w_t) rows for the three closed-form schemes."""
    if scheme is Scheme.MRC_MRT:
        return _unit(h_sr), _unit(h_rd.conj())
    if scheme is Scheme.TZF:
        w_r = _unit(h_sr)
        r = np.einsum("ni,nij->nj", h_sr.conj(), h_rr)
        rn2 = _norm2(r)[:, None]
        coef = np.einsum("nj,nj->n", r, h_rd.conj())[:, None]
        v = np.where(rn2 > 1e-300, h_rd.conj() - r.conj() * coef / np.maximum(rn2, 1e-300),
                     h_rd.conj())
        return w_r, _unit(v)
    if scheme is Scheme.RZF:
        w_t = _unit(h_rd.conj())
        c = np.einsum("nij,nj->ni", h_rr, h_rd.conj())
        cn2 = _norm2(c)[:, None]
        coef = np.einsum("ni,ni->n", c.conj(), h_sr)[:, None]
        v = np.where(cn2 > 1e-300, h_sr - c * coef / np.maximum(cn2, 1e-300), h_sr)
        return _unit(v), w_t
    raise ValueError("optimum scheme has no closed-form pair")


def _sinr_from_pairs(cfg, alpha, h_sr, h_rd, h_rr, w_r, w_t) -> np.ndarray:
    c_first, c_li, c_second = sinr_coefficients(cfg, alpha)
    hsr2 = _norm2(h_sr)
    sig = np.abs(np.einsum("ni,ni->n", w_r.conj(), h_sr)) ** 2
    leak = np.abs(np.einsum("ni,nij,nj->n", w_r.conj(), h_rr, w_t)) ** 2
    first = c_first * sig / (c_li * hsr2 * leak + 1.0)
    second = c_second * hsr2 * np.abs(np.einsum("ni,ni->n", h_rd, w_t)) ** 2
    return np.minimum(first, second)


def _f1_f2_batch(cfg, alpha, h_sr, h_rd, h_rr, w):
    """Optimum-receive first-hop SINR and second-hop SNR for transmit rows w."""
    c_first, c_li, c_second = sinr_coefficients(cfg, alpha)
    hsr2 = _norm2(h_sr)
    u = np.einsum("nij,nj->ni", h_rr, w)
    ca = c_li * hsr2
    num = ca * np.abs(np.einsum("ni,ni->n", h_sr.conj(), u)) ** 2
    den = 1.0 + ca * _norm2(u)
    hop1 = c_first * (hsr2 - num / den)
    hop2 = c_second * hsr2 * np.abs(np.einsum("ni,ni->n", h_rd, w)) ** 2
    return hop1, hop2


def _optimum_candidates(cfg, alpha, h_sr, h_rd, h_rr):
    """Closed-form case split, vectorized.

    Returns (value_lb, value_ub, closed_mask) where value_lb is achieved by a
    candidate vector, value_ub = single-hop upper bound, and closed_mask marks
    draws where one of the one-sided conditions already fires (lb is optimal).
    """
    _, _, c_second = sinr_coefficients(cfg, alpha)
    hsr2 = _norm2(h_sr)
    hrd2 = _norm2(h_rd)
    r = np.einsum("ni,nij->nj", h_sr.conj(), h_rr)
    rn2 = _norm2(r)[:, None]
    coef = np.einsum("nj,nj->n", r, h_rd.conj())[:, None]
    proj = np.where(rn2 > 1e-300, h_rd.conj() - r.conj() * coef / np.maximum(rn2, 1e-300),
                    h_rd.conj())
    # fall back to the matched vector when the projection collapses
    tiny = _norm2(proj) < 1e-300
    w_m = _unit(np.where(tiny[:, None], h_rd.conj(), proj))
    w_mrt = _unit(h_rd.conj())
    f1_m, f2_m = _f1_f2_batch(cfg, alpha, h_sr, h_rd, h_rr, w_m)
    f1_t, f2_t = _f1_f2_batch(cfg, alpha, h_sr, h_rd, h_rr, w_mrt)
    scale = np.maximum(np.maximum(f1_m, f2_t), 1e-300)
    case_i = f1_m <= f2_m + _TIE * scale
    case_ii = f2_t <= f1_t + _TIE * scale
    val_i = np.where(case_i, np.minimum(f1_m, f2_m), -np.inf)
    val_ii = np.where(case_ii, np.minimum(f1_t, f2_t), -np.inf)
    closed_val = np.maximum(val_i, val_ii)
    lb = np.maximum(np.minimum(f1_m, f2_m), np.minimum(f1_t, f2_t))
    ub = np.minimum(f1_m, c_second * hsr2 * hrd2)  # f1_m attains the ceiling
    closed = case_i | case_ii
    lb = np.where(closed, closed_val, lb)
    return lb, np.maximum(ub, lb), closed


def _optimum_exceeds(cfg, alpha, h_sr, h_rd, h_rr, gamma: float) -> np.ndarray:
    """Boolean per draw: optimum end-to-end SINR >= gamma.

    Draws undecided by the closed-form bounds run one fixed-level feasibility
    check each.
    """
    if cfg.m_t == 1:
        w = np.ones((h_sr.shape[0], 1), dtype=np.complex128)
        hop1, hop2 = _f1_f2_batch(cfg, alpha, h_sr, h_rd, h_rr, w)
        return np.minimum(hop1, hop2) >= gamma
    lb, ub, _ = _optimum_candidates(cfg, alpha, h_sr, h_rd, h_rr)
    out = lb >= gamma
    undecided = np.flatnonzero((ub >= gamma) & ~out)
    for i in undecided:
        ch = ChannelRealization(h_sr=h_sr[i], h_rd=h_rd[i], h_rr=h_rr[i])
        prob = SdrProblem.from_channel(ch, cfg, alpha)
        out[i] = solve_feasibility(prob, gamma) is not None
    return out


def _optimum_values(cfg, alpha, h_sr, h_rd, h_rr) -> np.ndarray:
    """Optimum end-to-end SINR per draw (bisection on the undecided set)."""
    if cfg.m_t == 1:
        w = np.ones((h_sr.shape[0], 1), dtype=np.complex128)
        hop1, hop2 = _f1_f2_batch(cfg, alpha, h_sr, h_rd, h_rr, w)
        return np.minimum(hop1, hop2)
    lb, ub, closed = _optimum_candidates(cfg, alpha, h_sr, h_rd, h_rr)
    values = lb.copy()
    for i in np.flatnonzero(~closed):
        ch = ChannelRealization(h_sr=h_sr[i], h_rd=h_rd[i], h_rr=h_rr[i])
        values[i] = optimum_transmit(ch, cfg, alpha).t_star
    return values


def _scheme_sinr_batch(scheme: Scheme, cfg, alpha, h_sr, h_rd, h_rr) -> np.ndarray:
    if scheme is Scheme.OPTIMUM:
        return _optimum_values(cfg, alpha, h_sr, h_rd, h_rr)
    w_r, w_t = _pairs_batch(scheme, h_sr, h_rd, h_rr)
    return _sinr_from_pairs(cfg, alpha, h_sr, h_rd, h_rr, w_r, w_t)


def _check_scheme(scheme: Scheme, cfg: SystemConfig) -> None:
    if not scheme_feasible(scheme, cfg.m_r, cfg.m_t):
        raise SchemeInfeasibleError(
            f"{scheme.value} infeasible for m_r={cfg.m_r}, m_t={cfg.m_t}")


# ---------------------------------------------------------------------------
# estimators


def estimate_outage(scheme: Scheme, cfg: SystemConfig, alpha: float,
                    gamma_th: float, n: int, seed: int) -> McEstimate:
    """Fraction of trials whose end-to-end SINR falls below gamma_th."""
    _check_scheme(scheme, cfg)
    if n < 1:
        raise ValueError("n must be at least 1")
    if gamma_th < 0.0:
        raise ValueError("gamma_th must be nonnegative")
    hits = 0
    for start in range(0, n, CHUNK):
        count = min(CHUNK, n - start)
        h_sr, h_rd, h_rr = draw_channel_batch(cfg, seed, start, count)
        if scheme is Scheme.OPTIMUM and gamma_th > 0.0:
            ok = _optimum_exceeds(cfg, alpha, h_sr, h_rd, h_rr, gamma_th)
            hits += int(count - ok.sum())
        else:
            sinr = _scheme_sinr_batch(scheme, cfg, alpha, h_sr, h_rd, h_rr)
            hits += int((sinr < gamma_th).sum())
    p = hits / n
    var = p * (1.0 - p) * n / (n - 1) if n > 1 else 0.0
    ci = 1.96 * math.sqrt(var / n)
    return McEstimate(mean=p, ci_halfwidth_95=ci, n_trials=n, seed=seed)


def _lambert_alpha_vec(c: np.ndarray, lev: np.ndarray):
    """Vectorized two-branch optimal time split (see timesplit module)."""
    c = np.asarray(c, dtype=np.float64)
    lev = np.asarray(lev, dtype=np.float64)
    arg = np.maximum((c - 1.0) / math.e, -1.0 / math.e)
    e_val = np.exp(sp.lambertw(arg, k=0).real + 1.0)
    alpha_l = np.where(c > 0.0, (e_val - 1.0) / (c - 1.0 + e_val), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = e_val < np.where(lev > 0.0, c / lev + 1.0, np.inf)
    alpha_b = 1.0 / (1.0 + lev)
    alpha = np.where(cond, alpha_l, alpha_b)
    return np.where(c > 0.0, alpha, 0.0)


def _per_draw_rates(scheme: Scheme, cfg, h_sr, h_rd, h_rr) -> np.ndarray:
    """Rates at the per-draw optimal time split (closed forms per scheme)."""
    hsr2 = _norm2(h_sr)
    hrd2 = _norm2(h_rd)
    base = cfg.eta * cfg.rho2 / (cfg.dl1 * cfg.dl2)
    if scheme is Scheme.TZF:
        r = np.einsum("ni,nij->nj", h_sr.conj(), h_rr)
        rn2 = _norm2(r)[:, None]
        coef = np.einsum("nj,nj->n", r, h_rd.conj())[:, None]
        v = np.where(rn2 > 1e-300,
                     h_rd.conj() - r.conj() * coef / np.maximum(rn2, 1e-300),
                     h_rd.conj())
        a1 = base * hsr2 * _norm2(v)
        a2 = cfg.dl1 / (cfg.rho1 * np.maximum(hsr2, 1e-300))
        alpha = _lambert_alpha_vec(a1, a1 * a2)
        x = alpha / (1.0 - alpha)
        sinr = np.minimum(1.0 / a2, a1 * x)
    elif scheme is Scheme.RZF:
        c = np.einsum("nij,nj->ni", h_rr, h_rd.conj())
        cn2 = _norm2(c)[:, None]
        coef = np.einsum("ni,ni->n", c.conj(), h_sr)[:, None]
        v = np.where(cn2 > 1e-300, h_sr - c * coef / np.maximum(cn2, 1e-300), h_sr)
        a3 = base * hsr2 * hrd2
        a4 = cfg.dl1 / (cfg.rho1 * np.maximum(_norm2(v), 1e-300))
        alpha = _lambert_alpha_vec(a3, a3 * a4)
        x = alpha / (1.0 - alpha)
        sinr = np.minimum(1.0 / a4, a3 * x)
    elif scheme is Scheme.MRC_MRT:
        cross = np.abs(np.einsum("ni,nij,nj->n", h_sr.conj(), h_rr, h_rd.conj())) ** 2
        b3 = cfg.rho2 / (cfg.dl1 * cfg.dl2) * hsr2 * hrd2
        b4 = cfg.rho2 / (cfg.dl1 * cfg.dl2) * cross
        b5 = (cfg.rho2 / cfg.rho1) * hrd2 / cfg.dl2
        alpha3 = cfg.eta * (b5 + np.sqrt(b5 * b5 + 4.0 * b4)) / 2.0
        alpha = _lambert_alpha_vec(cfg.eta * b3, alpha3)
        xe = cfg.eta * alpha / (1.0 - alpha)
        with np.errstate(divide="ignore"):
            sinr = b3 * np.minimum(1.0 / (xe * b4 + b5), xe)
        sinr = np.where(alpha > 0.0, sinr, 0.0)
    else:
        raise ValueError("use the alternating path for the optimum scheme")
    return (1.0 - alpha) * np.log2(1.0 + np.maximum(sinr, 0.0))


def estimate_throughput(scheme: Scheme, cfg: SystemConfig, alpha_policy,
                        n: int, seed: int) -> McEstimate:
    """Mean instantaneous rate over fading.

    ``alpha_policy`` is either a fixed time split (float) or the string
    "per-draw-optimal", which re-optimizes the split for every realization.
    """
    _check_scheme(scheme, cfg)
    if n < 1:
        raise ValueError("n must be at least 1")
    moments = _RunningMoments()
    per_draw = isinstance(alpha_policy, str)
    if per_draw and alpha_policy != PER_DRAW_OPTIMAL:
        raise ValueError(f"unknown alpha policy: {alpha_policy!r}")
    for start in range(0, n, CHUNK):
        count = min(CHUNK, n - start)
        h_sr, h_rd, h_rr = draw_channel_batch(cfg, seed, start, count)
        if not per_draw:
            alpha = float(alpha_policy)
            sinr = _scheme_sinr_batch(scheme, cfg, alpha, h_sr, h_rd, h_rr)
            rates = (1.0 - alpha) * np.log2(1.0 + np.maximum(sinr, 0.0))
        elif scheme is Scheme.OPTIMUM:
            rates = np.empty(count)
            for i in range(count):
                ch = ChannelRealization(h_sr=h_sr[i], h_rd=h_rd[i], h_rr=h_rr[i])
                rates[i] = joint_optimum(ch, cfg, JointMethod.ALTERNATING).rate
        else:
            rates = _per_draw_rates(scheme, cfg, h_sr, h_rd, h_rr)
        moments.add_chunk(rates)
    return moments.estimate(seed)


def estimate_delay_throughput(scheme: Scheme, cfg: SystemConfig, alpha: float,
                              n: int, seed: int) -> McEstimate:
    """(1 - estimated outage) * R_c * (1 - alpha), with the scaled interval."""
    est = estimate_outage(scheme, cfg, alpha, cfg.gamma_th, n, seed)
    scale = cfg.r_c * (1.0 - alpha)
    return McEstimate(mean=(1.0 - est.mean) * scale,
                      ci_halfwidth_95=est.ci_halfwidth_95 * scale,
                      n_trials=n, seed=seed)
