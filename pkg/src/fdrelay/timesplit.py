"""Optimal time-split selection for instantaneous throughput.

Each scheme's rate-versus-alpha curve has an energy-limited branch (second
hop binds, rate concave with a Lambert-W stationary point) and a branch where
the first hop binds (rate decreasing). The optimum is the Lambert point when
it falls before the branch switch, else the switch point itself.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .beamforming import (BeamformerPair, Scheme, SchemeInfeasibleError,
                          end_to_end_sinr, mrc_mrt_pair, normalize_phase,
                          rzf_pair, scheme_feasible, tzf_pair)
from .channel import ChannelRealization
from .config import SystemConfig
from .linalg import projection_B, projection_D
from .sdr import SdrProblem, optimum_transmit
from .specfun import lambert_w0


class AlphaBranch(enum.Enum):
    LAMBERT = "lambert"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class AlphaCoefficients:
    """Per-scheme scalars feeding the closed-form time-split solutions."""

    scheme: Scheme
    # optimum-scheme set
    b0: float | None = None
    b1: float | None = None
    b2: float | None = None
    f: float | None = None
    f_tilde: float | None = None
    alpha0: float | None = None
    # transmit zero-forcing set
    a1: float | None = None
    a2: float | None = None
    alpha1: float | None = None
    # receive zero-forcing set
    a3_rzf: float | None = None
    a4: float | None = None
    alpha2: float | None = None
    # MRC/MRT set
    b3: float | None = None
    b4: float | None = None
    b5: float | None = None
    a3_mrc: float | None = None
    alpha3: float | None = None

    def __post_init__(self) -> None:
        for name in ("b0", "b1", "b2", "f", "f_tilde", "a1", "a2", "a3_rzf",
                     "a4", "b3", "b4", "b5", "a3_mrc", "alpha1", "alpha2",
                     "alpha3"):
            val = getattr(self, name)
            if val is not None and val < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.b1 is not None and self.b2 is not None:
            # Cauchy-Schwarz on the loopback coupling, up to roundoff
            if self.b1 > self.b2 * (1.0 + 1e-9) + 1e-300:
                raise ValueError("b1 must not exceed b2")


@dataclass(frozen=True)
class AlphaResult:
    alpha_star: float
    rate_at_star: float
    branch: AlphaBranch


def instantaneous_rate(alpha: float, sinr: float) -> float:
    """(1 - alpha) * log2(1 + sinr)."""
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    if sinr < 0.0:
        raise ValueError("sinr must be nonnegative")
    return (1.0 - alpha) * math.log2(1.0 + sinr)


def _x(alpha) -> float:
    """Time-split leverage alpha/(1 - alpha)."""
    return alpha / (1.0 - alpha)


# ---------------------------------------------------------------------------
# coefficient builders


def coefficients_optimum(ch: ChannelRealization, cfg: SystemConfig,
                         w_t: np.ndarray) -> AlphaCoefficients:
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    hw = ch.h_rr @ np.asarray(w_t, dtype=np.complex128)
    b0 = (cfg.rho2 / cfg.rho1) * cfg.eta / cfg.dl2 * abs(ch.h_rd @ w_t) ** 2
    b1 = cfg.eta * cfg.rho1 / cfg.dl1 * abs(np.vdot(ch.h_sr, hw)) ** 2
    b2 = cfg.eta * cfg.rho1 / cfg.dl1 * hsr2 * float(np.vdot(hw, hw).real)
    f = cfg.rho1 / cfg.dl1 * hsr2
    f_tilde = f * b0
    alpha0 = _alpha0(b0, b1, b2)
    return AlphaCoefficients(scheme=Scheme.OPTIMUM, b0=b0, b1=b1, b2=b2,
                             f=f, f_tilde=f_tilde, alpha0=alpha0)


def _alpha0(b0: float, b1: float, b2: float) -> float:
    """Branch-switch leverage for the optimum scheme; b1 <= b2 by
    Cauchy-Schwarz. Limits: b2 -> 0 forces b1 -> 0 and alpha0 -> 1/b0."""
    if b0 <= 0.0:
        return math.inf
    if b2 <= 0.0:
        return 1.0 / b0
    root = math.sqrt(b0 * b0 + (b2 - b1) ** 2 + 2.0 * b0 * (b1 + b2))
    return ((b2 - b1 - b0) + root) / (2.0 * b0 * b2)


def coefficients_tzf(ch: ChannelRealization, cfg: SystemConfig) -> AlphaCoefficients:
    if cfg.m_t <= 1:
        raise SchemeInfeasibleError("TZF needs more than one transmit antenna")
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    bproj = projection_B(ch) @ ch.h_rd.conj()
    a1 = cfg.eta * cfg.rho2 / (cfg.dl1 * cfg.dl2) * hsr2 * float(np.vdot(bproj, bproj).real)
    a2 = cfg.dl1 / (cfg.rho1 * max(hsr2, 1e-300))
    return AlphaCoefficients(scheme=Scheme.TZF, a1=a1, a2=a2, alpha1=a1 * a2)


def coefficients_rzf(ch: ChannelRealization, cfg: SystemConfig) -> AlphaCoefficients:
    if cfg.m_r <= 1:
        raise SchemeInfeasibleError("RZF needs more than one receive antenna")
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    hrd2 = float(np.vdot(ch.h_rd, ch.h_rd).real)
    dsr = projection_D(ch) @ ch.h_sr
    a3 = cfg.eta * cfg.rho2 / (cfg.dl1 * cfg.dl2) * hsr2 * hrd2
    a4 = cfg.dl1 / (cfg.rho1 * max(float(np.vdot(dsr, dsr).real), 1e-300))
    return AlphaCoefficients(scheme=Scheme.RZF, a3_rzf=a3, a4=a4, alpha2=a3 * a4)


def coefficients_mrc(ch: ChannelRealization, cfg: SystemConfig) -> AlphaCoefficients:
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    hrd2 = float(np.vdot(ch.h_rd, ch.h_rd).real)
    cross = abs(ch.h_sr.conj() @ ch.h_rr @ ch.h_rd.conj()) ** 2
    b3 = cfg.rho2 / (cfg.dl1 * cfg.dl2) * hsr2 * hrd2
    b4 = cfg.rho2 / (cfg.dl1 * cfg.dl2) * cross
    b5 = (cfg.rho2 / cfg.rho1) * hrd2 / cfg.dl2
    # rationalized form of 2*eta*b4 / (-b5 + sqrt(b5^2 + 4 b4)); exact for
    # b4 > 0 and finite (eta*b5) in the loopback-free limit b4 -> 0
    alpha3 = cfg.eta * (b5 + math.sqrt(b5 * b5 + 4.0 * b4)) / 2.0
    return AlphaCoefficients(scheme=Scheme.MRC_MRT, b3=b3, b4=b4, b5=b5,
                             a3_mrc=cfg.eta * b3, alpha3=alpha3)


def coefficients_for(scheme: Scheme, ch: ChannelRealization, cfg: SystemConfig,
                     alpha_hint: float = 0.5) -> AlphaCoefficients:
    if scheme is Scheme.TZF:
        return coefficients_tzf(ch, cfg)
    if scheme is Scheme.RZF:
        return coefficients_rzf(ch, cfg)
    if scheme is Scheme.MRC_MRT:
        return coefficients_mrc(ch, cfg)
    w_t = optimum_transmit(ch, cfg, alpha_hint).recovered_w_t
    return coefficients_optimum(ch, cfg, w_t)


# ---------------------------------------------------------------------------
# per-scheme rate as a function of alpha (coefficient space)


def scheme_rate(co: AlphaCoefficients, alpha) -> float:
    """Instantaneous rate at a given alpha from scheme coefficients.

    Accepts scalars or numpy arrays of alpha in [0, 1).
    """
    a = np.asarray(alpha, dtype=np.float64)
    x = a / (1.0 - a)
    if co.scheme is Scheme.OPTIMUM:
        hop1 = 1.0 - x * co.b1 / (1.0 + x * co.b2)
        sinr = co.f * np.minimum(hop1, x * co.b0)
    elif co.scheme is Scheme.TZF:
        sinr = np.minimum(1.0 / co.a2, co.a1 * x)
    elif co.scheme is Scheme.RZF:
        sinr = np.minimum(1.0 / co.a4, co.a3_rzf * x)
    else:
        if co.b3 <= 0.0:
            sinr = np.zeros_like(a)
        else:
            eta = co.a3_mrc / co.b3
            xe = eta * x
            sinr = co.b3 * np.minimum(1.0 / (xe * co.b4 + co.b5), xe)
    rate = (1.0 - a) * np.log2(1.0 + np.maximum(sinr, 0.0))
    return float(rate) if np.isscalar(alpha) else rate


# ---------------------------------------------------------------------------
# closed-form optima


def _lambert_point(c: float):
    """Stationary alpha of (1-alpha) log2(1 + c*alpha/(1-alpha)) and the
    associated exponential e^{W((c-1)/e)+1}."""
    e_val = math.exp(lambert_w0((c - 1.0) / math.e) + 1.0)
    alpha = (e_val - 1.0) / (c - 1.0 + e_val)
    return alpha, e_val


def optimal_alpha_optimum(co: AlphaCoefficients) -> AlphaResult:
    ft = co.f_tilde
    if ft is None or ft <= 0.0:
        return AlphaResult(0.0, 0.0, AlphaBranch.BOUNDARY)
    alpha_l, e_val = _lambert_point(ft)
    if e_val < co.alpha0 * ft + 1.0:
        alpha = alpha_l
        branch = AlphaBranch.LAMBERT
    else:
        alpha = co.alpha0 / (1.0 + co.alpha0)
        branch = AlphaBranch.BOUNDARY
    return AlphaResult(alpha, _opt_rate(co, alpha), branch)


def _opt_rate(co: AlphaCoefficients, alpha: float) -> float:
    x = _x(alpha)
    hop1 = 1.0 - x * co.b1 / (1.0 + x * co.b2)
    sinr = co.f * min(hop1, x * co.b0)
    return instantaneous_rate(alpha, max(sinr, 0.0))


def _two_branch(c: float, switch_leverage: float):
    """Shared two-branch solution: Lambert point if it precedes the switch
    alpha = 1/(1 + switch_leverage), else the switch point."""
    if c <= 0.0:
        return 0.0, AlphaBranch.BOUNDARY
    alpha_l, e_val = _lambert_point(c)
    if switch_leverage <= 0.0 or e_val < c / switch_leverage + 1.0:
        return alpha_l, AlphaBranch.LAMBERT
    return 1.0 / (1.0 + switch_leverage), AlphaBranch.BOUNDARY


def optimal_alpha_tzf(co: AlphaCoefficients) -> AlphaResult:
    alpha, branch = _two_branch(co.a1, co.alpha1)
    return AlphaResult(alpha, scheme_rate(co, alpha), branch)


def optimal_alpha_rzf(co: AlphaCoefficients) -> AlphaResult:
    alpha, branch = _two_branch(co.a3_rzf, co.alpha2)
    return AlphaResult(alpha, scheme_rate(co, alpha), branch)


def optimal_alpha_mrc(co: AlphaCoefficients) -> AlphaResult:
    alpha, branch = _two_branch(co.a3_mrc, co.alpha3)
    return AlphaResult(alpha, scheme_rate(co, alpha), branch)


# ---------------------------------------------------------------------------
# joint optimization for the optimum scheme


class JointMethod(enum.Enum):
    LINE_SEARCH = "line-search"
    ALTERNATING = "alternating"


@dataclass(frozen=True)
class JointResult:
    w_t: np.ndarray
    alpha: float
    rate: float
    converged: bool = True


def _rate_given_wt(ch: ChannelRealization, cfg: SystemConfig,
                   w_t: np.ndarray, alpha: float) -> float:
    prob = SdrProblem.from_channel(ch, cfg, alpha)
    return instantaneous_rate(alpha, max(prob.value_of(w_t), 0.0))


def _rate_at_alpha(ch: ChannelRealization, cfg: SystemConfig, alpha: float):
    sol = optimum_transmit(ch, cfg, alpha)
    return instantaneous_rate(alpha, max(sol.t_star, 0.0)), sol.recovered_w_t


def joint_optimum(ch: ChannelRealization, cfg: SystemConfig,
                  method: JointMethod = JointMethod.ALTERNATING) -> JointResult:
    """Jointly pick (w_t, alpha) for the optimum scheme.

    LINE_SEARCH sweeps a coarse alpha grid (step 1e-3) re-solving the
    beamformer at every point, then golden-refines to 1e-7: global within
    grid resolution. ALTERNATING iterates beamformer-for-alpha and
    alpha-for-beamformer until the rate stalls.
    """
    if method is JointMethod.LINE_SEARCH:
        grid = np.arange(1e-3, 1.0, 1e-3)
        best_alpha, best_rate, best_w = 0.0, 0.0, np.ones(cfg.m_t) / math.sqrt(cfg.m_t)
        for a in grid:
            rate, w = _rate_at_alpha(ch, cfg, float(a))
            if rate > best_rate:
                best_alpha, best_rate, best_w = float(a), rate, w
        lo = max(0.0, best_alpha - 1e-3)
        hi = min(1.0 - 1e-9, best_alpha + 1e-3)
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        r1, w1 = _rate_at_alpha(ch, cfg, x1)
        r2, w2 = _rate_at_alpha(ch, cfg, x2)
        while hi - lo > 1e-7:
            if r1 >= r2:
                hi, x2, r2, w2 = x2, x1, r1, w1
                x1 = hi - invphi * (hi - lo)
                r1, w1 = _rate_at_alpha(ch, cfg, x1)
            else:
                lo, x1, r1, w1 = x1, x2, r2, w2
                x2 = lo + invphi * (hi - lo)
                r2, w2 = _rate_at_alpha(ch, cfg, x2)
        for rate, alpha, w in ((r1, x1, w1), (r2, x2, w2)):
            if rate > best_rate:
                best_rate, best_alpha, best_w = rate, alpha, w
        return JointResult(w_t=best_w, alpha=best_alpha, rate=best_rate)

    # alternating: w_t for alpha, then the closed-form alpha for w_t
    alpha = 0.5
    best = JointResult(w_t=np.ones(cfg.m_t, dtype=np.complex128) / math.sqrt(cfg.m_t),
                       alpha=alpha, rate=-1.0, converged=False)
    prev_rate = -1.0
    converged = False
    for _ in range(50):
        sol = optimum_transmit(ch, cfg, alpha)
        co = coefficients_optimum(ch, cfg, sol.recovered_w_t)
        res = optimal_alpha_optimum(co)
        alpha_new = min(max(res.alpha_star, 0.0), 1.0 - 1e-9)
        rate = _rate_given_wt(ch, cfg, sol.recovered_w_t, alpha_new)
        if rate > best.rate:
            best = JointResult(w_t=sol.recovered_w_t, alpha=alpha_new,
                               rate=rate, converged=False)
        if abs(rate - prev_rate) < 1e-8:
            converged = True
            break
        prev_rate = rate
        alpha = alpha_new
    return replace(best, converged=converged)


# ---------------------------------------------------------------------------
# two-dimensional power/time grid search


def _best_pair_rate(ch: ChannelRealization, cfg: SystemConfig, scheme: Scheme,
                    alpha: float, p_e: float, p_i: float) -> float:
    if scheme is Scheme.OPTIMUM:
        # transmit vector solved at the harvesting power (its objective is the
        # split-power SINR when the two phases share the power level; the
        # exact split value is then re-evaluated)
        sol = optimum_transmit(ch, replace(cfg, p_s=p_e), alpha)
        value = _powers_value(ch, cfg, alpha, p_e, p_i, sol.recovered_w_t)
        return instantaneous_rate(alpha, max(value, 0.0))
    if scheme is Scheme.TZF:
        pair = tzf_pair(ch, cfg)
    elif scheme is Scheme.RZF:
        pair = rzf_pair(ch, cfg)
    else:
        pair = mrc_mrt_pair(ch)
    sinr = end_to_end_sinr(pair, ch, cfg, alpha, p_e=p_e, p_i=p_i).end_to_end
    return instantaneous_rate(alpha, sinr)


def _powers_value(ch: ChannelRealization, cfg: SystemConfig, alpha: float,
                  p_e: float, p_i: float, w_t: np.ndarray) -> float:
    """min-hop value with the optimum receive filter under split powers."""
    from .beamforming import optimum_receive
    w_r = optimum_receive(w_t, ch, replace(cfg, p_s=p_e), alpha)
    pair = BeamformerPair(w_r=w_r, w_t=normalize_phase(w_t), scheme=Scheme.OPTIMUM)
    return end_to_end_sinr(pair, ch, cfg, alpha, p_e=p_e, p_i=p_i).end_to_end


@dataclass(frozen=True)
class PowerSplitResult:
    alpha: float
    p_e: float
    p_i: float
    rate: float


def optimize_power_split(ch: ChannelRealization, cfg: SystemConfig,
                         p_max: float, scheme: Scheme = Scheme.OPTIMUM,
                         alpha_grid=None, n_power: int = 25) -> PowerSplitResult:
    """Grid search over the time split and the harvesting-phase power.

    The average-power budget alpha*p_e + (1-alpha)*p_i <= P_S is spent fully:
    p_i = min(p_max, (P_S - alpha*p_e)/(1-alpha)). Per-phase powers are capped
    at p_max. Equal allocation (p_e = p_i = P_S) is always on the grid, so the
    result never falls below it.
    """
    if p_max < cfg.p_s:
        raise ValueError("p_max must be at least the average power budget")
    if not scheme_feasible(scheme, cfg.m_r, cfg.m_t):
        raise SchemeInfeasibleError(f"{scheme.value} infeasible for antenna config")
    if alpha_grid is None:
        alpha_grid = np.arange(0.01, 1.0, 0.01)
    power_grid = np.linspace(p_max / n_power, p_max, n_power)
    if not np.any(np.isclose(power_grid, cfg.p_s)):
        power_grid = np.sort(np.append(power_grid, cfg.p_s))
    best = PowerSplitResult(alpha=0.0, p_e=cfg.p_s, p_i=cfg.p_s, rate=0.0)
    for alpha in alpha_grid:
        alpha = float(alpha)
        for p_e in power_grid:
            p_e = float(p_e)
            p_i = min(p_max, (cfg.p_s - alpha * p_e) / (1.0 - alpha))
            if p_i <= 0.0:
                continue
            rate = _best_pair_rate(ch, cfg, scheme, alpha, p_e, p_i)
            if rate > best.rate:
                best = PowerSplitResult(alpha=alpha, p_e=p_e, p_i=p_i, rate=rate)
    return best
