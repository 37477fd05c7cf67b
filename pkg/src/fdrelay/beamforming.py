"""Receive/transmit beamformer construction and end-to-end SINR evaluation.

Four schemes: the optimum pair (transmit side solved in the sdr module),
transmit zero-forcing (TZF), receive zero-forcing (RZF), and MRC/MRT.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, kappa
from .config import SystemConfig
from .linalg import DEGENERATE_NORM2, projection_B, projection_D


class Scheme(enum.Enum):
    OPTIMUM = "opt"
    TZF = "tzf"
    RZF = "rzf"
    MRC_MRT = "mrc"


class SchemeInfeasibleError(ValueError):
    """Raised when a scheme cannot run on the given antenna configuration."""


def scheme_feasible(scheme: Scheme, m_r: int, m_t: int) -> bool:
    if scheme is Scheme.TZF:
        return m_t > 1
    if scheme is Scheme.RZF:
        return m_r > 1
    return True


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Unit-norm copy with the first significant component real positive.

    SINR is phase-invariant, so beamformers are only unique up to a global
    phase; fixing it makes outputs testable.
    """
    v = np.asarray(v, dtype=np.complex128)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    v = v / norm
    idx = int(np.argmax(np.abs(v) > 1e-9))
    phase = v[idx] / abs(v[idx])
    return v * phase.conj()


@dataclass(frozen=True)
class BeamformerPair:
    w_r: np.ndarray
    w_t: np.ndarray
    scheme: Scheme
    degenerate: bool = field(default=False)

    def __post_init__(self) -> None:
        w_r = np.asarray(self.w_r, dtype=np.complex128)
        w_t = np.asarray(self.w_t, dtype=np.complex128)
        object.__setattr__(self, "w_r", w_r)
        object.__setattr__(self, "w_t", w_t)
        for name, vec in (("w_r", w_r), ("w_t", w_t)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be unit norm")


@dataclass(frozen=True)
class SinrBreakdown:
    first_hop: float
    second_hop: float

    @property
    def end_to_end(self) -> float:
        return min(self.first_hop, self.second_hop)


def sinr_coefficients(cfg: SystemConfig, alpha: float,
                      p_e: float | None = None, p_i: float | None = None):
    """Scalars (c_first, c_li, c_second) of the two-hop SINR.

    first hop  = c_first |w_r^H h_sr|^2 / (c_li ||h_sr||^2 |w_r^H H w_t|^2 + 1)
    second hop = c_second ||h_sr||^2 |h_rd w_t|^2

    ``p_e``/``p_i`` override the source power in the harvesting and
    information phases (both default to cfg.p_s, i.e. equal power allocation).
    """
    if p_e is None:
        p_e = cfg.p_s
    if p_i is None:
        p_i = cfg.p_s
    k = kappa(alpha, cfg.eta)
    c_first = (p_i / cfg.sigma2_r) / cfg.dl1
    c_li = k * (p_e / cfg.sigma2_r) / cfg.dl1
    c_second = k * (p_e / cfg.sigma2_d) / (cfg.dl1 * cfg.dl2)
    return c_first, c_li, c_second


def end_to_end_sinr(pair: BeamformerPair, ch: ChannelRealization,
                    cfg: SystemConfig, alpha: float,
                    p_e: float | None = None, p_i: float | None = None) -> SinrBreakdown:
    if pair.w_r.size != ch.m_r or pair.w_t.size != ch.m_t:
        raise ValueError("beamformer dimensions do not match the channel")
    c_first, c_li, c_second = sinr_coefficients(cfg, alpha, p_e, p_i)
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    sig = abs(np.vdot(pair.w_r, ch.h_sr)) ** 2
    leak = abs(pair.w_r.conj() @ ch.h_rr @ pair.w_t) ** 2
    first = c_first * sig / (c_li * hsr2 * leak + 1.0)
    second = c_second * hsr2 * abs(ch.h_rd @ pair.w_t) ** 2
    return SinrBreakdown(first_hop=float(first), second_hop=float(second))


def optimum_receive(w_t: np.ndarray, ch: ChannelRealization,
                    cfg: SystemConfig, alpha: float) -> np.ndarray:
    """Receive filter maximizing the first-hop SINR for a fixed transmit vector.

    Whitens the loopback-plus-noise covariance (a rank-one update of the
    identity) and matches to h_sr.
    """
    _, c_li, _ = sinr_coefficients(cfg, alpha)
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    u = ch.h_rr @ np.asarray(w_t, dtype=np.complex128)
    # Sherman-Morrison solve of (c u u^H + I) w = h_sr
    c = c_li * hsr2
    denom = 1.0 + c * float(np.vdot(u, u).real)
    w = ch.h_sr - c * u * (np.vdot(u, ch.h_sr) / denom)
    return normalize_phase(w)


def f1(w_t: np.ndarray, ch: ChannelRealization, cfg: SystemConfig, alpha: float) -> float:
    """First-hop SINR after the optimum receive filter, as a function of w_t."""
    c_first, c_li, _ = sinr_coefficients(cfg, alpha)
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    u = ch.h_rr @ np.asarray(w_t, dtype=np.complex128)
    c = c_li * hsr2
    num = c * abs(np.vdot(ch.h_sr, u)) ** 2
    den = 1.0 + c * float(np.vdot(u, u).real)
    return float(c_first * (hsr2 - num / den))


def f2(w_t: np.ndarray, ch: ChannelRealization, cfg: SystemConfig, alpha: float) -> float:
    """Second-hop SNR delivered by transmit vector w_t."""
    _, _, c_second = sinr_coefficients(cfg, alpha)
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    return float(c_second * hsr2 * abs(ch.h_rd @ np.asarray(w_t)) ** 2)


def w_min_sinr(ch: ChannelRealization, cfg: SystemConfig, alpha: float) -> np.ndarray:
    """Transmit vector maximizing the first-hop SINR ceiling f1.

    The loopback coupling matrix H^H h_sr h_sr^H H is rank one, so for
    m_t >= 2 the maximizing set is the whole nullspace of h_sr^H H; the
    deterministic representative chosen is the nullspace member with the
    largest second-hop gain (ties never reduce min(f1, f2)).
    """
    del cfg, alpha  # the maximizing set does not depend on the scalars
    if ch.m_t == 1:
        return np.ones(1, dtype=np.complex128)
    r = ch.h_sr.conj() @ ch.h_rr
    n2 = float(np.vdot(r, r).real)
    if n2 < DEGENERATE_NORM2:
        proj = ch.h_rd.conj()
    else:
        proj = ch.h_rd.conj() - r.conj() * (r @ ch.h_rd.conj()) / n2
    if np.linalg.norm(proj) ** 2 < DEGENERATE_NORM2:
        # h_rd lies entirely along the nulled direction; any nullspace member
        # maximizes f1, pick a deterministic orthobasis vector.
        basis = np.eye(ch.m_t, dtype=np.complex128) - np.outer(r.conj(), r) / n2
        col = int(np.argmax(np.linalg.norm(basis, axis=0)))
        proj = basis[:, col]
    return normalize_phase(proj)


def tzf_pair(ch: ChannelRealization, cfg: SystemConfig) -> BeamformerPair:
    """MRC receive, zero-forcing transmit: nulls loopback with a transmit DoF."""
    if cfg.m_t <= 1:
        raise SchemeInfeasibleError("TZF needs more than one transmit antenna")
    degenerate = False
    hsr2 = float(np.vdot(ch.h_sr, ch.h_sr).real)
    if hsr2 < DEGENERATE_NORM2:
        w_r = np.zeros(ch.m_r, dtype=np.complex128)
        w_r[0] = 1.0
        degenerate = True
    else:
        w_r = normalize_phase(ch.h_sr)
    b = projection_B(ch)
    v = b @ ch.h_rd.conj()
    if float(np.vdot(v, v).real) < DEGENERATE_NORM2:
        w_t = np.zeros(ch.m_t, dtype=np.complex128)
        w_t[0] = 1.0
        degenerate = True
    else:
        w_t = normalize_phase(v)
    return BeamformerPair(w_r=w_r, w_t=w_t, scheme=Scheme.TZF, degenerate=degenerate)


def rzf_pair(ch: ChannelRealization, cfg: SystemConfig) -> BeamformerPair:
    """Zero-forcing receive, MRT transmit: nulls loopback with a receive DoF."""
    if cfg.m_r <= 1:
        raise SchemeInfeasibleError("RZF needs more than one receive antenna")
    degenerate = False
    hrd2 = float(np.vdot(ch.h_rd, ch.h_rd).real)
    if hrd2 < DEGENERATE_NORM2:
        w_t = np.zeros(ch.m_t, dtype=np.complex128)
        w_t[0] = 1.0
        degenerate = True
    else:
        w_t = normalize_phase(ch.h_rd.conj())
    d = projection_D(ch)
    v = d @ ch.h_sr
    if float(np.vdot(v, v).real) < DEGENERATE_NORM2:
        w_r = np.zeros(ch.m_r, dtype=np.complex128)
        w_r[0] = 1.0
        degenerate = True
    else:
        w_r = normalize_phase(v)
    return BeamformerPair(w_r=w_r, w_t=w_t, scheme=Scheme.RZF, degenerate=degenerate)


def mrc_mrt_pair(ch: ChannelRealization) -> BeamformerPair:
    """Match the receive filter to the first hop and the transmit to the second."""
    degenerate = False
    if float(np.vdot(ch.h_sr, ch.h_sr).real) < DEGENERATE_NORM2:
        w_r = np.zeros(ch.m_r, dtype=np.complex128)
        w_r[0] = 1.0
        degenerate = True
    else:
        w_r = normalize_phase(ch.h_sr)
    if float(np.vdot(ch.h_rd, ch.h_rd).real) < DEGENERATE_NORM2:
        w_t = np.zeros(ch.m_t, dtype=np.complex128)
        w_t[0] = 1.0
        degenerate = True
    else:
        w_t = normalize_phase(ch.h_rd.conj())
    return BeamformerPair(w_r=w_r, w_t=w_t, scheme=Scheme.MRC_MRT, degenerate=degenerate)
