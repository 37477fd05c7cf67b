"""Channel synthesis and the elementary energy-harvesting quantities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .rng import RngStream, complex_normals


def kappa(alpha: float, eta: float) -> float:
    """Harvested-energy-to-transmit-power factor eta*alpha/(1 - alpha)."""
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    return eta * alpha / (1.0 - alpha)


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw.

    ``h_sr``: source->relay column, length m_r (unit-variance entries).
    ``h_rd``: relay->destination row, length m_t (unit-variance entries).
    ``h_rr``: residual loopback channel, m_r x m_t, entry variance sigma2_rr.
    Distance losses enter the SINR/power formulas, not the draws.
    """

    h_sr: np.ndarray
    h_rd: np.ndarray
    h_rr: np.ndarray

    def __post_init__(self) -> None:
        h_sr = np.asarray(self.h_sr, dtype=np.complex128)
        h_rd = np.asarray(self.h_rd, dtype=np.complex128)
        h_rr = np.asarray(self.h_rr, dtype=np.complex128)
        object.__setattr__(self, "h_sr", h_sr)
        object.__setattr__(self, "h_rd", h_rd)
        object.__setattr__(self, "h_rr", h_rr)
        if h_sr.ndim != 1 or h_rd.ndim != 1 or h_rr.ndim != 2:
            raise ValueError("h_sr/h_rd must be vectors, h_rr a matrix")
        if h_rr.shape != (h_sr.size, h_rd.size):
            raise ValueError("h_rr must be m_r x m_t")
        for arr in (h_sr, h_rd, h_rr):
            if not np.all(np.isfinite(arr.view(np.float64))):
                raise ValueError("channel entries must be finite")

    @property
    def m_r(self) -> int:
        return self.h_sr.size

    @property
    def m_t(self) -> int:
        return self.h_rd.size


def relay_power(cfg: SystemConfig, ch: ChannelRealization, alpha: float) -> float:
    """Relay transmit power harvested over the alpha-fraction of the block."""
    k = kappa(alpha, cfg.eta)
    return k / cfg.dl1 * cfg.p_s * float(np.vdot(ch.h_sr, ch.h_sr).real)


def draw_channel(cfg: SystemConfig, rng: RngStream) -> ChannelRealization:
    """Draw one Rayleigh-fading realization from a counter-based substream."""
    n = cfg.m_r + cfg.m_t + cfg.m_r * cfg.m_t
    z = rng.complex_normals(n)
    h_sr = z[: cfg.m_r]
    h_rd = z[cfg.m_r: cfg.m_r + cfg.m_t]
    h_rr = np.sqrt(cfg.sigma2_rr) * z[cfg.m_r + cfg.m_t:].reshape(cfg.m_r, cfg.m_t)
    return ChannelRealization(h_sr=h_sr, h_rd=h_rd, h_rr=h_rr)


def draw_channel_batch(cfg: SystemConfig, seed: int, start: int, count: int):
    """Vectorized draws for trials start .. start+count-1.

    Returns (h_sr, h_rd, h_rr) with shapes (count, m_r), (count, m_t),
    (count, m_r, m_t). Trial i reproduces draw_channel(cfg, RngStream(seed, i))
    bit for bit.
    """
    streams = np.arange(start, start + count, dtype=np.uint64)
    n = cfg.m_r + cfg.m_t + cfg.m_r * cfg.m_t
    z = complex_normals(seed, streams, n)
    h_sr = z[:, : cfg.m_r]
    h_rd = z[:, cfg.m_r: cfg.m_r + cfg.m_t]
    h_rr = np.sqrt(cfg.sigma2_rr) * z[:, cfg.m_r + cfg.m_t:].reshape(count, cfg.m_r, cfg.m_t)
    return h_sr, h_rd, h_rr
