"""Scenario configuration and the dBm <-> watts boundary.

The library itself works in SI units only (watts, meters); decibel values
are converted exactly once, when a config file / CLI flags are turned into
a :class:`SystemConfig`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Keys accepted in flat `key = value` config files (CLI flags mirror them).
CONFIG_KEYS = (
    "p_s_dbm",
    "sigma2_r_dbm",
    "sigma2_d_dbm",
    "li_dbm",
    "d1",
    "d2",
    "tau",
    "eta",
    "m_r",
    "m_t",
    "r_c",
)

DEFAULTS = {
    "p_s_dbm": 20.0,
    "sigma2_r_dbm": -70.0,
    "sigma2_d_dbm": -70.0,
    "li_dbm": -50.0,
    "d1": 20.0,
    "d2": 10.0,
    "tau": 3.0,
    "eta": 0.5,
    "m_r": 3,
    "m_t": 3,
    "r_c": 2.0,
}

_INT_KEYS = ("m_r", "m_t")


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    if w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters, in SI units.

    ``sigma2_rr`` is the (dimensionless) variance of the residual
    loopback-interference channel entries after analog/digital cancellation.
    """

    p_s: float
    sigma2_r: float
    sigma2_d: float
    sigma2_rr: float
    d1: float
    d2: float
    tau: float
    eta: float
    m_r: int
    m_t: int
    r_c: float

    def __post_init__(self) -> None:
        if not (self.p_s > 0.0):
            raise ValueError("p_s must be positive")
        if not (self.sigma2_r > 0.0 and self.sigma2_d > 0.0):
            raise ValueError("noise variances must be positive")
        if self.sigma2_rr < 0.0:
            raise ValueError("sigma2_rr must be nonnegative")
        if not (self.d1 > 0.0 and self.d2 > 0.0):
            raise ValueError("distances must be positive")
        if self.tau < 2.0:
            raise ValueError("path-loss exponent must be >= 2")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must be in (0, 1]")
        if not (isinstance(self.m_r, int) and self.m_r >= 1):
            raise ValueError("m_r must be a positive integer")
        if not (isinstance(self.m_t, int) and self.m_t >= 1):
            raise ValueError("m_t must be a positive integer")
        if self.r_c < 0.0:
            raise ValueError("r_c must be nonnegative")
        for name in ("p_s", "sigma2_r", "sigma2_d", "sigma2_rr", "d1", "d2",
                     "tau", "eta", "r_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def rho1(self) -> float:
        """Source SNR at the relay input: P_S / sigma2_R."""
        return self.p_s / self.sigma2_r

    @property
    def rho2(self) -> float:
        """Source SNR referred to the destination noise: P_S / sigma2_D."""
        return self.p_s / self.sigma2_d

    @property
    def dl1(self) -> float:
        """First-hop distance loss d1^tau."""
        return self.d1 ** self.tau

    @property
    def dl2(self) -> float:
        """Second-hop distance loss d2^tau."""
        return self.d2 ** self.tau

    @property
    def gamma_th(self) -> float:
        """SINR threshold for the delay-constrained rate: 2^R_c - 1."""
        return 2.0 ** self.r_c - 1.0


def config_from_key_values(values: dict) -> SystemConfig:
    """Build a SystemConfig from config-file keys, applying defaults."""
    merged = dict(DEFAULTS)
    for key, val in values.items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        merged[key] = val
    for key in _INT_KEYS:
        merged[key] = int(merged[key])
    return SystemConfig(
        p_s=dbm_to_watts(float(merged["p_s_dbm"])),
        sigma2_r=dbm_to_watts(float(merged["sigma2_r_dbm"])),
        sigma2_d=dbm_to_watts(float(merged["sigma2_d_dbm"])),
        sigma2_rr=dbm_to_watts(float(merged["li_dbm"])),
        d1=float(merged["d1"]),
        d2=float(merged["d2"]),
        tau=float(merged["tau"]),
        eta=float(merged["eta"]),
        m_r=merged["m_r"],
        m_t=merged["m_t"],
        r_c=float(merged["r_c"]),
    )


def parse_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` config file.

    Blank lines and lines starting with ``#`` are ignored.
    """
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = float(val.strip())
    return values


def default_config() -> SystemConfig:
    return config_from_key_values({})
