"""Counter-based random number generation for reproducible parallel sweeps.

A SplitMix64-style finalizer applied to (seed, stream, counter) gives each
Monte Carlo trial its own substream; every value depends only on those three
integers, so results are identical for any chunking or worker count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SEED_SALT = np.uint64(0xD1B54A32D192ED03)

_TWO_PI = 2.0 * np.pi


def _finalize(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    z = z ^ (z >> np.uint64(31))
    return z


def _stream_base(seed: int, stream: np.ndarray) -> np.ndarray:
    s = _finalize(np.asarray(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)) * _M1 + _SEED_SALT)
    return _finalize(s ^ (stream.astype(np.uint64) * _GOLDEN + _M2))


def _raw(seed: int, stream: np.ndarray, counter: np.ndarray) -> np.ndarray:
    """uint64 words for broadcastable (stream, counter) index arrays."""
    base = _stream_base(seed, np.asarray(stream, dtype=np.uint64))
    return _finalize(base + counter.astype(np.uint64) * _GOLDEN)


def _to_open_unit(v: np.ndarray) -> np.ndarray:
    """Map uint64 -> (0, 1]; the upper-inclusive form keeps log() finite."""
    return ((v >> np.uint64(11)).astype(np.float64) + 1.0) * (2.0 ** -53)


def complex_normals(seed: int, stream, count: int, offset: int = 0) -> np.ndarray:
    """Standard circular complex Gaussians CN(0, 1).

    ``stream`` may be a scalar or an integer array; the result has shape
    ``np.shape(stream) + (count,)``. Sample j of a stream always consumes
    counters (2*(offset+j), 2*(offset+j)+1) regardless of batching.
    """
    stream_arr = np.atleast_1d(np.asarray(stream, dtype=np.uint64))
    k = np.arange(offset, offset + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        va = _raw(seed, stream_arr[:, None], 2 * k[None, :])
        vb = _raw(seed, stream_arr[:, None], 2 * k[None, :] + np.uint64(1))
    u1 = _to_open_unit(va)
    u2 = _to_open_unit(vb)
    z = np.sqrt(-np.log(u1)) * np.exp(1j * _TWO_PI * u2)
    if np.isscalar(stream) or np.asarray(stream).ndim == 0:
        return z[0]
    return z


@dataclass(frozen=True)
class RngStream:
    """One reproducible substream, addressed by (seed, stream_index)."""

    seed: int
    stream_index: int = 0

    def complex_normals(self, count: int, offset: int = 0) -> np.ndarray:
        return complex_normals(self.seed, self.stream_index, count, offset)

    def uniforms(self, count: int, offset: int = 0) -> np.ndarray:
        """Uniforms on (0, 1], one counter per value."""
        k = np.arange(offset, offset + count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            v = _raw(self.seed, np.asarray(self.stream_index, dtype=np.uint64), k)
        return _to_open_unit(v)
