"""Dense complex linear algebra on small matrices (n <= 16)."""
from __future__ import annotations

import numpy as np

from .channel import ChannelRealization

# Squared-norm threshold below which a zero-forcing direction is treated as
# absent; far below any realistic draw, avoids division blow-up.
DEGENERATE_NORM2 = 1e-30


def _require_hermitian(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


def hermitian_eig(a: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns). Raises if the
    input is not Hermitian within tolerance.
    """
    a = _require_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w, v


def solve_hermitian_psd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for Hermitian positive-definite A."""
    a = _require_hermitian(a)
    b = np.asarray(b, dtype=np.complex128)
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    return np.linalg.solve(a, b)


def projection_B(ch: ChannelRealization) -> np.ndarray:
    """Transmit-side zero-forcing projector (m_t x m_t).

    Removes the single direction through which a transmit vector leaks back
    into the matched receive filter: B (h_rr^H h_sr) = 0. When that direction
    vanishes (no loopback) the projector degenerates to the identity.
    """
    r = ch.h_sr.conj() @ ch.h_rr  # row vector of length m_t
    n2 = float(np.vdot(r, r).real)
    if n2 < DEGENERATE_NORM2:
        return np.eye(ch.m_t, dtype=np.complex128)
    return np.eye(ch.m_t, dtype=np.complex128) - np.outer(r.conj(), r) / n2


def projection_D(ch: ChannelRealization) -> np.ndarray:
    """Receive-side zero-forcing projector (m_r x m_r): D (h_rr h_rd^H) = 0."""
    c = ch.h_rr @ ch.h_rd.conj()  # column vector of length m_r
    n2 = float(np.vdot(c, c).real)
    if n2 < DEGENERATE_NORM2:
        return np.eye(ch.m_r, dtype=np.complex128)
    return np.eye(ch.m_r, dtype=np.complex128) - np.outer(c, c.conj()) / n2
