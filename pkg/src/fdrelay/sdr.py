"""Optimum transmit beamformer via max-min SINR relaxation.

For a fixed time split the problem is: maximize over unit w_t the minimum of
the optimum-receive first-hop SINR f1(w_t) and the second-hop SNR f2(w_t).
Closed forms cover the two one-sided cases; otherwise the lifted matrix
problem is solved by bisection over the achievable level t, where each
fixed-t feasibility check is a max-min of two affine functionals over
{W PSD, tr W = 1}. By minimax duality that check reduces to a 1-D convex
search over the scalarization weight, with exact certificates both ways.
A rank-one vector is then recovered from the solution matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import f1, f2, normalize_phase, w_min_sinr
from .channel import ChannelRealization, kappa
from .config import SystemConfig
from .linalg import DEGENERATE_NORM2, hermitian_eig

FEAS_TOL = 1e-8          # normalized slack threshold for declaring feasibility
RANK_ONE_RATIO = 1e-6    # second/first eigenvalue ratio treated as rank one
EIG_KEEP = 1e-9          # eigenvalues of W below this are noise
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0

RANK_ONE = "rank-one"
RECOVERED = "recovered-from-higher-rank"


class SolverDiagnosticError(RuntimeError):
    """Solver could not reach a verdict (distinct from plain infeasibility)."""


@dataclass(frozen=True)
class SdrProblem:
    """Channel-derived constants of the lifted feasibility problem."""

    m1: np.ndarray         # H^H h_sr h_sr^H H
    hth: np.ndarray        # H^H H
    hrd_outer: np.ndarray  # h_rd^H h_rd
    rho1: float
    rho2: float
    kappa: float
    dl1: float
    dl2: float
    hsr_norm2: float

    @classmethod
    def from_channel(cls, ch: ChannelRealization, cfg: SystemConfig,
                     alpha: float) -> "SdrProblem":
        r = ch.h_sr.conj() @ ch.h_rr  # row of length m_t
        return cls(
            m1=np.outer(r.conj(), r),
            hth=ch.h_rr.conj().T @ ch.h_rr,
            hrd_outer=np.outer(ch.h_rd.conj(), ch.h_rd),
            rho1=cfg.rho1,
            rho2=cfg.rho2,
            kappa=kappa(alpha, cfg.eta),
            dl1=cfg.dl1,
            dl2=cfg.dl2,
            hsr_norm2=float(np.vdot(ch.h_sr, ch.h_sr).real),
        )

    @property
    def m_t(self) -> int:
        return self.m1.shape[0]

    @property
    def c_a(self) -> float:
        """Loopback coupling strength kappa*rho1*||h_sr||^2 / d1^tau."""
        return self.kappa * self.rho1 * self.hsr_norm2 / self.dl1

    @property
    def ceiling(self) -> float:
        """Interference-free first-hop SINR rho1*||h_sr||^2 / d1^tau."""
        return self.rho1 * self.hsr_norm2 / self.dl1

    @property
    def c_second(self) -> float:
        """Second-hop scale: f2(w) = c_second * w^H hrd_outer w."""
        return self.kappa * self.rho2 * self.hsr_norm2 / (self.dl1 * self.dl2)

    @property
    def r_matrix(self) -> np.ndarray:
        return np.eye(self.m_t, dtype=np.complex128) + self.c_a * self.hth

    def a1_at(self, t: float) -> np.ndarray:
        """Matrix of the first (y-multiplied) constraint: tr(W a1) >= 0."""
        pre = self.rho1 / self.dl1
        return (pre * self.hsr_norm2 - t) * self.r_matrix - pre * self.c_a * self.m1

    @property
    def a2(self) -> np.ndarray:
        """Matrix part of the second constraint: tr(W a2) - t >= 0."""
        return self.c_second * self.hrd_outer

    def value_of(self, w: np.ndarray) -> float:
        """min of the two hop objectives for a unit transmit vector."""
        w = np.asarray(w, dtype=np.complex128)
        c = self.c_a
        num = c * float(np.real(w.conj() @ self.m1 @ w))
        den = 1.0 + c * float(np.real(w.conj() @ self.hth @ w))
        hop1 = (self.rho1 / self.dl1) * (self.hsr_norm2 - num / den)
        hop2 = self.c_second * float(np.real(w.conj() @ self.hrd_outer @ w))
        return min(hop1, hop2)


@dataclass(frozen=True)
class SdrSolution:
    w_t_matrix: np.ndarray
    t_star: float
    recovered_w_t: np.ndarray
    rank_flag: str
    dual_multipliers: tuple | None = None

    def __post_init__(self) -> None:
        tr = float(np.trace(self.w_t_matrix).real)
        if abs(tr - 1.0) > 1e-8:
            raise ValueError("solution matrix must have unit trace")
        if float(np.linalg.eigvalsh(self.w_t_matrix)[0]) < -1e-9:
            raise ValueError("solution matrix must be positive semidefinite")
        if abs(np.linalg.norm(self.recovered_w_t) - 1.0) > 1e-9:
            raise ValueError("recovered vector must be unit norm")


def t_upper_bound(prob: SdrProblem) -> float:
    """Largest level either hop can reach: min of the two single-hop maxima."""
    hrd2 = float(np.trace(prob.hrd_outer).real)
    return min(prob.ceiling, prob.c_second * hrd2)


def _slacks(prob: SdrProblem, a1: np.ndarray, t: float, w_mat: np.ndarray):
    g1 = float(np.trace(w_mat @ a1).real)
    g2 = float(np.trace(w_mat @ prob.a2).real) - t
    return g1, g2


def _mixture(avals: np.ndarray, bvals: np.ndarray):
    """Maximize min(a^T mu, b^T mu) over the simplex; two functionals, so the
    optimum sits on a vertex or a two-point edge."""
    n = avals.size
    best_val = -np.inf
    best_mu = None
    for q in range(n):
        val = min(avals[q], bvals[q])
        if val > best_val:
            best_val = val
            mu = np.zeros(n)
            mu[q] = 1.0
            best_mu = mu
    for p in range(n):
        for q in range(p + 1, n):
            dp = avals[p] - bvals[p]
            dq = avals[q] - bvals[q]
            if dp == dq:
                continue
            lam = dq / (dq - dp)
            if not (0.0 < lam < 1.0):
                continue
            val = lam * avals[p] + (1.0 - lam) * avals[q]
            if val > best_val:
                best_val = val
                mu = np.zeros(n)
                mu[p] = lam
                mu[q] = 1.0 - lam
                best_mu = mu
    return best_val, best_mu


def solve_feasibility(prob: SdrProblem, t: float) -> SdrSolution | None:
    """Feasibility of the lifted problem at level t.

    Returns a solution matrix with normalized constraint slacks >= -1e-8, or
    None if provably infeasible. The dual search evaluates
    phi(theta) = lambda_max(theta*A1/s1 + (1-theta)*A2/s2) - (1-theta)*t/s2,
    a convex function whose minimum equals the max-min slack; any phi < -tol
    certifies infeasibility, any unit vector with nonnegative slacks
    certifies feasibility.
    """
    a1 = prob.a1_at(t)
    a2 = prob.a2
    if not (np.all(np.isfinite(a1.view(np.float64)))
            and np.all(np.isfinite(a2.view(np.float64))) and np.isfinite(t)):
        raise SolverDiagnosticError("non-finite problem data")
    s1 = max(float(np.linalg.norm(a1)), 1e-300)
    s2 = max(float(np.linalg.norm(a2)) + abs(t), 1e-300)
    b1 = a1 / s1
    b2 = a2 / s2
    off = t / s2

    best_cand: tuple[float, np.ndarray] | None = None
    best_phi = np.inf
    best_theta = 0.5

    def probe(theta: float):
        nonlocal best_cand, best_phi, best_theta
        b = theta * b1 + (1.0 - theta) * b2
        evals, evecs = np.linalg.eigh(b)
        phi = float(evals[-1]) - (1.0 - theta) * off
        v = evecs[:, -1]
        w_mat = np.outer(v, v.conj())
        g1, g2 = _slacks(prob, a1, t, w_mat)
        slack = min(g1 / s1, g2 / s2)
        if best_cand is None or slack > best_cand[0]:
            best_cand = (slack, w_mat)
        if phi < best_phi:
            best_phi = phi
            best_theta = theta
        return phi, slack

    for theta0 in (0.0, 1.0, 0.5):
        phi, slack = probe(theta0)
        if phi < -FEAS_TOL:
            return None
        if slack >= 0.0:
            return _build_solution(prob, best_cand[1], t)

    lo, hi = 0.0, 1.0
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    phi1, sl1 = probe(x1)
    if phi1 < -FEAS_TOL:
        return None
    if sl1 >= 0.0:
        return _build_solution(prob, best_cand[1], t)
    phi2, sl2 = probe(x2)
    for _ in range(90):
        if phi2 < -FEAS_TOL or phi1 < -FEAS_TOL:
            return None
        if sl1 >= 0.0 or sl2 >= 0.0:
            return _build_solution(prob, best_cand[1], t)
        if hi - lo < 1e-13:
            break
        if phi1 <= phi2:
            hi = x2
            x2, phi2, sl2 = x1, phi1, sl1
            x1 = hi - _INVPHI * (hi - lo)
            phi1, sl1 = probe(x1)
        else:
            lo = x1
            x1, phi1, sl1 = x2, phi2, sl2
            x2 = lo + _INVPHI * (hi - lo)
            phi2, sl2 = probe(x2)

    # Boundary verdict: build the best equalizing mixture in the top
    # eigenspace at the best theta seen.
    b = best_theta * b1 + (1.0 - best_theta) * b2
    evals, evecs = np.linalg.eigh(b)
    gap = 1e-9 * max(1.0, abs(float(evals[-1])))
    top = evals >= evals[-1] - gap
    vecs = evecs[:, top]
    avals = np.array([float(np.real(v.conj() @ a1 @ v)) / s1 for v in vecs.T])
    bvals = np.array([(float(np.real(v.conj() @ a2 @ v)) - t) / s2 for v in vecs.T])
    _, mu = _mixture(avals, bvals)
    if mu is not None:
        w_mat = sum(m * np.outer(v, v.conj()) for m, v in zip(mu, vecs.T))
        g1, g2 = _slacks(prob, a1, t, w_mat)
        slack = min(g1 / s1, g2 / s2)
        if best_cand is None or slack > best_cand[0]:
            best_cand = (slack, w_mat)
    if best_cand is not None and best_cand[0] >= -FEAS_TOL:
        return _build_solution(prob, best_cand[1], t)
    return None


def _build_solution(prob: SdrProblem, w_mat: np.ndarray, t: float) -> SdrSolution:
    w_mat = 0.5 * (w_mat + w_mat.conj().T)
    w_mat = w_mat / float(np.trace(w_mat).real)
    recovered, flag = _recover(prob, w_mat)
    return SdrSolution(w_t_matrix=w_mat, t_star=float(max(t, 0.0)),
                       recovered_w_t=recovered, rank_flag=flag)


def _recover(prob: SdrProblem, w_mat: np.ndarray):
    evals, evecs = hermitian_eig(w_mat)
    lmax = float(evals[-1])
    if w_mat.shape[0] == 1 or float(evals[-2]) <= RANK_ONE_RATIO * lmax:
        return normalize_phase(evecs[:, -1]), RANK_ONE
    keep = evals > EIG_KEEP
    vecs = evecs[:, keep]
    gains = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), prob.hrd_outer, vecs))
    u_hat = vecs[:, int(np.argmax(gains))]
    return normalize_phase(u_hat), RECOVERED


def rank_one_recover(w_mat: np.ndarray, prob: SdrProblem) -> np.ndarray:
    """Unit vector extracted from a PSD trace-one solution matrix.

    Principal eigenvector when the matrix is (numerically) rank one;
    otherwise the significant eigenvector with the largest second-hop gain,
    which preserves the achieved level.
    """
    vec, _ = _recover(prob, np.asarray(w_mat, dtype=np.complex128))
    return vec


def _polish(prob: SdrProblem, w: np.ndarray, iters: int = 120) -> np.ndarray:
    """Deterministic local ascent of min(f1, f2) on the unit sphere."""
    w = np.asarray(w, dtype=np.complex128).copy()
    pre = prob.rho1 / prob.dl1
    step = 0.5
    val = prob.value_of(w)
    for _ in range(iters):
        c = prob.c_a
        m1w = prob.m1 @ w
        hthw = prob.hth @ w
        num = c * float(np.real(np.vdot(w, m1w)))
        den = 1.0 + c * float(np.real(np.vdot(w, hthw)))
        hop1 = pre * (prob.hsr_norm2 - num / den)
        hop2 = prob.c_second * float(np.real(np.vdot(w, prob.hrd_outer @ w)))
        if hop1 <= hop2:
            grad = -pre * c * (m1w * den - num * hthw) / den ** 2
        else:
            grad = prob.c_second * (prob.hrd_outer @ w)
        g_norm = np.linalg.norm(grad)
        if g_norm < 1e-300:
            break
        improved = False
        s = step
        for _ in range(20):
            cand = w + s * grad / g_norm
            cand = cand / np.linalg.norm(cand)
            cand_val = prob.value_of(cand)
            if cand_val > val:
                w, val = cand, cand_val
                step = min(1.0, s * 1.5)
                improved = True
                break
            s *= 0.5
        if not improved:
            break
    return normalize_phase(w)


def optimum_transmit(ch: ChannelRealization, cfg: SystemConfig,
                     alpha: float, force_bisection: bool = False) -> SdrSolution:
    """Best transmit vector for the max-min two-hop SINR at a fixed time split.

    Closed-form case split first; if neither one-sided condition holds, the
    level t is bisected with each step solved by solve_feasibility, and a
    rank-one vector is recovered from the final matrix. The returned vector
    is never worse than the closed-form candidates. ``force_bisection``
    skips the closed-form shortcut (the two paths must agree; used to
    cross-check them).
    """
    prob = SdrProblem.from_channel(ch, cfg, alpha)
    if cfg.m_t == 1:
        w = np.ones(1, dtype=np.complex128)
        return SdrSolution(w_t_matrix=np.array([[1.0 + 0.0j]]),
                           t_star=prob.value_of(w), recovered_w_t=w,
                           rank_flag=RANK_ONE)

    w_m = w_min_sinr(ch, cfg, alpha)
    f1_m = f1(w_m, ch, cfg, alpha)
    f2_m = f2(w_m, ch, cfg, alpha)
    hrd2 = float(np.vdot(ch.h_rd, ch.h_rd).real)
    if hrd2 < DEGENERATE_NORM2:
        w_mrt = np.zeros(cfg.m_t, dtype=np.complex128)
        w_mrt[0] = 1.0
    else:
        w_mrt = normalize_phase(ch.h_rd.conj())
    f1_t = f1(w_mrt, ch, cfg, alpha)
    f2_t = f2(w_mrt, ch, cfg, alpha)

    scale = max(f1_m, f2_t, 1e-300)
    tie = 1e-12 * scale
    candidates = []
    if f1_m <= f2_m + tie:
        candidates.append((min(f1_m, f2_m), w_m))
    if f2_t <= f1_t + tie:
        candidates.append((min(f1_t, f2_t), w_mrt))
    if candidates and not force_bisection:
        value, w = max(candidates, key=lambda c: c[0])
        return SdrSolution(w_t_matrix=np.outer(w, w.conj()),
                           t_star=float(value), recovered_w_t=w,
                           rank_flag=RANK_ONE)

    # Both hops bind for different vectors: bisect the achievable level.
    lo_candidates = [(min(f1_m, f2_m), w_m), (min(f1_t, f2_t), w_mrt)]
    t_lo, w_best = max(lo_candidates, key=lambda c: c[0])
    t_hi = t_upper_bound(prob)
    t_hi = max(t_hi, t_lo)
    best_sol: SdrSolution | None = None
    for _ in range(60):
        if t_hi - t_lo <= 1e-9 * max(t_hi, 1e-300):
            break
        mid = 0.5 * (t_lo + t_hi)
        sol = solve_feasibility(prob, mid)
        if sol is None:
            t_hi = mid
        else:
            t_lo = mid
            best_sol = sol

    if best_sol is None:
        w_mat = np.outer(w_best, w_best.conj())
        return SdrSolution(w_t_matrix=w_mat, t_star=float(t_lo),
                           recovered_w_t=normalize_phase(w_best),
                           rank_flag=RANK_ONE)

    recovered = best_sol.recovered_w_t
    rec_val = prob.value_of(recovered)
    if rec_val < t_lo * (1.0 - 1e-7):
        recovered = _polish(prob, recovered)
        rec_val = prob.value_of(recovered)
    options = [(rec_val, recovered, best_sol.rank_flag),
               (prob.value_of(w_best), normalize_phase(w_best), best_sol.rank_flag)]
    value, w_fin, flag = max(options, key=lambda c: c[0])
    return SdrSolution(w_t_matrix=best_sol.w_t_matrix,
                       t_star=float(max(t_lo, value)),
                       recovered_w_t=w_fin, rank_flag=flag,
                       dual_multipliers=best_sol.dual_multipliers)
