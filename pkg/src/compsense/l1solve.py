"""Constrained ell_1 minimization: basis pursuit and the modified Dantzig selector.

Both problems have the form ``min |z|_1`` subject to ``K_j z`` lying in simple
sets, and are solved by over-relaxed ADMM on the lifted problem

    minimize  |v_0|_1 + sum_j indicator_j(v_j)   subject to  K x = v,
    K = [I; K_1; K_2; ...]

The x-update is the least-squares projection ``x = (K*K)^{-1} K*(v - u)``,
which does not involve the penalty, so the penalty can be retuned by residual
balancing at no cost. Retuning runs every few iterations during a warm-up
window only. The v-update is closed-form: complex soft thresholding
for the ell_1 block, projection onto an ell_2 ball for the BP constraint and
entrywise modulus clipping (boxes for real data) for the ell_inf constraints.

Complex vectors use the sum of moduli as the ell_1 norm; real data stays on
the real path.
"""
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import linalg

from compsense.iht import RecoveryResult
from compsense.measurement import StackedOperator, materialize

log = logging.getLogger(__name__)

RELAX = 1.6
_BALANCE_RATIO = 10.0
_BALANCE_FACTOR = 2.0
_CHECK_EVERY = 10
# penalty retuning stops after this many iterations; a fixed penalty restores
# the standard ADMM convergence guarantee and prevents rho cycling
_BALANCE_UNTIL = 1000


@dataclass
class SolverConfig:
    max_iterations: int = 20000
    feasibility_tol: float = 1e-7
    objective_tol: float = 1e-8
    penalty: float = 1.0

    def __post_init__(self):
        if min(self.max_iterations, self.feasibility_tol, self.objective_tol, self.penalty) <= 0:
            raise ValueError("solver settings must be positive")


@dataclass
class SolveDiagnostics:
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    feasible: bool
    max_violation: float = 0.0
    penalty: float = 1.0

    def to_dict(self):
        return dict(self.__dict__)


def l1_norm(z):
    return float(np.sum(np.abs(z)))


def soft_threshold(v, lam):
    """Prox of ``lam |.|_1``; shrinks complex entries toward zero by modulus."""
    mag = np.abs(v)
    scale = np.maximum(0.0, 1.0 - lam / np.where(mag > 0, mag, 1.0))
    return v * scale


def project_ball(v, center, radius):
    d = v - center
    nrm = float(np.linalg.norm(d))
    if nrm <= radius:
        return v.copy()
    return center + d * (radius / nrm)


def project_box(v, center, radius):
    """Clip each entry of ``v - center`` to modulus ``radius``."""
    d = v - center
    mag = np.abs(d)
    scale = np.minimum(1.0, radius / np.where(mag > 0, mag, 1.0))
    return center + d * scale


def _adjoint(M):
    return M.T if not np.iscomplexobj(M) else M.conj().T


def _identity_scale(G, tol=1e-10):
    """``s`` if ``G`` equals ``s I`` to ``tol`` (entrywise), else None."""
    s = float(np.real(np.trace(G))) / G.shape[0]
    if np.max(np.abs(G - s * np.eye(G.shape[0]))) <= tol * max(1.0, abs(s)):
        return s
    return None


class _Block:
    """One constraint row of ``K`` with its projection."""

    def __init__(self, fwd, adj, project, violation):
        self.fwd = fwd
        self.adj = adj
        self.project = project
        self.violation = violation


def _admm(N, dtype, blocks, solve_normal, cfg):
    """Generic over-relaxed ADMM; returns ``(z, SolveDiagnostics)``."""
    rho = float(cfg.penalty)
    x = np.zeros(N, dtype=dtype)
    v0 = np.zeros(N, dtype=dtype)
    u0 = np.zeros(N, dtype=dtype)
    vs = [b.project(b.fwd(x)) for b in blocks]
    us = [np.zeros_like(v) for v in vs]
    dim_v = N + sum(v.size for v in vs)
    eps_pri = cfg.feasibility_tol * math.sqrt(dim_v)
    eps_dual = cfg.feasibility_tol * math.sqrt(N)
    r_norm = s_norm = math.inf
    viol = math.inf
    prev_obj = math.inf
    it = 0
    converged = False
    for it in range(1, cfg.max_iterations + 1):
        rhs = v0 - u0
        for b, v, u in zip(blocks, vs, us):
            rhs = rhs + b.adj(v - u)
        x = solve_normal(rhs)

        Kx = [x] + [b.fwd(x) for b in blocks]
        old = [v0] + vs
        Kh = [RELAX * a + (1.0 - RELAX) * o for a, o in zip(Kx, old)]

        v0 = soft_threshold(Kh[0] + u0, 1.0 / rho)
        vs = [b.project(kh + u) for b, kh, u in zip(blocks, Kh[1:], us)]
        u0 = u0 + Kh[0] - v0
        us = [u + kh - v for u, kh, v in zip(us, Kh[1:], vs)]

        r_norm = math.sqrt(
            float(np.vdot(Kx[0] - v0, Kx[0] - v0).real)
            + sum(float(np.vdot(a - v, a - v).real) for a, v in zip(Kx[1:], vs))
        )
        dv = (v0 - old[0]) + sum(b.adj(v - o) for b, v, o in zip(blocks, vs, old[1:]))
        s_norm = rho * float(np.linalg.norm(dv))

        if r_norm <= eps_pri and s_norm <= eps_dual and it % _CHECK_EVERY == 0:
            viol = max((b.violation(v0) for b in blocks), default=0.0)
            obj = l1_norm(v0)
            stalled = abs(prev_obj - obj) <= cfg.objective_tol * max(1.0, obj)
            prev_obj = obj
            if viol <= cfg.feasibility_tol and stalled:
                converged = True
                break

        if it % _CHECK_EVERY or it > _BALANCE_UNTIL:
            continue
        if r_norm > _BALANCE_RATIO * s_norm:
            rho *= _BALANCE_FACTOR
            u0 = u0 / _BALANCE_FACTOR
            us = [u / _BALANCE_FACTOR for u in us]
        elif s_norm > _BALANCE_RATIO * r_norm:
            rho /= _BALANCE_FACTOR
            u0 = u0 * _BALANCE_FACTOR
            us = [u * _BALANCE_FACTOR for u in us]

    viol = max((b.violation(v0) for b in blocks), default=0.0)
    feasible = converged and viol <= cfg.feasibility_tol
    if not feasible:
        log.warning(
            "ADMM stopped after %d iterations without convergence (primal %.2e, dual %.2e, violation %.2e)",
            it, r_norm, s_norm, viol,
        )
    diag = SolveDiagnostics(
        iterations=it,
        primal_residual=r_norm,
        dual_residual=s_norm,
        objective=l1_norm(v0),
        feasible=feasible,
        max_violation=viol,
        penalty=rho,
    )
    return v0, diag


def _prepare(y, M):
    y = np.asarray(y)
    M = np.asarray(M)
    if M.ndim != 2 or y.ndim != 1 or M.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: M is {M.shape}, y is {y.shape}")
    dtype = np.complex128 if (np.iscomplexobj(M) or np.iscomplexobj(y)) else np.float64
    return y.astype(dtype), M.astype(dtype) if M.dtype != dtype else M, dtype


def _zero_result(N, dtype, viol):
    return np.zeros(N, dtype=dtype), SolveDiagnostics(0, 0.0, 0.0, 0.0, True, viol)


def bp_violation(M, y, eta, z):
    """``max(0, |Mz - y|_2 - eta)``."""
    return max(0.0, float(np.linalg.norm(M @ z - y)) - eta)


def basis_pursuit(y, M, eta, cfg=None, gram_scale=None):
    """Solve ``min |z|_1`` subject to ``|M z - y|_2 <= eta``.

    Parameters
    ----------
    y : ndarray, shape (m,)
    M : ndarray, shape (m, N)
    eta : float
    cfg : SolverConfig, optional
    gram_scale : float, optional
        ``s`` when ``M M* = s I`` is known (1 for unitary ``M``, 2 for
        ``[F I]``); otherwise ``M M*`` is formed and factored.

    Returns
    -------
    (ndarray, SolveDiagnostics)
    """
    cfg = cfg or SolverConfig()
    if eta < 0:
        raise ValueError("eta must be non-negative")
    y, M, dtype = _prepare(y, M)
    m, N = M.shape
    Mh = _adjoint(M)
    if float(np.linalg.norm(y)) <= eta:
        return _zero_result(N, dtype, 0.0)

    if gram_scale is None:
        gram_scale = _identity_scale(M @ Mh)
    if gram_scale is not None:
        c = 1.0 / (1.0 + gram_scale)

        def solve_normal(b):
            return b - c * (Mh @ (M @ b))
    else:
        chol = linalg.cho_factor(np.eye(m, dtype=dtype) + M @ Mh)

        def solve_normal(b):
            return b - Mh @ linalg.cho_solve(chol, M @ b)

    block = _Block(
        fwd=lambda x: M @ x,
        adj=lambda w: Mh @ w,
        project=lambda w: project_ball(w, y, eta),
        violation=lambda z: bp_violation(M, y, eta, z),
    )
    return _admm(N, dtype, [block], solve_normal, cfg)


def ds_violations(M, y, eta1, eta2, z):
    """Constraint violations ``(corr, raw)`` of the modified Dantzig selector."""
    r = y - M @ z
    corr = max(0.0, float(np.max(np.abs(_adjoint(M) @ r))) - eta2)
    raw = 0.0 if eta1 is None else max(0.0, float(np.max(np.abs(r))) - eta1)
    return corr, raw


def dantzig_selector(y, M, eta1, eta2, cfg=None):
    """Solve ``min |z|_1`` s.t. ``|M*(y - M z)|_inf <= eta2`` and ``|M z - y|_inf <= eta1``.

    ``eta1=None`` drops the second constraint (the classical selector).
    """
    cfg = cfg or SolverConfig()
    if eta2 < 0 or (eta1 is not None and eta1 < 0):
        raise ValueError("eta1 and eta2 must be non-negative")
    y, M, dtype = _prepare(y, M)
    m, N = M.shape
    Mh = _adjoint(M)
    Mhy = Mh @ y
    if max(ds_violations(M, y, eta1, eta2, np.zeros(N, dtype=dtype))) == 0.0:
        return _zero_result(N, dtype, 0.0)

    G = Mh @ M
    s = _identity_scale(G)
    with_raw = eta1 is not None
    if s is not None:
        denom = 1.0 + s * s + (s if with_raw else 0.0)

        def solve_normal(b):
            return b / denom
    else:
        lam, Q = np.linalg.eigh(G)
        inv = 1.0 / (1.0 + lam * lam + (lam if with_raw else 0.0))
        Qh = _adjoint(Q)

        def solve_normal(b):
            return Q @ (inv * (Qh @ b))

    blocks = [
        _Block(
            fwd=lambda x: Mh @ (M @ x),
            adj=lambda w: Mh @ (M @ w),
            project=lambda w: project_box(w, Mhy, eta2),
            violation=lambda z: ds_violations(M, y, eta1, eta2, z)[0],
        )
    ]
    if with_raw:
        blocks.append(
            _Block(
                fwd=lambda x: M @ x,
                adj=lambda w: Mh @ w,
                project=lambda w: project_box(w, y, eta1),
                violation=lambda z: ds_violations(M, y, eta1, eta2, z)[1],
            )
        )
    return _admm(N, dtype, blocks, solve_normal, cfg)


def bp_l0(y, A, eta, cfg=None):
    """Basis pursuit over ``[F I]``; the solution is split into blocks, not thresholded."""
    if not isinstance(A, StackedOperator):
        raise TypeError("A must be a StackedOperator")
    z, diag = basis_pursuit(y, materialize(A), eta, cfg, gram_scale=2.0)
    n = A.n
    resid = float(np.linalg.norm(np.asarray(y) - materialize(A) @ z))
    return RecoveryResult(
        xhat=z[:n],
        ehat=z[n:],
        iterations=diag.iterations,
        residual_l2=resid,
        diagnostics=diag.to_dict(),
    )
