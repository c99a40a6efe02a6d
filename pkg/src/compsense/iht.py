"""(k,t)-iterative hard thresholding over ``A = [F I]``.

Each update is a unit gradient step followed by the block hard threshold::

    z = x + A*(y - A x)
    x = head_kt(z, k, t)

starting from ``x = 0`` (or a supplied/random start) and running exactly
``T + 1`` updates.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from compsense import _backend
from compsense.bounds import min_iterations_v1, min_iterations_v2
from compsense.measurement import StackedOperator, apply
from compsense.rng import SplitMix64
from compsense.sparsity import head_k

log = logging.getLogger(__name__)

AUTO_EPS = 1e-3
FALLBACK_T = 100


@dataclass
class IhtConfig:
    k: int
    t: int
    T: object = "auto"
    record_trajectory: bool = False
    early_exit: bool = False

    def __post_init__(self):
        if self.k < 0 or self.t < 0:
            raise ValueError("k and t must be non-negative")
        if self.T != "auto" and (int(self.T) != self.T or self.T < 0):
            raise ValueError(f"T must be a non-negative integer or 'auto', got {self.T!r}")


@dataclass
class RecoveryResult:
    xhat: np.ndarray
    ehat: np.ndarray
    iterations: int
    residual_l2: float
    trajectory: list = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def stacked(self):
        return np.concatenate([self.xhat, self.ehat])


def auto_iterations(y, A, k, t, eps=AUTO_EPS):
    """Iteration count from the first IHT regime's formula.

    The ground-truth scale ``sqrt(|head|^2 + |e|^2)`` is unknown to the
    algorithm, so ``|y|_2`` stands in for it. Falls back to the second
    regime, and to ``FALLBACK_T`` when neither regime's ``rho`` is below one.
    """
    c, n = A.F.coherence_c, A.n
    d = math.sqrt(c * k * t / n)
    scale = float(np.linalg.norm(y))
    if d == 0.0:
        return 0
    rho1 = math.sqrt(27.0) * d
    if rho1 < 1.0:
        return min_iterations_v1(eps, scale, 0.0, rho1)
    rho2 = 2.0 * math.sqrt(2.0) * d
    if rho2 < 1.0:
        return min_iterations_v2(eps, scale, rho2)
    log.warning("k=%d, t=%d, n=%d, c=%.3g is outside both IHT regimes; using T=%d", k, t, n, c, FALLBACK_T)
    return FALLBACK_T


def _check(y, A, cfg):
    if not isinstance(A, StackedOperator):
        raise TypeError("A must be a StackedOperator")
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != A.n:
        raise ValueError(f"y has shape {y.shape}, expected ({A.n},)")
    if cfg.k > A.n or cfg.t > A.n:
        raise ValueError(f"budgets k={cfg.k}, t={cfg.t} exceed n={A.n}")
    return y


def _error(x, xh, reference, n):
    if reference.shape[0] == 2 * n:
        return float(np.linalg.norm(x - reference))
    return float(np.linalg.norm(xh - reference))


def iht(y, A, cfg, x0=None, reference=None, callback=None):
    """Run (k,t)-IHT.

    Parameters
    ----------
    y : ndarray, shape (n,)
    A : StackedOperator
    cfg : IhtConfig
    x0 : ndarray, shape (2n,), optional
        Starting point; zero by default.
    reference : ndarray, shape (n,) or (2n,), optional
        With ``cfg.record_trajectory``, the trajectory holds the distance of
        each iterate (coefficient block, or the full vector for a length-2n
        reference) to this vector; otherwise it holds residual norms.
    callback : callable, optional
        Called as ``callback(i, x)`` after update ``i`` (1-based).

    Returns
    -------
    RecoveryResult
    """
    y = _check(y, A, cfg)
    n, k, t = A.n, cfg.k, cfg.t
    T = auto_iterations(y, A, k, t) if cfg.T == "auto" else int(cfg.T)
    if x0 is None:
        xh = np.zeros(n, dtype=y.dtype if np.iscomplexobj(y) else np.float64)
        e = xh.copy()
    else:
        x0 = np.asarray(x0)
        if x0.shape != (2 * n,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({2 * n},)")
        xh, e = x0[:n].copy(), x0[n:].copy()

    F = A.F.matrix
    fast = (
        A.F.is_real
        and not np.iscomplexobj(y)
        and not np.iscomplexobj(xh)
        and callback is None
        and not cfg.record_trajectory
        and not cfg.early_exit
    )
    trajectory = [] if cfg.record_trajectory else None
    done = T + 1
    if fast:
        xh, e = _backend.iht_loop_real(F, y.astype(np.float64), xh, e, k, t, T + 1)
    else:
        if reference is not None:
            reference = np.asarray(reference)
        Fh = F.T if A.F.is_real else F.conj().T
        for i in range(1, T + 2):
            r = y - F @ xh - e
            if cfg.early_exit and not cfg.record_trajectory and np.linalg.norm(r) < 1e-12:
                done = i - 1
                break
            xh = head_k(xh + Fh @ r, k)
            e = head_k(e + r, t)
            if trajectory is not None:
                if reference is None:
                    trajectory.append(float(np.linalg.norm(y - F @ xh - e)))
                else:
                    trajectory.append(_error(np.concatenate([xh, e]), xh, reference, n))
            if callback is not None:
                callback(i, np.concatenate([xh, e]))
    resid = float(np.linalg.norm(y - apply(A, np.concatenate([xh, e]))))
    return RecoveryResult(
        xhat=xh,
        ehat=e,
        iterations=done,
        residual_l2=resid,
        trajectory=trajectory,
        diagnostics={"T": T, "backend": _backend.BACKEND if fast else "numpy"},
    )


def random_start(n, k, t, seed):
    """Seeded (k,t)-sparse vector with entries uniform on the complex unit disk."""
    gen = SplitMix64(seed)
    x0 = np.zeros(2 * n, dtype=np.complex128)
    head = gen.sample(n, k)
    noise = gen.sample(n, t)
    x0[head] = gen.unit_disk(k)
    x0[n + noise] = gen.unit_disk(t)
    return x0


def iht_randomized_start(y, A, cfg, seed, **kwargs):
    """:func:`iht` from a seeded random (k,t)-sparse start."""
    return iht(y, A, cfg, x0=random_start(A.n, cfg.k, cfg.t, seed), **kwargs)
