"""Restricted isometry certificates for ``A = [F I]`` over (k,t)-sparse vectors.

For a support ``S = S1 u S2`` (``|S1| = k`` coefficient columns, ``|S2| = t``
identity columns) the Gram matrix is

    A_S* A_S = [[I_k, X*], [X, I_t]],    X = F[S2, S1],

so the deviation ``A_S* A_S - I`` has eigenvalues ``+/- sigma(X)``. The exact
route takes eigenvalues of the full ``(k+t) x (k+t)`` Gram matrix; the
Gershgorin route bounds ``sigma_max(X)**2`` by the largest absolute row sum
of ``X* X``, which the coherence assumption caps at ``c k t / n``.

Supports smaller than the budgets need no separate check: their Gram matrix
is a principal submatrix of a full-size one, so by eigenvalue interlacing
its deviation can only be smaller.
"""
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from compsense.measurement import StackedOperator, materialize
from compsense.rng import SplitMix64
from compsense.sparsity import SparsityPattern

ENUMERATE_LIMIT = 10 ** 6
_CHUNK = 4096


@dataclass(frozen=True)
class RipCertificate:
    k: int
    t: int
    n: int
    c: float
    delta_exact: float
    delta_theory: float
    supports_checked: int
    worst_support: SparsityPattern
    mode: str = "enumerate"

    def to_dict(self):
        return {
            "k": self.k,
            "t": self.t,
            "n": self.n,
            "c": self.c,
            "delta_exact": self.delta_exact,
            "delta_theory": self.delta_theory,
            "supports_checked": self.supports_checked,
            "worst_support": list(self.worst_support.indices),
            "mode": self.mode,
        }


def rip_theory_bound(c, k, t, n):
    """RIP constant ``sqrt(c k t / n)`` guaranteed over (k,t)-sparse vectors."""
    if n <= 0 or c < 0 or k < 0 or t < 0:
        raise ValueError("rip_theory_bound needs c, k, t >= 0 and n > 0")
    return math.sqrt(c * k * t / n)


def _gram_batch(A_dense, heads, noises):
    """Stacked Gram matrices ``A_S* A_S`` for a batch of supports."""
    n = A_dense.shape[0]
    cols = np.concatenate([heads, noises + n], axis=1)
    sub = A_dense[:, cols]  # (n, m, k+t)
    sub = np.moveaxis(sub, 1, 0)
    return np.einsum("mij,mil->mjl", sub.conj(), sub)


def _deviation_batch(A_dense, heads, noises):
    size = heads.shape[1] + noises.shape[1]
    if size == 0:
        return np.zeros(heads.shape[0])
    lam = np.linalg.eigvalsh(_gram_batch(A_dense, heads, noises))
    return np.max(np.abs(lam - 1.0), axis=1)


def gram_deviation_norm(A, S):
    """Spectral norm of ``A_S* A_S - I`` for a support ``S``."""
    if not isinstance(S, SparsityPattern):
        S = SparsityPattern(len(S), len(S), A.n, tuple(S))
    if not S.indices:
        return 0.0
    M = materialize(A)
    sub = M[:, list(S.indices)]
    gram = sub.conj().T @ sub
    return float(np.max(np.abs(np.linalg.eigvalsh(gram) - 1.0)))


def gershgorin_bound(A, S):
    """Gershgorin upper bound on ``||A_S* A_S - I||``.

    ``sqrt(max_i sum_j |(X* X)_ij|)`` with ``X = F[S2, S1]``.
    """
    if not isinstance(S, SparsityPattern):
        S = SparsityPattern(len(S), len(S), A.n, tuple(S))
    if not S.head or not S.noise:
        return 0.0
    X = A.F.matrix[np.ix_(S.noise, S.head)]
    G = X.conj().T @ X
    return float(math.sqrt(np.max(np.sum(np.abs(G), axis=1))))


def _iter_supports(n, k, t):
    heads = list(combinations(range(n), k))
    for noise in combinations(range(n), t):
        for head in heads:
            yield head, noise


def _batched(it, k, t, size):
    hb, nb = [], []
    for head, noise in it:
        hb.append(head)
        nb.append(noise)
        if len(hb) == size:
            yield _as_block(hb, k), _as_block(nb, t)
            hb, nb = [], []
    if hb:
        yield _as_block(hb, k), _as_block(nb, t)


def _as_block(rows, width):
    return np.array(rows, dtype=np.int64).reshape(len(rows), width)


def _sampled_supports(n, k, t, m, seed):
    gen = SplitMix64(seed)
    for _ in range(m):
        head = tuple(sorted(gen.sample(n, k).tolist()))
        noise = tuple(sorted(gen.sample(n, t).tolist()))
        yield head, noise


def rip_exact(A, k, t, mode="enumerate", m=1000, seed=0):
    """Measure the (k,t)-RIP constant of ``A = [F I]``.

    Parameters
    ----------
    A : StackedOperator
    k, t : int
        Budgets for the coefficient and noise blocks (clipped to ``n``).
    mode : {"enumerate", "sample"}
        ``enumerate`` checks every full-size support and refuses more than
        ``ENUMERATE_LIMIT`` of them; ``sample`` checks ``m`` uniformly random
        supports drawn from ``SplitMix64(seed)``.

    Returns
    -------
    RipCertificate
    """
    if not isinstance(A, StackedOperator):
        A = StackedOperator(A)
    n = A.n
    if k < 0 or t < 0:
        raise ValueError("budgets must be non-negative")
    kk, tt = min(k, n), min(t, n)
    if mode == "enumerate":
        total = math.comb(n, kk) * math.comb(n, tt)
        if total > ENUMERATE_LIMIT:
            raise ValueError(
                f"{total} supports exceed the enumeration limit {ENUMERATE_LIMIT}; use mode='sample'"
            )
        supports = _iter_supports(n, kk, tt)
    elif mode == "sample":
        total = int(m)
        supports = _sampled_supports(n, kk, tt, total, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    M = materialize(A)
    best, worst = -1.0, None
    checked = 0
    for heads, noises in _batched(supports, kk, tt, _CHUNK):
        dev = _deviation_batch(M, heads, noises)
        i = int(np.argmax(dev))
        if dev[i] > best:
            best = float(dev[i])
            worst = (heads[i].tolist(), noises[i].tolist())
        checked += dev.shape[0]
    if worst is None:
        best, worst = 0.0, ([], [])
    c = A.F.coherence_c
    return RipCertificate(
        k=k,
        t=t,
        n=n,
        c=c,
        delta_exact=max(best, 0.0),
        delta_theory=rip_theory_bound(c, k, t, n),
        supports_checked=checked,
        worst_support=SparsityPattern.from_blocks(k, t, n, worst[0], worst[1]),
        mode=mode,
    )


def partial_rip_check(F, S, z, k=None):
    """Check ``||(F*)_S F z||^2 <= (k |S| c / n) ||z||^2``.

    ``(F*)_S`` keeps only the columns of ``F*`` indexed by ``S``. ``k``
    defaults to the number of nonzeros of ``z``.

    Returns ``(lhs, rhs, holds)``.
    """
    z = np.asarray(z)
    S = np.array(sorted(int(i) for i in S), dtype=np.int64)
    if k is None:
        k = int(np.count_nonzero(z))
    Fz = F.matrix @ z
    Fstar = F.matrix.T if F.is_real else F.matrix.conj().T
    v = Fstar[:, S] @ Fz[S]
    lhs = float(np.vdot(v, v).real)
    rhs = k * S.size * F.coherence_c / F.n * float(np.vdot(z, z).real)
    return lhs, rhs, lhs <= rhs + 1e-12
