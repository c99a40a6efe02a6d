"""Hard thresholding and support restriction.

``head_k`` keeps the ``k`` entries of largest magnitude; ties are broken by
the lower index, which makes the operator a total function of its input.
Indices are 0-based throughout.
"""
from dataclasses import dataclass

import numpy as np

from compsense._backend import top_k_indices


@dataclass(frozen=True)
class SparsityPattern:
    """A support ``S`` in the two-block family ``S_{k,t}`` over ``2n`` slots.

    ``indices`` below ``n`` address the coefficient block, the rest the
    noise block.
    """

    k: int
    t: int
    n: int
    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices in support")
        if idx and (idx[0] < 0 or idx[-1] >= 2 * self.n):
            raise ValueError(f"support indices must lie in [0, {2 * self.n})")
        first = sum(1 for i in idx if i < self.n)
        if first > self.k or len(idx) - first > self.t:
            raise ValueError(
                f"support has {first} head and {len(idx) - first} noise indices; "
                f"budgets are k={self.k}, t={self.t}"
            )
        object.__setattr__(self, "indices", idx)

    @property
    def head(self):
        return tuple(i for i in self.indices if i < self.n)

    @property
    def noise(self):
        """Noise-block indices, relative to the block start."""
        return tuple(i - self.n for i in self.indices if i >= self.n)

    @classmethod
    def from_blocks(cls, k, t, n, head, noise):
        return cls(k, t, n, tuple(head) + tuple(int(j) + n for j in noise))


def _check_budget(x, k):
    if not 0 <= k <= x.shape[0]:
        raise ValueError(f"sparsity budget {k} out of range for length {x.shape[0]}")


def support_of_head(x, k):
    """Sorted indices kept by ``head_k``."""
    x = np.asarray(x)
    _check_budget(x, k)
    mag2 = x.real * x.real + x.imag * x.imag if np.iscomplexobj(x) else x * x
    return top_k_indices(mag2.astype(np.float64), k)


def head_k(x, k):
    """Best ``k``-term approximation: keep the ``k`` largest-magnitude entries."""
    x = np.asarray(x)
    out = np.zeros_like(x)
    keep = support_of_head(x, k)
    out[keep] = x[keep]
    return out


def tail_k(x, k):
    """``x - head_k(x, k)``: zeroes the kept entries, leaves the rest."""
    x = np.asarray(x)
    out = x.copy()
    out[support_of_head(x, k)] = 0
    return out


def _split(x):
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] % 2:
        raise ValueError(f"expected a vector of even length, got shape {x.shape}")
    n = x.shape[0] // 2
    return x[:n], x[n:]


def head_kt(x, k, t):
    """Block head: ``head_k`` on the first half, ``head_t`` on the second."""
    a, b = _split(x)
    _check_budget(a, k)
    _check_budget(b, t)
    return np.concatenate([head_k(a, k), head_k(b, t)])


def restrict(x, S):
    """Zero every entry of ``x`` outside the index set ``S``."""
    x = np.asarray(x)
    out = np.zeros_like(x)
    idx = np.fromiter((int(i) for i in S), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise ValueError("index set out of range")
    out[idx] = x[idx]
    return out


def in_model(x, k, t, tol=0.0):
    """True when ``x`` is (k,t)-sparse (entries with modulus <= tol count as zero)."""
    a, b = _split(x)
    return int(np.sum(np.abs(a) > tol)) <= k and int(np.sum(np.abs(b) > tol)) <= t
