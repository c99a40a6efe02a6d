"""Pure numpy implementations of the hot kernels.

``_ckernels.pyx`` mirrors every function here with the same signature and
the same results; ``_backend`` picks one at import time.
"""
import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64_fill(state, count):
    """Draw ``count`` SplitMix64 outputs starting from ``state``.

    Returns the outputs as a uint64 array and the advanced state.
    """
    state = int(state) & MASK64
    count = int(count)
    if count < 0:
        raise ValueError("count must be non-negative")
    steps = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state) + steps * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z, (state + count * GOLDEN_GAMMA) & MASK64


def top_k_indices(mag2, k):
    """Indices of the ``k`` largest entries of ``mag2``, ascending.

    Ties go to the lower index.
    """
    mag2 = np.ascontiguousarray(mag2, dtype=np.float64)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k >= mag2.size:
        return np.arange(mag2.size, dtype=np.int64)
    order = np.argsort(-mag2, kind="stable")[:k]
    return np.sort(order).astype(np.int64)


def _head_inplace(v, k):
    keep = top_k_indices(v * v, k)
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


def iht_loop_real(F, y, xh, e, k, t, iterations):
    """Run ``iterations`` (k,t)-IHT updates for a real dense ``F``.

    Operates on the stacked operator ``[F I]``; returns the final
    ``(xh, e)`` blocks.
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xh = np.array(xh, dtype=np.float64)
    e = np.array(e, dtype=np.float64)
    Ft = F.T
    for _ in range(int(iterations)):
        r = y - F @ xh - e
        xh = _head_inplace(xh + Ft @ r, k)
        e = _head_inplace(e + r, t)
    return xh, e
