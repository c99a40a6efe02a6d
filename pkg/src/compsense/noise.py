"""Seeded noise for the three corruption models.

* ``L0``: draw ``t_i`` uniformly from ``{1, ..., t_max}``, a support of size
  ``t_i`` uniformly among all such subsets (no replacement), and values
  uniform on [0, 1).
* ``L2`` / ``LINF``: every entry uniform on [0, 1) (dense). Which norm is
  recorded as the budget is the only difference.

Every draw owns a fresh :class:`~compsense.rng.SplitMix64` seeded by the
caller; trial and channel streams come from :func:`~compsense.rng.derive_seed`.
"""
from dataclasses import dataclass

import numpy as np

from compsense.rng import SplitMix64, derive_seed

MODELS = ("L0", "L2", "LINF", "NONE")


@dataclass
class NoiseSpec:
    model: str
    seed: int
    t_max: int = 0
    realized: float = None

    def __post_init__(self):
        self.model = self.model.upper()
        if self.model not in MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if self.model == "L0" and self.t_max < 1:
            raise ValueError("L0 noise needs t_max >= 1")

    def draw(self, n):
        """Generate a noise vector and record its budget in ``realized``."""
        if self.model == "NONE":
            e = np.zeros(n)
        elif self.model == "L0":
            e, _ = gen_l0(n, self.t_max, self.seed)
        else:
            e = gen_dense(n, self.seed)
        self.realized = budget_of(e, self.model)
        return e


def gen_l0(n, t_max, seed):
    """Sparse noise with a random count ``t_i`` of nonzeros; returns ``(e, t_i)``."""
    if not 1 <= t_max <= n:
        raise ValueError(f"t_max must lie in [1, n], got {t_max} for n={n}")
    gen = SplitMix64(seed)
    t_i = 1 + gen.below(t_max)
    support = gen.sample(n, t_i)
    e = np.zeros(n)
    e[support] = gen.random(t_i)
    return e, t_i


def gen_dense(n, seed):
    """Dense noise, entries i.i.d. uniform on [0, 1)."""
    return SplitMix64(seed).random(n)


def budget_of(e, model):
    """``|e|_0``, ``|e|_2`` or ``|e|_inf`` depending on ``model``."""
    e = np.asarray(e)
    model = model.upper()
    if model == "L0":
        return float(np.count_nonzero(e))
    if model == "L2":
        return float(np.linalg.norm(e))
    if model in ("LINF", "NONE"):
        return float(np.max(np.abs(e))) if e.size else 0.0
    raise ValueError(f"unknown noise model {model!r}")


def channel_noise(spec, n, channels):
    """Independent draws per channel, seeded by ``derive_seed(spec.seed, channel)``."""
    out = []
    for ch in range(channels):
        sub = NoiseSpec(spec.model, derive_seed(spec.seed, ch), spec.t_max)
        out.append((sub.draw(n), sub.realized))
    return out
