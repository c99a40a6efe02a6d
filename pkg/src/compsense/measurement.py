"""The stacked operator ``A = [F I]`` acting on ``[coefficients; noise]``."""
from dataclasses import dataclass

import numpy as np

from compsense.transform import UnitaryTransform, adjoint, forward


@dataclass(frozen=True, eq=False)
class StackedOperator:
    """``A = [F I] : C^{2n} -> C^n``, applied blockwise."""

    F: UnitaryTransform

    @property
    def n(self):
        return self.F.n

    @property
    def shape(self):
        return (self.n, 2 * self.n)

    def apply(self, v):
        return apply(self, v)

    def adjoint_apply(self, y):
        return adjoint_apply(self, y)


def apply(A, v):
    """``F v[:n] + v[n:]``."""
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != 2 * A.n:
        raise ValueError(f"expected a vector of length {2 * A.n}, got shape {v.shape}")
    return forward(A.F, v[: A.n]) + v[A.n :]


def adjoint_apply(A, y):
    """``A* y = [F* y; y]``."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != A.n:
        raise ValueError(f"expected a vector of length {A.n}, got shape {y.shape}")
    return np.concatenate([adjoint(A.F, y), y])


def materialize(A):
    """Dense ``n x 2n`` matrix ``[F I]``."""
    m = A.F.matrix
    return np.hstack([m, np.eye(A.n, dtype=m.dtype)])
