"""Unitary transforms with a measured coherence constant.

A transform ``F`` is stored as a dense read-only matrix. Its coherence
constant is the smallest ``c`` with ``|F_ij|**2 <= c / n`` for every entry,
i.e. ``c = n * max |F_ij|**2``; it is always measured from the entries.

Real transforms (DCT, Hadamard) keep a float64 matrix and act on complex
vectors exactly as their complex embedding would.
"""
from dataclasses import dataclass, field
import csv
import math

import numpy as np

KINDS = ("dct", "dft", "hadamard", "dct2d", "custom")

_ALIASES = {
    "dct-ii-orthonormal": "dct",
    "dct-ii": "dct",
    "fourier": "dft",
    "densecustom": "custom",
    "dense": "custom",
}

UNITARY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class UnitaryTransform:
    """Dense unitary ``n x n`` operator.

    Attributes
    ----------
    n : int
    kind : str
        One of ``KINDS``.
    matrix : ndarray
        Read-only, float64 for real kinds and complex128 otherwise.
    coherence_c : float
        ``n * max |F_ij|**2``.
    shape : tuple or None
        Image shape ``(height, width)`` for ``dct2d``.
    """

    n: int
    kind: str
    matrix: np.ndarray = field(repr=False)
    coherence_c: float
    shape: tuple = None

    @property
    def is_real(self):
        return not np.iscomplexobj(self.matrix)

    @property
    def entries(self):
        """The matrix as complex128."""
        return self.matrix.astype(np.complex128)

    def conj_transpose(self):
        """The adjoint ``F*`` as a transform of the same kind."""
        m = self.matrix.T if self.is_real else self.matrix.conj().T
        return _wrap(self.kind, np.ascontiguousarray(m), self.shape)


def _wrap(kind, m, shape=None):
    m = np.ascontiguousarray(m)
    m.setflags(write=False)
    return UnitaryTransform(
        n=m.shape[0],
        kind=kind,
        matrix=m,
        coherence_c=coherence_from_matrix(m),
        shape=shape,
    )


def coherence_from_matrix(m):
    n = m.shape[0]
    return float(n * np.max(np.abs(m) ** 2))


def coherence_constant(F):
    """``n * max |F_ij|**2`` for a transform or a raw square matrix."""
    m = F.matrix if isinstance(F, UnitaryTransform) else np.asarray(F)
    return coherence_from_matrix(m)


def dct_matrix(n):
    """Orthonormal DCT-II matrix; row ``k`` is frequency ``k``."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * j + 1) * k / (2 * n)) * math.sqrt(2.0 / n)
    m[0, :] = 1.0 / math.sqrt(n)
    return m


def dft_matrix(n):
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)


def hadamard_matrix(n):
    """Normalized Sylvester-Hadamard matrix; ``n`` must be a power of two."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"Hadamard transform needs a power-of-two size, got {n}")
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h / math.sqrt(n)


def check_unitary(m, tol=UNITARY_TOL):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("transform matrix must be square")
    gram = m.conj().T @ m
    dev = np.max(np.abs(gram - np.eye(m.shape[0]))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not unitary: max |F*F - I| = {dev:.3e} > {tol:g}")


def make_transform(kind, n=None, *, shape=None, matrix=None):
    """Build a transform.

    ``kind`` is ``"dct"``, ``"dft"``, ``"hadamard"``, ``"dct2d"`` (needs
    ``shape=(height, width)``; acts on row-major flattened images) or
    ``"custom"`` (needs ``matrix``, checked for unitarity to 1e-8).
    """
    kind = _ALIASES.get(str(kind).lower(), str(kind).lower())
    if kind == "custom":
        if matrix is None:
            raise ValueError("custom transform needs a matrix")
        m = np.asarray(matrix)
        m = m.astype(np.complex128) if np.iscomplexobj(m) else m.astype(np.float64)
        check_unitary(m)
        if n is not None and m.shape[0] != n:
            raise ValueError(f"matrix is {m.shape[0]}x{m.shape[0]}, expected n={n}")
        return _wrap("custom", m)
    if kind == "dct2d":
        if shape is None:
            if n is None or math.isqrt(n) ** 2 != n:
                raise ValueError("dct2d needs shape=(height, width) or a square n")
            shape = (math.isqrt(n), math.isqrt(n))
        h, w = (int(s) for s in shape)
        if h < 1 or w < 1 or (n is not None and n != h * w):
            raise ValueError(f"invalid dct2d shape {shape} for n={n}")
        return _wrap("dct2d", np.kron(dct_matrix(h), dct_matrix(w)), (h, w))
    if n is None or int(n) != n or n < 1:
        raise ValueError(f"transform size must be a positive integer, got {n!r}")
    n = int(n)
    if kind == "dct":
        return _wrap("dct", dct_matrix(n))
    if kind == "dft":
        return _wrap("dft", dft_matrix(n))
    if kind == "hadamard":
        return _wrap("hadamard", hadamard_matrix(n))
    raise ValueError(f"unknown transform kind {kind!r}; expected one of {KINDS}")


def _check_len(F, v):
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != F.n:
        raise ValueError(f"expected a vector of length {F.n}, got shape {v.shape}")
    return v


def forward(F, x):
    """``F x``."""
    return F.matrix @ _check_len(F, x)


def adjoint(F, y):
    """``F* y``."""
    y = _check_len(F, y)
    if F.is_real:
        return F.matrix.T @ y
    return (y.conj() @ F.matrix).conj()


def load_matrix_csv(path):
    """Read a complex matrix from CSV.

    One matrix row per CSV line, entries interleaved as
    ``re_1,im_1,re_2,im_2,...`` (so ``2n`` numbers per line).
    """
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line or line[0].lstrip().startswith("#"):
                continue
            vals = [float(v) for v in line]
            if len(vals) % 2:
                raise ValueError(f"{path}: odd number of values in a row")
            rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    if not rows:
        raise ValueError(f"{path}: no matrix rows")
    m = np.array(rows)
    if not np.any(m.imag):
        m = m.real
    return m


def save_matrix_csv(path, matrix):
    m = np.asarray(matrix, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in m:
            w.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])


def load_transform(path, n=None):
    return make_transform("custom", n, matrix=load_matrix_csv(path))
