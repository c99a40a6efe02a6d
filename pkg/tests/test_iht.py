import math

import numpy as np
import pytest

from compsense import bounds
from compsense.harness import make_compressible
from compsense.iht import FALLBACK_T, IhtConfig, auto_iterations, iht, iht_randomized_start, random_start
from compsense.measurement import StackedOperator, materialize
from compsense.noise import gen_l0
from compsense.sparsity import head_k, head_kt, in_model, tail_k
from compsense.transform import make_transform


def _dense_iht(y, A, k, t, T, x0=None):
    M = materialize(A)
    x = np.zeros(2 * A.n, dtype=complex) if x0 is None else x0.astype(complex)
    for _ in range(T + 1):
        x = head_kt(x + M.conj().T @ (y - M @ x), k, t)
    return x


@pytest.mark.parametrize("kind", ["dct", "dft", "hadamard"])
def test_matches_dense_oracle(backend, kind, rs):
    A = StackedOperator(make_transform(kind, 16))
    y = rs.standard_normal(16)
    res = iht(y, A, IhtConfig(3, 2, 12))
    np.testing.assert_allclose(res.stacked, _dense_iht(y, A, 3, 2, 12), atol=1e-10)
    assert res.iterations == 13
    assert in_model(res.stacked, 3, 2)


def test_fast_and_reference_paths_agree(backend, rs):
    A = StackedOperator(make_transform("dct", 32))
    y = rs.standard_normal(32)
    fast = iht(y, A, IhtConfig(4, 2, 30))
    slow = iht(y, A, IhtConfig(4, 2, 30), callback=lambda i, x: None)
    assert slow.diagnostics["backend"] == "numpy"
    np.testing.assert_allclose(fast.stacked, slow.stacked, atol=1e-12)


def test_exact_recovery_noiseless():
    n, k = 108, 1
    A = StackedOperator(make_transform("dft", n))
    for seed in range(10):
        xhat = make_compressible(n, k, math.inf, seed)
        y = A.F.matrix @ xhat
        T = bounds.min_iterations_v1(1e-8, np.linalg.norm(xhat), 0.0, 0.5)
        res = iht(y, A, IhtConfig(k, 1, T))
        assert np.linalg.norm(res.xhat - xhat) <= 1e-8


def test_bound_domination_with_sparse_noise():
    n, k, t = 108, 1, 1
    F = make_transform("dft", n)
    A = StackedOperator(F)
    for seed in range(30):
        xhat = make_compressible(n, k, 1.5, seed)
        e, _ = gen_l0(n, t, seed + 1000)
        h, tl = head_k(xhat, k), tail_k(xhat, k)
        T = 20
        res = iht(F.matrix @ xhat + e, A, IhtConfig(k, t, T))
        _, _, best = bounds.iht_best_bound(1.0, k, t, n, np.linalg.norm(h), np.linalg.norm(e), np.linalg.norm(tl), T)
        assert np.linalg.norm(res.xhat - h) <= best.upsilon


def test_trajectory_and_callback(rs):
    A = StackedOperator(make_transform("dct", 16))
    y = rs.standard_normal(16)
    seen = []
    ref = np.zeros(16)
    res = iht(y, A, IhtConfig(2, 2, 5, record_trajectory=True), reference=ref, callback=lambda i, x: seen.append(i))
    assert len(res.trajectory) == 6
    assert seen == list(range(1, 7))
    assert res.trajectory[-1] == pytest.approx(np.linalg.norm(res.xhat))
    res2 = iht(y, A, IhtConfig(2, 2, 5, record_trajectory=True))
    assert res2.trajectory[-1] == pytest.approx(res2.residual_l2)


def test_early_exit():
    A = StackedOperator(make_transform("hadamard", 16))
    x = np.zeros(16)
    x[3] = 1.0
    y = A.F.matrix @ x
    res = iht(y, A, IhtConfig(1, 1, 500, early_exit=True))
    assert res.iterations < 501
    np.testing.assert_allclose(res.xhat, x, atol=1e-12)


def test_auto_iterations():
    A = StackedOperator(make_transform("dft", 108))
    y = np.ones(108)
    T = auto_iterations(y, A, 1, 1)
    assert T == bounds.min_iterations_v1(1e-3, np.linalg.norm(y), 0.0, math.sqrt(27 / 108))
    assert auto_iterations(y, A, 1, 0) == 0
    A2 = StackedOperator(make_transform("dft", 32))
    assert auto_iterations(np.ones(32), A2, 1, 1) == bounds.min_iterations_v2(1e-3, math.sqrt(32), math.sqrt(27 / 32))
    A3 = StackedOperator(make_transform("dft", 8))
    assert auto_iterations(np.ones(8), A3, 2, 2) == FALLBACK_T


def test_random_start_is_seeded_and_in_model():
    a, b = random_start(16, 3, 2, 9), random_start(16, 3, 2, 9)
    np.testing.assert_array_equal(a, b)
    assert in_model(a, 3, 2)
    assert np.all(np.abs(a) <= 1.0)
    A = StackedOperator(make_transform("dct", 16))
    res = iht_randomized_start(np.ones(16), A, IhtConfig(3, 2, 4), seed=9)
    np.testing.assert_allclose(res.stacked, _dense_iht(np.ones(16), A, 3, 2, 4, a), atol=1e-10)


def test_input_validation():
    A = StackedOperator(make_transform("dct", 8))
    with pytest.raises(ValueError):
        iht(np.ones(7), A, IhtConfig(1, 1, 1))
    with pytest.raises(ValueError):
        iht(np.ones(8), A, IhtConfig(9, 1, 1))
    with pytest.raises(ValueError):
        IhtConfig(1, 1, -1)
    with pytest.raises(ValueError):
        iht(np.ones(8), A, IhtConfig(1, 1, 1), x0=np.ones(8))
    with pytest.raises(TypeError):
        iht(np.ones(8), A.F, IhtConfig(1, 1, 1))
