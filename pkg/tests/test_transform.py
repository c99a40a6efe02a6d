import numpy as np
import pytest
import scipy.fft
from scipy.linalg import hadamard

import oracles
from compsense.transform import (
    adjoint, check_unitary, coherence_constant, forward, load_transform, make_transform, save_matrix_csv,
)


@pytest.mark.parametrize("kind,n", [("dct", 8), ("dct", 17), ("dft", 8), ("dft", 12), ("hadamard", 16)])
def test_unitary(kind, n):
    F = make_transform(kind, n)
    m = F.entries
    np.testing.assert_allclose(m.conj().T @ m, np.eye(n), atol=1e-12)


def test_dct_matches_scipy(rs):
    x = rs.standard_normal(16)
    F = make_transform("dct", 16)
    np.testing.assert_allclose(forward(F, x), scipy.fft.dct(x, norm="ortho"), atol=1e-12)


def test_dft_matches_numpy(rs):
    x = rs.standard_normal(10) + 1j * rs.standard_normal(10)
    F = make_transform("dft", 10)
    np.testing.assert_allclose(forward(F, x), np.fft.fft(x, norm="ortho"), atol=1e-12)


def test_hadamard_matches_scipy():
    F = make_transform("hadamard", 8)
    np.testing.assert_allclose(F.matrix, hadamard(8) / np.sqrt(8), atol=1e-15)


def test_hadamard_needs_power_of_two():
    with pytest.raises(ValueError):
        make_transform("hadamard", 12)


def test_coherence_values():
    assert make_transform("dft", 8).coherence_c == pytest.approx(1.0, abs=1e-12)
    assert make_transform("hadamard", 8).coherence_c == pytest.approx(1.0, abs=1e-12)
    c = make_transform("dct", 8).coherence_c
    assert c == pytest.approx(oracles.DCT8_COHERENCE, abs=1e-12)
    assert c <= 2.0
    assert make_transform("dft", 8).coherence_c == pytest.approx(coherence_constant(make_transform("dft", 8)))


@pytest.mark.parametrize("kind", ["dct", "dft", "hadamard"])
def test_round_trip(kind, rs):
    F = make_transform(kind, 16)
    x = rs.standard_normal(16) + 1j * rs.standard_normal(16)
    np.testing.assert_allclose(adjoint(F, forward(F, x)), x, atol=1e-10)


def test_dct2d_is_separable(rs):
    F = make_transform("dct2d", shape=(4, 6))
    img = rs.standard_normal((4, 6))
    want = scipy.fft.dctn(img, norm="ortho")
    np.testing.assert_allclose(forward(F, img.ravel()).reshape(4, 6), want, atol=1e-12)


def test_length_mismatch():
    with pytest.raises(ValueError):
        forward(make_transform("dct", 8), np.zeros(7))


def test_custom_rejects_non_unitary():
    with pytest.raises(ValueError):
        make_transform("custom", matrix=np.ones((3, 3)))
    with pytest.raises(ValueError):
        check_unitary(2 * np.eye(3))


def test_csv_round_trip(tmp_path):
    F = make_transform("dft", 6)
    path = tmp_path / "f.csv"
    save_matrix_csv(path, F.matrix)
    G = load_transform(path, 6)
    np.testing.assert_array_equal(G.matrix, F.matrix)
    assert G.kind == "custom"


def test_matrix_read_only():
    F = make_transform("dct", 4)
    with pytest.raises(ValueError):
        F.matrix[0, 0] = 1.0
