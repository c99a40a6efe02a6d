import numpy as np
import pytest

from compsense import _backend, rng, sparsity


@pytest.fixture(params=sorted(_backend.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per importable kernel backend."""
    mod = _backend.available_backends()[request.param]
    monkeypatch.setattr(_backend, "splitmix64_fill", mod.splitmix64_fill)
    monkeypatch.setattr(_backend, "top_k_indices", mod.top_k_indices)
    monkeypatch.setattr(_backend, "iht_loop_real", mod.iht_loop_real)
    monkeypatch.setattr(rng, "splitmix64_fill", mod.splitmix64_fill)
    monkeypatch.setattr(sparsity, "top_k_indices", mod.top_k_indices)
    return request.param


@pytest.fixture
def rs():
    return np.random.default_rng(12345)
