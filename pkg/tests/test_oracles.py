"""Recompute the frozen oracle values independently and compare."""
import mpmath as mp

import oracles

mp.mp.dps = 50


def _splitmix(seed, count):
    mask = (1 << 64) - 1
    s = seed
    out = []
    for _ in range(count):
        s = (s + 0x9E3779B97F4A7C15) & mask
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return tuple(out)


def test_splitmix_reference():
    assert _splitmix(0, 4) == oracles.SPLITMIX64_SEED0


def test_dct_coherence():
    assert float(2 * mp.cos(mp.pi / 16) ** 2) == oracles.DCT8_COHERENCE


def test_iht_constants():
    d = mp.sqrt(mp.mpf(1) / 108)
    rho = mp.sqrt(27) * d
    tau = mp.sqrt(3) * mp.sqrt(1 + 2 * d) / (1 - rho)
    assert abs(float(rho) - oracles.IHT_V1_RHO_N108) < 1e-15
    assert abs(float(tau) - oracles.IHT_V1_TAU_N108) < 1e-15
    rho2 = 2 * mp.sqrt(2) * mp.sqrt(mp.mpf(1) / 32)
    assert abs(float(rho2) - oracles.IHT_V2_RHO_N32) < 1e-15
    assert abs(float(2 / (1 - rho2)) - oracles.IHT_V2_TAU_N32) < 1e-14


def test_bp_l0_constants():
    k = t = 2
    n = 64
    delta = mp.sqrt(mp.mpf(k * t) / n)
    beta = mp.sqrt(mp.mpf(max(k, t)) / n)
    theta = mp.sqrt(k + t) * beta / (1 - delta)
    tau = mp.sqrt(1 + delta) / (1 - delta)
    coef = 2 * tau * mp.sqrt(k + t) / (1 - theta) * (1 + beta / (1 - delta)) + 2 * tau
    for got, want in [(delta, oracles.BP_L0_DELTA), (beta, oracles.BP_L0_BETA), (theta, oracles.BP_L0_THETA),
                      (tau, oracles.BP_L0_TAU), (coef, oracles.BP_L0_COEFFICIENT)]:
        assert abs(float(got) - want) < 1e-14


def test_rip_dft4():
    import numpy as np

    F = np.exp(-2j * np.pi * np.outer(range(4), range(4)) / 4) / 2
    worst = 0.0
    for i in range(4):
        for j in range(4):
            x = F[j, i]
            G = np.array([[1, np.conj(x)], [x, 1]])
            worst = max(worst, np.max(np.abs(np.linalg.eigvalsh(G) - 1)))
    assert abs(worst - oracles.RIP_DFT4_K1T1) < 1e-15
