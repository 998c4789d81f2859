import math

import numpy as np
import pytest

from qmrg import DomainError, LatticeConfig, frequency_product_log, matsubara_frequency_sq
from qmrg.lattice import matsubara_frequencies_sq


def test_config_validation():
    for bad in [dict(N=3, beta=1.0), dict(N=0, beta=1.0), dict(N=4, beta=0.0),
                dict(N=4, beta=1.0, M=-1.0), dict(N=4, beta=1.0, hbar=0.0),
                dict(N=4, beta=float("nan"))]:
        with pytest.raises(DomainError):
            LatticeConfig(**bad)


def test_epsilon_is_derived():
    cfg = LatticeConfig(10, 2.0, hbar=0.5)
    assert cfg.epsilon == 0.5 * 2.0 / 11
    assert cfg.n_modes == 5


def test_n2_frequency():
    assert matsubara_frequency_sq(LatticeConfig(2, 1.0), 1) == pytest.approx(27.0, rel=1e-14)


def test_cosine_form():
    cfg = LatticeConfig(14, 3.0)
    for m in range(1, 8):
        ref = (2 - 2 * math.cos(2 * math.pi * m / 15)) / cfg.epsilon ** 2
        assert matsubara_frequency_sq(cfg, m) == pytest.approx(ref, rel=1e-12)


def test_continuum_limit():
    beta = 7.0
    cfg = LatticeConfig(10**5, beta)
    ref = (2 * math.pi / beta) ** 2
    assert abs(matsubara_frequency_sq(cfg, 1) / ref - 1) < 1e-6


def test_top_mode_bound():
    cfg = LatticeConfig(100, 1.0)
    w2 = matsubara_frequencies_sq(cfg)
    assert w2.argmax() == cfg.n_modes - 1
    assert w2[-1] <= 4 / cfg.epsilon ** 2


def test_out_of_range_mode():
    cfg = LatticeConfig(10, 1.0)
    for m in (0, 6, -1):
        with pytest.raises(DomainError):
            matsubara_frequency_sq(cfg, m)


def test_positive_and_increasing():
    for N in (2, 8, 1000):
        w2 = matsubara_frequencies_sq(LatticeConfig(N, 0.3))
        assert np.all(w2 > 0)
        assert np.all(np.diff(w2) > 0)


def test_continuum_stability():
    a = matsubara_frequency_sq(LatticeConfig(10**4, 10.0), 1)
    b = matsubara_frequency_sq(LatticeConfig(2 * 10**4, 10.0), 1)
    assert abs(a / b - 1) < 1e-3


def _brute_product_log(N):
    cfg = LatticeConfig(N, 1.0)
    return sum(math.log(cfg.epsilon ** 2 * matsubara_frequency_sq(cfg, m))
               for m in range(1, cfg.n_modes + 1))


@pytest.mark.parametrize("N", [2, 4, 6, 10, 100, 998])
def test_frequency_product_matches_brute_force(N):
    assert frequency_product_log(LatticeConfig(N, 1.0)) == pytest.approx(
        _brute_product_log(N), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("N", [2, 4, 6, 10, 10**4])
def test_frequency_product_identity(N):
    # each mode counted once gives N+1, so the per-mode product of eps*omega is sqrt(N+1)
    got = frequency_product_log(LatticeConfig(N, 1.0))
    assert got == pytest.approx(math.log(N + 1), rel=1e-10)
    assert 0.5 * got == pytest.approx(0.5 * math.log(N + 1), rel=1e-10)
