import math

import numpy as np
import pytest

from qmrg import (CouplingVector, DomainError, HarmonicSpec, LatticeConfig,
                  classical_partition_function_log, harmonic_effective_constant,
                  harmonic_partition_function_log, small_lattice_effective_potential)
from qmrg.exact import continuum_harmonic_partition_function_log


def _continuum_constant(beta, omega=1.0):
    # (1/beta) log(sinh(beta w/2)/(beta w/2)) without overflow
    x = 0.5 * beta * omega
    return (x - math.log(2.0) + math.log1p(-math.exp(-2 * x)) - math.log(x)) / beta


def test_zero_frequency():
    assert harmonic_effective_constant(HarmonicSpec(0.0, LatticeConfig(100, 1.0))) == 0.0


def test_spec_validation():
    cfg = LatticeConfig(10, 1.0)
    w1 = 4 * math.sin(math.pi / 11) ** 2 / cfg.epsilon ** 2
    HarmonicSpec(-0.99 * w1, cfg)
    with pytest.raises(DomainError):
        HarmonicSpec(-1.01 * w1, cfg)
    with pytest.raises(DomainError):
        harmonic_partition_function_log(HarmonicSpec(-1.0, cfg))


@pytest.mark.full_scale
def test_ground_state_limit():
    cfg = LatticeConfig(10**8, 1e5)
    got = harmonic_effective_constant(HarmonicSpec(1.0, cfg))
    assert got == pytest.approx(_continuum_constant(1e5), abs=1e-7)
    assert abs(got - 0.5) < 2e-4


def test_partition_function_vs_continuum():
    cfg = LatticeConfig(10**5, 10.0)
    got = harmonic_partition_function_log(HarmonicSpec(1.0, cfg))
    ref = continuum_harmonic_partition_function_log(1.0, 10.0)
    assert abs(got / ref - 1) < 1e-3


def test_classical_limit_of_product():
    cfg = LatticeConfig(10, 1e-4)
    got = harmonic_partition_function_log(HarmonicSpec(1.0, cfg))
    assert got == pytest.approx(-math.log(1e-4), rel=1e-8)


def test_partition_function_convergence_order():
    ref = math.exp(continuum_harmonic_partition_function_log(1.0, 10.0))
    errs = []
    for N in (1000, 2000, 4000):
        z = math.exp(harmonic_partition_function_log(HarmonicSpec(1.0, LatticeConfig(N, 10.0))))
        errs.append(abs(z / ref - 1))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    # at least halving; observed ~4 (second order in 1/N)
    assert all(r >= 2.0 for r in ratios)
    assert all(abs(r - 4.0) < 0.1 for r in ratios)


def test_internal_consistency():
    cfg = LatticeConfig(500, 3.0)
    spec = HarmonicSpec(2.0, cfg)
    lz = harmonic_partition_function_log(spec)
    assert lz == pytest.approx(-math.log(3.0 * math.sqrt(2.0))
                               - 3.0 * harmonic_effective_constant(spec), rel=1e-14)


def test_monotone():
    cfg = LatticeConfig(1000, 10.0)
    cs = [harmonic_effective_constant(HarmonicSpec(o, cfg)) for o in (0.1, 0.5, 1.0, 4.0)]
    assert np.all(np.diff(cs) > 0)
    cb = [harmonic_effective_constant(HarmonicSpec(1.0, LatticeConfig(1000, b)))
          for b in (1.0, 10.0, 100.0)]
    assert np.all(np.diff(cb) > 0)


def test_classical_harmonic():
    for beta in (0.1, 1.0, 5.0):
        cfg = LatticeConfig(10, beta)
        got = classical_partition_function_log(CouplingVector.anharmonic(0.0, 1.0, 1.0, 4), cfg)
        assert got == pytest.approx(-math.log(beta), abs=1e-9)


def test_classical_quartic_vs_small_lattice():
    beta = 0.01
    V = CouplingVector.anharmonic(2.4, 1.0, 1.0, 4)
    cfg = LatticeConfig(4, beta)
    classical = classical_partition_function_log(V, cfg)
    # quantum Z from the lattice effective potential, x0 integral by Gauss-Legendre
    L = 16.0
    t, w = np.polynomial.legendre.leggauss(160)
    xs, ws = L * t, L * w
    v0 = np.array([small_lattice_effective_potential(V, cfg, x, rtol=1e-7).value for x in xs])
    z = float(ws @ np.exp(-beta * v0)) / math.sqrt(2 * math.pi * beta)
    assert abs(math.log(z) - classical) < 1e-3


def test_classical_double_well_finite():
    got = classical_partition_function_log(CouplingVector.anharmonic(4.8, -1.0, 1.0, 4),
                                           LatticeConfig(10, 1.0))
    assert math.isfinite(got)


def test_classical_non_integrable():
    cfg = LatticeConfig(10, 1.0)
    with pytest.raises(DomainError):
        classical_partition_function_log(CouplingVector.zero(4), cfg)
    with pytest.raises(DomainError):
        classical_partition_function_log(CouplingVector((0.0, 0.0, -1.0)), cfg)
