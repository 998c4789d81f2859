"""Closed-form references: free particle, harmonic oscillator, classical limit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .lattice import LatticeConfig
from .series import CouplingVector

_CHUNK = 1 << 20


@dataclass(frozen=True)
class HarmonicSpec:
    """V = M Omega2 x^2 / 2 on a given lattice."""

    Omega2: float
    cfg: LatticeConfig

    def __post_init__(self):
        # lowest lattice frequency is the binding constraint
        s = math.sin(math.pi / (self.cfg.N + 1))
        w1_sq = 4.0 * s * s / self.cfg.epsilon ** 2
        if not w1_sq + self.Omega2 > 0:
            raise DomainError(
                f"Omega2={self.Omega2} <= -omega_1^2={-w1_sq}: partition product diverges")


def _mode_log_terms(spec: HarmonicSpec):
    """Yield chunks of log(1 + Omega2/omega_m^2) in ascending m."""
    cfg = spec.cfg
    n = cfg.n_modes
    for start in range(1, n + 1, _CHUNK):
        ms = np.arange(start, min(start + _CHUNK, n + 1))
        s = np.sin(np.pi * ms / (cfg.N + 1))
        w2 = 4.0 * s * s / cfg.epsilon ** 2
        yield np.log1p(spec.Omega2 / w2)


def harmonic_effective_constant(spec: HarmonicSpec) -> float:
    """Constant part of V_0: (1/beta) sum_m log(1 + Omega2/omega_m^2)."""
    if spec.Omega2 == 0.0:
        return 0.0
    return math.fsum(float(np.sum(chunk)) for chunk in _mode_log_terms(spec)) / spec.cfg.beta


def harmonic_partition_function_log(spec: HarmonicSpec) -> float:
    """log Z with Z = (1/(hbar beta Omega)) prod_m omega_m^2/(omega_m^2 + Omega2)."""
    if not spec.Omega2 > 0:
        raise DomainError(f"harmonic partition function needs Omega2 > 0, got {spec.Omega2}")
    cfg = spec.cfg
    omega = math.sqrt(spec.Omega2)
    return -math.log(cfg.hbar * cfg.beta * omega) - cfg.beta * harmonic_effective_constant(spec)


def continuum_harmonic_partition_function_log(Omega2: float, beta: float,
                                              hbar: float = 1.0) -> float:
    """log(1 / (2 sinh(hbar beta Omega / 2)))."""
    x = 0.5 * hbar * beta * math.sqrt(Omega2)
    # log(2 sinh x) = x + log(1 - e^{-2x})
    return -(x + math.log1p(-math.exp(-2.0 * x)))


def _confining_extent(potential: CouplingVector, beta: float, v_min: float) -> float:
    """Half-width L with beta (V(+-L) - v_min) > 50 and V increasing beyond."""
    if potential.leading_even_coefficient() <= 0:
        raise DomainError("exp(-beta V) is not integrable: potential is not confining")
    L = 1.0
    for _ in range(200):
        xs = np.array([-L, L])
        slope_out = potential.derivative(xs) * np.sign(xs)
        if np.all(beta * (potential(xs) - v_min) > 50.0) and np.all(slope_out > 0):
            return L
        L *= 1.5
    raise DomainError("could not bracket the support of exp(-beta V)")


def _minimum(potential: CouplingVector, scan: float = 50.0) -> float:
    xs = np.linspace(-scan, scan, 20001)
    vs = potential(xs)
    return float(np.min(vs))


def classical_partition_function_log(potential: CouplingVector, cfg: LatticeConfig) -> float:
    """log of int dx0 / sqrt(2 pi hbar^2 beta / M) exp(-beta V(x0)).

    Adaptive Gauss-Kronrod on [-L, L] with beta (V(L) - min V) > 50.
    """
    beta = cfg.beta
    if not np.any(potential.as_array()):
        raise DomainError("exp(-beta V) is not integrable for V = 0")
    v_min = _minimum(potential)
    L = _confining_extent(potential, beta, v_min)
    # the integrand is bounded by 1 after the shift
    f = lambda x: math.exp(-beta * (float(potential(x)) - v_min))
    val, _ = integrate.quad(f, -L, L, epsabs=0.0, epsrel=1e-11, limit=500)
    norm = math.sqrt(2.0 * math.pi * cfg.hbar ** 2 * beta / cfg.M)
    return math.log(val / norm) - beta * v_min
