"""Independent checks that share no code path with the coupling flow.

* ``schrodinger_ground_energy``: finite-difference Hamiltonian, lowest level.
* ``single_mode_step_oracle``: the one-mode integral that defines V_{m-1}
  from V_m, done by quadrature (all loop orders, not just the logarithm).
* ``small_lattice_effective_potential``: the full constrained path integral
  on a lattice with at most three complex modes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, DomainError
from .lattice import LatticeConfig, matsubara_frequency_sq
from .series import CouplingVector, derivatives_at

SCHRODINGER = "schrodinger"
SINGLE_MODE = "single_mode"
SMALL_LATTICE = "small_lattice"


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str
    resolution: dict = field(default_factory=dict)
    est_error: float = 0.0

    def __post_init__(self):
        if not self.est_error >= 0:
            raise ValueError(f"est_error must be >= 0, got {self.est_error}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


# ---------------------------------------------------------------------------
# Schrodinger equation
# ---------------------------------------------------------------------------

def _length_scale(potential: CouplingVector, hbar: float, M: float) -> float:
    """Smallest confinement length (hbar^2 / (M c_k))^(1/(k+2)) over c_k > 0."""
    c = potential.taylor()
    lengths = [(hbar * hbar / (M * c[k])) ** (1.0 / (k + 2))
               for k in range(2, len(c), 2) if c[k] > 0]
    return min(lengths)


def _outer_minimum(potential: CouplingVector) -> float:
    """Largest |x| of a real local minimum of V (0 if none)."""
    P = np.polynomial.polynomial
    c = potential.taylor()
    d1 = P.polyder(c)
    if not np.any(d1):
        return 0.0
    roots = P.polyroots(np.trim_zeros(d1, "b"))
    real = roots[np.abs(roots.imag) < 1e-9].real
    if real.size == 0:
        return 0.0
    d2 = P.polyval(real, P.polyder(c, 2))
    minima = real[d2 > 0]
    return float(np.max(np.abs(minima))) if minima.size else 0.0


def _fd_ground(potential, L, n, hbar, M):
    xs = np.linspace(-L, L, n + 2)[1:-1]
    h = xs[1] - xs[0]
    kin = hbar * hbar / (2.0 * M * h * h)
    diag = 2.0 * kin + potential(xs)
    off = np.full(n - 1, -kin)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    psi = np.abs(v[:, 0])
    return float(w[0]), float(max(psi[0], psi[-1]) / psi.max())


def schrodinger_ground_energy(potential: CouplingVector, L: float | None = None,
                              n: int = 4000, hbar: float = 1.0,
                              M: float = 1.0) -> OracleResult:
    """Lowest eigenvalue of -hbar^2/(2M) d^2/dx^2 + V on [-L, L], Dirichlet ends.

    Solved on n and 2n+1 interior points (grid spacing h and h/2); the value
    is the Richardson extrapolation and `est_error` the size of the h^2
    correction. With L=None the box is sized from the confinement length and
    widened until the wavefunction tail is below 1e-8.
    """
    if potential.leading_even_coefficient() <= 0:
        raise DomainError("potential is not confining; no bound ground state")
    if n < 200:
        raise DomainError(f"need n >= 200 grid points, got {n}")
    auto = L is None
    if auto:
        L = 10.0 * _length_scale(potential, hbar, M) + _outer_minimum(potential)
    while True:
        e1, _ = _fd_ground(potential, L, n, hbar, M)
        e2, tail = _fd_ground(potential, L, 2 * n + 1, hbar, M)
        if not auto or tail < 1e-8:
            break
        L *= 1.5
    value = e2 + (e2 - e1) / 3.0
    est = abs(e2 - e1) / 3.0
    if tail >= 1e-8:
        warnings.warn(f"wavefunction tail {tail:.2e} at x=+-{L}: box too small", RuntimeWarning)
        est = max(est, tail * abs(value))
    return OracleResult(value, SCHRODINGER,
                        {"L": L, "n": n, "n_fine": 2 * n + 1, "raw_coarse": e1,
                         "raw_fine": e2, "boundary_tail": tail}, est)


# ---------------------------------------------------------------------------
# Single-mode step
# ---------------------------------------------------------------------------

def _cos_power_sums(k: int, m: int, N: int):
    """Sum over n=1..N+1 of cos^k(2 pi m n/(N+1) + phi) as [(q, coeff)] in cos(q phi).

    Only harmonics with q m = 0 mod (N+1) survive the time sum.
    """
    terms = {}
    for j in range(k + 1):
        q = k - 2 * j
        if (q * m) % (N + 1) == 0:
            terms[abs(q)] = terms.get(abs(q), 0.0) + math.comb(k, j)
    scale = (N + 1) / 2.0 ** k
    return [(q, scale * c) for q, c in sorted(terms.items())]


def _gauss_legendre(n, a, b):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def single_mode_step_oracle(potential: CouplingVector, cfg: LatticeConfig, m: int,
                            x0: float, rtol: float = 1e-9, max_points: int = 512,
                            ) -> OracleResult:
    """V_{m-1}(x0) from the one-mode integral over x_m, by 2D quadrature.

    The path is x(t_n) = x0 + (2/sqrt(N+1)) Re(exp(i omega_m t_n) x_m) on the
    N+1 time slices; the time sum of V along it is done in closed form
    (power sums of cosines), so the result is exact in N. The Gaussian with
    stiffness M omega_m^2 + V''(x0) is split off analytically; its logarithm
    is the one-loop term and the remaining quadrature holds every higher loop.
    Polar coordinates: radial Gauss-Legendre, periodic trapezoid in the phase.
    """
    N, beta, hbar, M = cfg.N, cfg.beta, cfg.hbar, cfg.M
    w2M = matsubara_frequency_sq(cfg, m) * M
    d = derivatives_at(potential, x0)
    v2 = d[2] if len(d) > 2 else 0.0
    one_loop = 0.0
    kappa = w2M
    if v2 > -0.5 * w2M:
        kappa = w2M + v2
        one_loop = math.log1p(v2 / w2M)
        k_start = 3
    else:
        k_start = 2
    eps = cfg.epsilon
    # radius of the mode in units where the reference Gaussian is exp(-s^2)
    rho_per_s = math.sqrt(hbar / (eps * kappa))
    amp = 2.0 / math.sqrt(N + 1)
    # exponent eps/hbar * sum_n [V(x_n) - V(x0) - (V''/2) dx^2 if split]
    terms = []  # (power of s, q, coefficient)
    for k in range(k_start, len(d)):
        if d[k] == 0.0:
            continue
        base = eps / hbar * d[k] / math.factorial(k) * (amp * rho_per_s) ** k
        for q, c in _cos_power_sums(k, m, N):
            terms.append((k, q, base * c))
    phase_dependent = any(q != 0 for _, q, _ in terms)

    def exponent(s, phi):
        out = np.zeros(np.broadcast(s, phi).shape)
        for k, q, c in terms:
            out = out + c * s ** k * (np.cos(q * phi) if q else 1.0)
        return out

    # radial cutoff where the integrand is negligible for every phase
    probe_phi = np.linspace(0.0, 2 * np.pi, 65)
    s_max = 6.5
    while True:
        e = s_max ** 2 + exponent(np.full_like(probe_phi, s_max), probe_phi)
        if np.all(e > 60.0):
            break
        s_max *= 1.25
        if s_max > 1e6:
            raise ConvergenceError("single-mode integrand does not decay")

    def quad(n_s, n_phi):
        s, ws = _gauss_legendre(n_s, 0.0, s_max)
        if phase_dependent:
            phi = 2 * np.pi * np.arange(n_phi) / n_phi
            wphi = np.full(n_phi, 2 * np.pi / n_phi)
        else:
            phi, wphi = np.zeros(1), np.array([2 * np.pi])
        S, PHI = np.meshgrid(s, phi, indexing="ij")
        f = S * np.exp(-S * S) * np.expm1(-exponent(S, PHI))
        return float(ws @ f @ wphi) / np.pi

    history = []
    n_pts = 32
    prev = None
    while n_pts <= max_points:
        J = quad(n_pts, n_pts)
        history.append((n_pts, J))
        if prev is not None and abs(J - prev) <= rtol * abs(J):
            break
        prev = J
        n_pts *= 2
    else:
        raise ConvergenceError(
            f"single-mode quadrature did not reach rtol={rtol} with {max_points} points",
            history)
    if not 1.0 + J > 0:
        raise ConvergenceError("single-mode quadrature produced a non-positive integral", history)
    higher = -math.log1p(J)
    value = d[0] + (one_loop + higher) / beta
    err = abs(math.log1p(J) - math.log1p(history[-2][1])) / beta if len(history) > 1 else 0.0
    return OracleResult(value, SINGLE_MODE,
                        {"N": N, "beta": beta, "m": m, "x0": x0, "points": n_pts,
                         "phase_dependent": phase_dependent, "s_max": s_max,
                         "one_loop": one_loop / beta, "higher_loop": higher / beta},
                        err)


# ---------------------------------------------------------------------------
# Full small lattice
# ---------------------------------------------------------------------------

def small_lattice_effective_potential(potential: CouplingVector, cfg: LatticeConfig,
                                      x0: float, rtol: float = 1e-9,
                                      max_evaluations: int = 20_000_000) -> OracleResult:
    """V_0(x0) from the complete constrained path integral, N <= 6.

    Every complex mode x_m = a + i b is integrated against the Gaussian of
    stiffness M omega_m^2 + V''(x0) with tensor-product Gauss-Hermite; the
    orders grow until successive results agree to `rtol` or the budget of
    integrand evaluations runs out.
    """
    N, beta, hbar, M, eps = cfg.N, cfg.beta, cfg.hbar, cfg.M, cfg.epsilon
    if N > 6:
        raise DomainError(f"small-lattice quadrature supports N <= 6, got N={N}")
    n_modes = cfg.n_modes
    d = derivatives_at(potential, x0)
    v2 = d[2] if len(d) > 2 else 0.0
    w2M = np.array([matsubara_frequency_sq(cfg, m) * M for m in range(1, n_modes + 1)])
    split = v2 > -0.5 * w2M
    kappa = np.where(split, w2M + v2, w2M)
    log_prefactor = float(np.sum(np.log(kappa / w2M)))
    sigma = np.sqrt(hbar / (2.0 * eps * kappa))  # std of Re x_m and Im x_m
    amp = 2.0 / math.sqrt(N + 1)
    n_t = np.arange(1, N + 2)
    theta = 2 * np.pi * np.outer(np.arange(1, n_modes + 1), n_t) / (N + 1)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    dim = 2 * n_modes
    v0 = d[0]

    def expectation(order):
        t, w = np.polynomial.hermite.hermgauss(order)
        w = w / math.sqrt(math.pi)
        z = math.sqrt(2.0) * t
        total = 0.0
        rest = np.stack(np.meshgrid(*([z] * (dim - 1)), indexing="ij"), -1).reshape(-1, dim - 1)
        wrest = np.prod(np.stack(np.meshgrid(*([w] * (dim - 1)), indexing="ij"), -1)
                        .reshape(-1, dim - 1), axis=1)
        # outer loop over the first coordinate keeps the arrays small
        for i0 in range(order):
            coords = np.concatenate([np.full((rest.shape[0], 1), z[i0]), rest], axis=1)
            a = coords[:, 0::2] * sigma
            b = coords[:, 1::2] * sigma
            path = x0 + amp * (a @ cos_t - b @ sin_t)
            dv = potential(path) - v0
            R = dv.sum(axis=1) - np.sum(np.where(split, v2, 0.0) * (a * a + b * b), axis=1)
            total += w[i0] * float(wrest @ np.expm1(-eps / hbar * R))
        return total

    history = []
    for order in (8, 12, 16, 24, 32, 48, 64, 96, 128):
        if order ** dim > max_evaluations:
            break
        J = expectation(order)
        history.append((order, J))
        if len(history) > 1 and abs(J - history[-2][1]) <= rtol * abs(1.0 + J):
            break
    if len(history) < 2:
        raise ConvergenceError("not enough quadrature levels within the evaluation budget", history)
    J = history[-1][1]
    converged = abs(J - history[-2][1]) <= rtol * abs(1.0 + J)
    if not converged and abs(J - history[-2][1]) > 1e-5 * abs(1.0 + J):
        raise ConvergenceError("small-lattice quadrature did not converge", history)
    if not 1.0 + J > 0:
        raise ConvergenceError("non-positive path integral", history)
    value = v0 + (log_prefactor - math.log1p(J)) / beta
    err = abs(math.log1p(J) - math.log1p(history[-2][1])) / beta
    return OracleResult(value, SMALL_LATTICE,
                        {"N": N, "beta": beta, "x0": x0, "dimension": dim,
                         "gauss_hermite_order": history[-1][0], "converged": converged},
                        err)
