"""Feynman-Kleinert variational method and its mode-by-mode RG version.

At each step the one-mode integral is bounded from above (Jensen-Peierls)
with a Gaussian trial curvature M Omega_m^2(x0):

    V_{m-1}(x0) = (1/beta) log(1 + Omega^2/omega_m^2)
                  - (1/beta) Omega^2/(Omega^2 + omega_m^2) + V_{a^2}(x0),

with V_{a^2} the potential smeared by a Gaussian of variance
a^2 = (2/(beta M)) / (omega_m^2 + Omega^2). The running potential is no
longer polynomial, so it lives on a grid.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, DomainError
from .lattice import LatticeConfig, matsubara_frequency_sq
from .series import CouplingVector, gaussian_smear

# two-sided Gaussian tail of 1e-8
_TAIL_Z = 5.730729
_GH_POINTS = 64
_GH_STEP_POINTS = 32


@dataclass(frozen=True, eq=False)
class GridPotential:
    """Potential tabulated on a symmetric grid, natural cubic spline in between."""

    xs: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape:
            raise DomainError("xs and vs must be 1-D arrays of equal length")
        if xs.size < 33:
            raise DomainError(f"grid needs at least 33 points, got {xs.size}")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("grid must be strictly increasing")
        if not np.allclose(xs, -xs[::-1], rtol=0, atol=1e-12 * max(1.0, abs(xs[-1]))):
            raise DomainError("grid must be symmetric about 0")
        if not np.all(np.isfinite(vs)):
            raise DomainError("potential values must be finite")
        xs.flags.writeable = False
        vs.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", vs)

    @classmethod
    def from_function(cls, f: Callable, half_width: float, n: int = 401) -> "GridPotential":
        xs = np.linspace(-half_width, half_width, n)
        return cls(xs, np.asarray(f(xs), dtype=float))

    @property
    def domain(self):
        return float(self.xs[0]), float(self.xs[-1])

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.xs, self.vs, bc_type="natural")

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            bad = x[(x < lo) | (x > hi)]
            raise DomainError(f"evaluation at {bad.ravel()[:3]} outside grid [{lo}, {hi}]")
        return x

    def __call__(self, x, nu: int = 0):
        return self.spline(self._check(x), nu)

    # serialization --------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x0", "V"])
        for x, v in zip(self.xs, self.vs):
            w.writerow([f"{x:.17g}", f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridPotential":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls(data[:, 0], data[:, 1])

    def to_dict(self) -> dict:
        return {"xs": [float(x) for x in self.xs], "vs": [float(v) for v in self.vs],
                "interpolation": {"kind": "cubic_spline", "bc": "natural",
                                  "extrapolation": "error"}}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_json(cls, text: str) -> "GridPotential":
        d = json.loads(text)
        return cls(np.array(d["xs"]), np.array(d["vs"]))


@dataclass(frozen=True, eq=False)
class TrialFrequencyField:
    """Self-consistent Omega_m^2(x0) on a grid with the matching variance a^2."""

    xs: np.ndarray
    omega2: np.ndarray
    w2: float
    beta: float
    M: float

    def __post_init__(self):
        if np.any(self.w2 + self.omega2 <= 0):
            raise DomainError("omega_m^2 + Omega^2 must stay positive")

    @property
    def a2(self) -> np.ndarray:
        return smearing_variance(self.omega2, self.w2, self.beta, self.M)


def smearing_variance(omega2, w2, beta, M):
    return (2.0 / (beta * M)) / (w2 + omega2)


@lru_cache(maxsize=None)
def _gh_nodes(n):
    t, w = np.polynomial.hermite.hermgauss(n)
    return math.sqrt(2.0) * t, w / math.sqrt(math.pi)


def _smear(V: GridPotential, a2, x0, nu: int = 0, n_points: int = _GH_POINTS):
    """E[V^(nu)(x0 + z)], z ~ N(0, a2); x0 and a2 broadcast together.

    Nodes outside the grid are dropped when their total weight is below
    1e-8; otherwise the required domain is reported.
    """
    z, w = _gh_nodes(n_points)
    x0 = np.asarray(x0, dtype=float)
    a2 = np.broadcast_to(np.asarray(a2, dtype=float), x0.shape)
    if np.any(a2 < 0):
        raise DomainError("negative smearing variance")
    sig = np.sqrt(a2)
    lo, hi = V.domain
    need_lo = x0 - _TAIL_Z * sig
    need_hi = x0 + _TAIL_Z * sig
    if np.any(need_lo < lo) or np.any(need_hi > hi):
        raise DomainError(
            f"smearing needs the grid to cover [{need_lo.min():.6g}, {need_hi.max():.6g}],"
            f" grid is [{lo:.6g}, {hi:.6g}]")
    pts = x0[..., None] + sig[..., None] * z
    inside = (pts >= lo) & (pts <= hi)
    vals = V.spline(np.clip(pts, lo, hi), nu)
    return np.sum(np.where(inside, vals, 0.0) * w, axis=-1)


def smeared_potential(V: GridPotential, a2: float, x0, n_points: int = _GH_POINTS):
    """Gaussian-smeared potential V_{a2}(x0) by Gauss-Hermite quadrature."""
    if n_points < 32:
        raise DomainError("use at least 32 Gauss-Hermite points")
    out = _smear(V, a2, x0, 0, n_points)
    return out if np.ndim(out) else float(out)


def _solve_frequency(V, x0, w2, beta, M, rtol=1e-10, max_iter=200, history=None,
                     n_points=_GH_POINTS):
    """Vectorized fixed point Omega^2 = (1/M) E[V''(x0 + z)], z ~ N(0, a^2(Omega^2)).

    Points stop being iterated once their relative change drops below rtol.
    """
    if history is None:
        history = []
    x0 = np.asarray(x0, dtype=float)
    omega2 = np.zeros_like(x0)
    active = np.ones(x0.shape, dtype=bool)
    for _ in range(max_iter):
        om = omega2[active]
        if np.any(w2 + om <= 0):
            bad = x0[active][w2 + om <= 0]
            raise DomainError(f"omega_m^2 + Omega^2 <= 0 at x0={bad.ravel()[:3]}")
        a2 = smearing_variance(om, w2, beta, M)
        new = _smear(V, a2, x0[active], 2, n_points) / M
        converged = np.abs(new - om) <= rtol * np.abs(new)
        omega2[active] = new
        history.append(omega2.copy())
        active[np.flatnonzero(active)[converged]] = False
        if not np.any(active):
            return omega2, smearing_variance(omega2, w2, beta, M)
    raise ConvergenceError(
        f"trial frequency did not converge in {max_iter} iterations "
        f"(worst x0={x0[active].ravel()[:3]})", history)


def self_consistent_frequency(V: GridPotential, cfg: LatticeConfig, m: int, x0: float,
                              history: Optional[list] = None):
    """Trial frequency Omega_m^2(x0) and smearing variance a_m^2(x0).

    Iterates Omega^2 = (2/M) d V_{a^2}/d a^2 from Omega^2 = 0; the derivative
    is the smeared second derivative over 2 (heat-kernel identity).
    """
    w2 = matsubara_frequency_sq(cfg, m)
    omega2, a2 = _solve_frequency(V, np.array([x0]), w2, cfg.beta, cfg.M, history=history)
    return float(omega2[0]), float(a2[0])


def trial_frequency_field(V: GridPotential, cfg: LatticeConfig, m: int,
                          xs=None) -> TrialFrequencyField:
    xs = V.xs if xs is None else np.asarray(xs, dtype=float)
    w2 = matsubara_frequency_sq(cfg, m)
    omega2, _ = _solve_frequency(V, xs, w2, cfg.beta, cfg.M)
    return TrialFrequencyField(xs, omega2, w2, cfg.beta, cfg.M)


def _step_values(V, xs, w2, beta, M):
    omega2, a2 = _solve_frequency(V, xs, w2, beta, M, n_points=_GH_STEP_POINTS)
    r = omega2 / w2
    return (np.log1p(r) - r / (1.0 + r)) / beta + _smear(V, a2, xs, 0, _GH_STEP_POINTS)


def _covered(V, w2, beta, M):
    """Mask of grid points whose smearing window (at a2 bound) stays in the grid."""
    # a^2 is largest where Omega^2 is most negative; bound it with the
    # curvature range of the spline
    curv_min = float(np.min(V.spline(V.xs, 2))) / M
    a2_max = smearing_variance(min(curv_min, 0.0), w2, beta, M) if w2 + min(curv_min, 0.0) > 0 \
        else np.inf
    half = _TAIL_Z * math.sqrt(a2_max)
    lo, hi = V.domain
    return (V.xs - half >= lo) & (V.xs + half <= hi)


def variational_rg_step(V: GridPotential, cfg: LatticeConfig, m: int,
                        edge: str = "extend") -> GridPotential:
    """One variational RG step, evaluated pointwise on the grid of V.

    Grid points too close to the edge for their smearing window are either
    rejected (edge="raise") or given the increment V_{m-1} - V_m of the
    nearest covered point (edge="extend").
    """
    w2 = matsubara_frequency_sq(cfg, m)
    beta, M = cfg.beta, cfg.M
    if edge == "raise":
        return GridPotential(V.xs, _step_values(V, V.xs, w2, beta, M))
    if edge != "extend":
        raise DomainError(f"unknown edge policy {edge!r}")
    ok = _covered(V, w2, beta, M)
    if not np.any(ok):
        raise DomainError("no grid point has its smearing window inside the grid")
    xs_ok = V.xs[ok]
    try:
        new_ok = _step_values(V, xs_ok, w2, beta, M)
    except (DomainError, ConvergenceError) as exc:
        raise type(exc)(f"variational step m={m}: {exc}") from exc
    # the covered points form one interval; edges reuse its end increments
    inc = new_ok - V.vs[ok]
    first, last = np.flatnonzero(ok)[[0, -1]]
    vs = V.vs.copy()
    vs[ok] = new_ok
    vs[:first] += inc[0]
    vs[last + 1:] += inc[-1]
    return GridPotential(V.xs, vs)


def run_variational_flow(initial: GridPotential, cfg: LatticeConfig,
                         progress: Optional[Callable[[int, int], None]] = None,
                         progress_every: int = 1000) -> GridPotential:
    """Compose variational steps for m = N/2 .. 1."""
    V = initial
    n = cfg.n_modes
    for m in range(n, 0, -1):
        V = variational_rg_step(V, cfg, m)
        done = n - m + 1
        if progress is not None and done % progress_every == 0:
            progress(done, n)
    return V


def _fk_minimum(potential: CouplingVector, M: float, hbar: float):
    if potential.leading_even_coefficient() <= 0:
        raise DomainError("variational energy needs a confining potential")

    def energy(log_omega):
        om = math.exp(log_omega)
        return hbar * om / 4.0 + gaussian_smear(potential, hbar / (2.0 * M * om), 0.0)

    # bracket on a coarse log grid, then golden section
    grid = np.linspace(-20.0, 20.0, 401)
    vals = np.array([energy(g) for g in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise ConvergenceError("no interior minimum of the variational energy")
    res = minimize_scalar(energy, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                          method="golden", tol=1e-10)
    return float(res.fun), math.exp(res.x)


def fk_variational_energy(potential: CouplingVector, M: float = 1.0,
                          hbar: float = 1.0) -> float:
    """Zero-temperature first-order Feynman-Kleinert energy at x0 = 0.

    Minimizes E(Omega) = hbar Omega / 4 + <V>_{a^2 = hbar/(2 M Omega)} over
    Omega > 0 by golden-section search in log Omega.
    """
    return _fk_minimum(potential, M, hbar)[0]


def fk_trial_frequency(potential: CouplingVector, M: float = 1.0, hbar: float = 1.0) -> float:
    """Minimizing trial frequency of :func:`fk_variational_energy`."""
    return _fk_minimum(potential, M, hbar)[1]
