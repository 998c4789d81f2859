"""Truncated Taylor jets around x0 = 0.

A running potential is carried as its derivatives g^(k) = V^(k)(0); jets
(plain coefficient arrays, entry k multiplying x^k) are what the flow
arithmetic works on. Products and the logarithm are truncated at the
requested order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LogDomainError

_FACT = [math.factorial(k) for k in range(64)]


@dataclass(frozen=True)
class CouplingVector:
    """Derivatives g^(0..order) of a potential at x0 = 0."""

    derivs: tuple
    even: bool = False
    order: int = field(init=False)

    def __post_init__(self):
        derivs = tuple(float(g) for g in self.derivs)
        if len(derivs) < 1:
            raise DomainError("a coupling vector needs at least g^(0)")
        if not all(math.isfinite(g) for g in derivs):
            raise DomainError(f"non-finite coupling in {derivs}")
        if self.even and any(g != 0.0 for g in derivs[1::2]):
            raise DomainError("even coupling vector with non-zero odd derivatives")
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "order", len(derivs) - 1)

    @classmethod
    def from_taylor(cls, coeffs, even=None) -> "CouplingVector":
        coeffs = np.asarray(coeffs, dtype=float)
        derivs = coeffs * np.array(_FACT[: len(coeffs)], dtype=float)
        if even is None:
            even = not np.any(derivs[1::2])
        return cls(tuple(derivs), even=even)

    @classmethod
    def zero(cls, order: int) -> "CouplingVector":
        return cls((0.0,) * (order + 1), even=True)

    @classmethod
    def anharmonic(cls, lam: float, omega2: float = 1.0, M: float = 1.0,
                   order: int = 6) -> "CouplingVector":
        """M omega2 x^2 / 2 + lam x^4 / 4!, padded to `order`."""
        if order < 4 and lam != 0.0:
            raise DomainError("a quartic coupling needs order >= 4")
        g = [0.0] * (order + 1)
        if order >= 2:
            g[2] = M * omega2
        if order >= 4:
            g[4] = lam
        return cls(tuple(g), even=True)

    def __getitem__(self, k):
        return self.derivs[k]

    def as_array(self) -> np.ndarray:
        return np.array(self.derivs, dtype=float)

    def taylor(self) -> np.ndarray:
        return to_taylor(self)

    def with_order(self, order: int) -> "CouplingVector":
        g = list(self.derivs[: order + 1]) + [0.0] * max(0, order - self.order)
        return CouplingVector(tuple(g), even=self.even)

    def __call__(self, x):
        """Evaluate the polynomial sum_k g^(k) x^k / k!."""
        return np.polynomial.polynomial.polyval(x, self.taylor())

    def derivative(self, x, nu: int = 1):
        c = np.polynomial.polynomial.polyder(self.taylor(), nu)
        return np.polynomial.polynomial.polyval(x, c)

    def leading_even_coefficient(self) -> float:
        """Coefficient of the highest non-zero power, or 0 if that power is odd."""
        c = self.taylor()
        nz = np.flatnonzero(c)
        if nz.size == 0:
            return 0.0
        top = nz[-1]
        return float(c[top]) if top % 2 == 0 else 0.0


def to_taylor(cv: CouplingVector) -> np.ndarray:
    """Taylor coefficients g^(k)/k!."""
    return cv.as_array() / np.array(_FACT[: cv.order + 1], dtype=float)


def second_derivative_jet(cv: CouplingVector) -> np.ndarray:
    """Jet of V''(x): coefficient k is g^(k+2)/k!, order t-2."""
    if cv.order < 2:
        raise DomainError(f"order {cv.order} < 2 has no second derivative")
    g = cv.as_array()
    return g[2:] / np.array(_FACT[: cv.order - 1], dtype=float)


def jet_multiply(a, b, t: int) -> np.ndarray:
    """Cauchy product of two jets truncated at x^t."""
    a = _pad(a, t)
    b = _pad(b, t)
    out = np.zeros(t + 1)
    for i in range(t + 1):
        if a[i] != 0.0:
            out[i:] += a[i] * b[: t + 1 - i]
    return out


def jet_log1p(u, t: int) -> np.ndarray:
    """Jet of log(1 + u(x)) to order t.

    Uses (1 + u) L' = u', i.e. for k >= 1
        (1 + u0) k L_k = k u_k - sum_{j=1}^{k-1} j L_j u_{k-j}.
    """
    u = _pad(u, t)
    a0 = 1.0 + u[0]
    if not a0 > 0.0:
        raise LogDomainError(u[0])
    L = np.zeros(t + 1)
    L[0] = math.log1p(u[0])
    for k in range(1, t + 1):
        s = k * u[k]
        for j in range(1, k):
            s -= j * L[j] * u[k - j]
        L[k] = s / (k * a0)
    return L


def jet_exp(u, t: int) -> np.ndarray:
    """Jet of exp(u(x)) to order t, from E' = u' E."""
    u = _pad(u, t)
    E = np.zeros(t + 1)
    E[0] = math.exp(u[0])
    for k in range(1, t + 1):
        s = 0.0
        for j in range(1, k + 1):
            s += j * u[j] * E[k - j]
        E[k] = s / k
    return E


def derivatives_at(cv: CouplingVector, x0: float) -> np.ndarray:
    """All derivatives V^(k)(x0), k = 0..order."""
    c = cv.taylor()
    P = np.polynomial.polynomial
    return np.array([P.polyval(x0, P.polyder(c, k)) if k else P.polyval(x0, c)
                     for k in range(cv.order + 1)])


def gaussian_smear(cv: CouplingVector, a2: float, x0):
    """E[V(x0 + z)] for z ~ Normal(0, a2); exact for polynomials.

    Closed form sum_j V^(2j)(x0) a2^j / (2^j j!).
    """
    if a2 < 0:
        raise DomainError(f"negative variance a2={a2}")
    c = cv.taylor()
    total = np.zeros_like(np.asarray(x0, dtype=float))
    weight = 1.0
    j = 0
    while 2 * j <= cv.order:
        d = np.polynomial.polynomial.polyder(c, 2 * j) if j else c
        total = total + weight * np.polynomial.polynomial.polyval(x0, d)
        j += 1
        weight *= a2 / (2.0 * j)
    return total if total.ndim else float(total)


def _pad(a, t: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = np.zeros(t + 1)
    n = min(len(a), t + 1)
    out[:n] = a[:n]
    return out
