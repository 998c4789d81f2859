"""Zero-temperature Wegner-Houghton flow of the couplings g^(n).

Each step integrates out one lattice Fourier mode,

    V_{m-1}(x) = V_m(x) + (1/beta) log(1 + V_m''(x) / (omega_m^2 M)),

applied to the truncated Taylor jet of V around x = 0. Modes are integrated
from the highest (m = N/2) down to m = 1; the ground-state energy is the
constant coupling at the end of the flow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import DomainError, LogDomainError
from .lattice import LatticeConfig, matsubara_frequency_sq
from .series import (CouplingVector, jet_log1p, second_derivative_jet,
                     to_taylor)

_FACT = np.array([math.factorial(k) for k in range(32)], dtype=float)


@dataclass(frozen=True)
class FlowState:
    """Running potential after the modes above `m` have been integrated out.

    `flowing_order` caps the couplings that are updated; higher ones act only
    as sources (None means every retained coupling flows). `carry` is the
    compensation term of the summation for g^(0).
    """

    m: int
    couplings: CouplingVector
    cfg: LatticeConfig
    flowing_order: Optional[int] = None
    carry: float = 0.0

    def __post_init__(self):
        if not 0 <= self.m <= self.cfg.n_modes:
            raise DomainError(f"m={self.m} outside 0..{self.cfg.n_modes}")

    @classmethod
    def initial(cls, couplings: CouplingVector, cfg: LatticeConfig,
                flowing_order: Optional[int] = None) -> "FlowState":
        return cls(cfg.n_modes, couplings, cfg, flowing_order)

    @property
    def n_flow(self) -> int:
        if self.flowing_order is None:
            return self.couplings.order + 1
        return min(self.flowing_order, self.couplings.order) + 1


@dataclass
class FlowTrace:
    snapshots: list
    final: FlowState
    meta: dict = field(default_factory=dict)

    @property
    def energy(self) -> float:
        return ground_state_energy(self)

    def to_dict(self) -> dict:
        return {
            "config": self.final.cfg.to_dict(),
            "truncation": dict(self.meta.get("truncation", {})),
            "snapshots": [{"m": m, "g": list(cv.derivs)} for m, cv in self.snapshots],
            "final_g": list(self.final.couplings.derivs),
            "energy": self.energy,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def truncation_info(order: int, flowing_order: Optional[int]) -> dict:
    if flowing_order is None or flowing_order >= order:
        mode = "truncated"
    elif order == 4 and flowing_order == 2:
        mode = "frozen-quartic"
    else:
        mode = f"frozen-above-{flowing_order}"
    return {"order": order, "flowing_order": order if mode == "truncated" else flowing_order,
            "mode": mode}


def wh_step(state: FlowState) -> FlowState:
    """Integrate out mode `state.m` and return the state at m - 1."""
    if state.m < 1:
        raise DomainError("no modes left to integrate (m = 0)")
    cfg, cv = state.cfg, state.couplings
    t = cv.order
    w2M = matsubara_frequency_sq(cfg, state.m) * cfg.M
    if t < 2:
        return replace(state, m=state.m - 1)
    u = second_derivative_jet(cv) / w2M
    try:
        L = jet_log1p(u, t)
    except LogDomainError as exc:
        raise LogDomainError(exc.u0, m=state.m, g2=cv[2]) from None
    c = to_taylor(cv)
    n_flow = state.n_flow
    # compensated sum for the constant, matching the compiled kernel
    y = L[0] / cfg.beta - state.carry
    s = c[0] + y
    carry = (s - c[0]) - y
    c[0] = s
    c[1:n_flow] += L[1:n_flow] / cfg.beta
    new = CouplingVector(tuple(c * _FACT[: t + 1]), even=cv.even)
    return replace(state, m=state.m - 1, couplings=new, carry=carry)


def run_flow(initial: CouplingVector, cfg: LatticeConfig, stride: Optional[int] = None,
             flowing_order: Optional[int] = None,
             progress: Optional[Callable[[int, int], None]] = None,
             progress_every: int = 10**6) -> FlowTrace:
    """Run the flow from m = N/2 down to m = 0.

    Snapshots are taken at m = N/2, every `stride` modes below it, and at
    m = 0 (default stride N/200). `progress(done, total)` is called every
    `progress_every` modes. A :class:`LogDomainError` carries the failing
    mode and the trace up to the last snapshot as `.trace`.
    """
    n_modes = cfg.n_modes
    if stride is None:
        stride = max(1, cfg.N // 200)
    if stride < 1:
        raise DomainError("stride must be >= 1")
    state = FlowState.initial(initial, cfg, flowing_order)
    n_flow = state.n_flow
    info = truncation_info(initial.order, flowing_order)

    fact = _FACT[: initial.order + 1]
    c = np.ascontiguousarray(to_taylor(initial))
    carry = np.zeros(1)
    fail = np.zeros(2)
    snapshots = [(n_modes, initial)]

    def snap():
        return CouplingVector(tuple(c * fact), even=initial.even)

    m = n_modes
    next_snap = n_modes - stride
    next_prog = n_modes - progress_every
    while m > 0:
        stop = max(next_snap, next_prog, 0)
        status = _kernels.lattice_flow(c, carry, m, stop, cfg.N, cfg.beta, cfg.M,
                                       cfg.hbar, n_flow, fail)
        if status != _kernels.OK:
            m_fail = int(fail[0])
            cv = snap()
            exc = LogDomainError(fail[1], m=m_fail, g2=cv[2])
            exc.trace = FlowTrace(snapshots, FlowState(m_fail, cv, cfg, flowing_order,
                                                       float(carry[0])), {"truncation": info})
            raise exc
        m = stop
        if m == next_snap:
            if m > 0:
                snapshots.append((m, snap()))
            next_snap -= stride
        if m == next_prog:
            if progress is not None:
                progress(n_modes - m, n_modes)
            next_prog -= progress_every

    final_cv = snap()
    snapshots.append((0, final_cv))
    final = FlowState(0, final_cv, cfg, flowing_order, float(carry[0]))
    return FlowTrace(snapshots, final, {"truncation": info})


def ground_state_energy(trace: FlowTrace) -> float:
    """Effective potential at its minimum x0 = 0 after the flow, i.e. g^(0)."""
    return trace.final.couplings[0]


def continuum_wh_flow(initial: CouplingVector, beta: float, M: float = 1.0,
                      k_max: float = 1e4, steps: int = 200_000, hbar: float = 1.0,
                      grid: str = "geometric") -> CouplingVector:
    """Integrate V_{k-dk} = V_k + (hbar dk / 2 pi) log(1 + V''/(M k^2)).

    Runs from k_max down to k_min = 2 pi/(hbar beta), evaluating each shell
    at its (geometric or arithmetic) midpoint.
    """
    if steps < 1 or not k_max > 0:
        raise DomainError("need steps >= 1 and k_max > 0")
    k_min = 2.0 * math.pi / (hbar * beta)
    if k_max <= k_min:
        raise DomainError(f"k_max={k_max} must exceed k_min={k_min}")
    if grid == "geometric":
        nodes = np.geomspace(k_max, k_min, steps + 1)
        mids = np.sqrt(nodes[:-1] * nodes[1:])
    elif grid == "linear":
        nodes = np.linspace(k_max, k_min, steps + 1)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
    else:
        raise DomainError(f"unknown grid {grid!r}")
    weights = hbar * (nodes[:-1] - nodes[1:]) / (2.0 * math.pi)
    c = np.ascontiguousarray(to_taylor(initial))
    carry = np.zeros(1)
    fail = np.zeros(2)
    status = _kernels.sweep_flow(c, carry, mids * mids, weights, M, initial.order + 1, fail)
    if status != _kernels.OK:
        raise LogDomainError(fail[1], g2=float(c[2] * 2.0))
    return CouplingVector(tuple(c * _FACT[: initial.order + 1]), even=initial.even)


def perturbative_effective_potential(initial: CouplingVector,
                                     cfg: LatticeConfig) -> CouplingVector:
    """One-loop sum with the right-hand side frozen at the bare potential.

    V_0 = V + sum_m (1/beta) log(1 + V''/(omega_m^2 M)), as a jet.
    """
    c0 = np.ascontiguousarray(to_taylor(initial))
    acc = c0.copy()
    carry = np.zeros(1)
    fail = np.zeros(2)
    status = _kernels.frozen_lattice_sum(c0, acc, carry, cfg.n_modes, 0, cfg.N, cfg.beta,
                                         cfg.M, cfg.hbar, fail)
    if status != _kernels.OK:
        raise LogDomainError(fail[1], m=int(fail[0]), g2=initial[2])
    return CouplingVector(tuple(acc * _FACT[: initial.order + 1]), even=initial.even)
