"""Reference tables for the anharmonic oscillator and the code that regenerates them.

Rows are computed independently, so sweeps run on a thread pool (the flow
kernels release the GIL). The worker count comes from ``QMRG_WORKERS``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ConvergenceError, DomainError, LogDomainError
from .fk_rg import fk_variational_energy
from .lattice import LatticeConfig
from .oracle import schrodinger_ground_energy
from .series import CouplingVector
from .wh_flow import run_flow, truncation_info

REFERENCE_N = 10**8
REFERENCE_BETA = 1e5

# (order, flowing_order) -> (g2, g4, g6, g8, g10, E_RG); lambda = 2.4, M = Omega = 1
TABLE1 = [
    ((4, 2), (1.5140, 2.4, 0.0, 0.0, 0.0, 0.56134)),
    ((4, None), (1.4522, 1.5343, 0.0, 0.0, 0.0, 0.55807)),
    ((6, None), (1.4643, 1.7706, 3.9484, 0.0, 0.0, 0.55855)),
    ((8, None), (1.4617, 1.7110, 2.8109, -16.662, 0.0, 0.55847)),
    ((10, None), (1.4662, 1.7236, 3.0112, -16.794, -237.46, 0.55848)),
]
TABLE1_LAMBDA = 2.4
TABLE1_COLUMNS = ["g2", "g4", "g6", "g8", "g10", "E_RG"]

# lambda -> (E_exact, E_var, E_RG, g2, g4, g6); order-6 truncation
TABLE2 = {
    2.4: (0.55915, 0.5603, 0.5585, 1.4643, 1.7706, 3.9484),
    4.8: (0.60240, 0.6049, 0.6014, 1.8189, 3.2687, 12.078),
    7.2: (0.63799, 0.6416, 0.6366, 2.2126, 4.6951, 22.058),
    9.6: (0.66877, 0.6734, 0.6672, 2.4041, 6.0842, 33.296),
    12: (0.70618, 0.7017, 0.6943, 2.6614, 7.450, 45.527),
    14.4: (0.72104, 0.7273, 0.7190, 2.9031, 8.800, 58.589),
    16.8: (0.74390, 0.7509, 0.7417, 3.1324, 10.137, 72.384),
    19.2: (0.76514, 0.7721, 0.7628, 3.3514, 11.466, 86.832),
    21.6: (0.78503, 0.7932, 0.7825, 3.5619, 12.787, 101.87),
    24: (0.80377, 0.8125, 0.8011, 3.7648, 14.102, 117.46),
    240: (1.50497, 1.5313, 1.4982, 14.735, 128.19, 2525.0),
    1200: (2.49971, 2.5476, 2.4877, 41.683, 627.76, 21462.0),
    2400: (3.13138, 3.1924, 3.1162, 65.742, 1250.3, 54006.0),
    12000: (5.31989, 5.4258, 5.2937, 190.83, 6222.1, 460992.0),
    24000: (6.69422, 6.8279, 6.6611, 302.50, 12433.0, 1161228.0),
}
TABLE2_COLUMNS = ["lambda", "E_exact", "E_var", "E_RG", "g2", "g4", "g6"]

# double well, Omega^2 = -1: lambda -> (E_RG, g2, g4, g6)
TABLE3 = {
    4.8: (0.073, 0.366, 0.821, 4.288),
    7.2: (0.189, 0.681, 1.955, 13.02),
    9.6: (0.266, 0.960, 3.111, 23.34),
}
TABLE3_OMEGA2 = -1.0
TABLE3_FAILING_LAMBDA = 2.4
TABLE3_COLUMNS = ["lambda", "E_RG", "g2", "g4", "g6"]


def worker_count(default: Optional[int] = None) -> int:
    env = os.environ.get("QMRG_WORKERS")
    if env:
        return max(1, int(env))
    return default or os.cpu_count() or 1


def parallel_map(fn: Callable, items, workers: Optional[int] = None) -> list:
    """Ordered map over a thread pool."""
    items = list(items)
    workers = workers or worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class FlowRow:
    lam: float
    order: int
    flowing_order: Optional[int]
    omega2: float
    couplings: Optional[tuple]
    energy: Optional[float]
    status: str
    truncation: dict


def flow_row(lam: float, order: int, cfg: LatticeConfig, omega2: float = 1.0,
             flowing_order: Optional[int] = None) -> FlowRow:
    """Run one flow; failures are captured in `status` instead of raised."""
    info = truncation_info(order, flowing_order)
    initial = CouplingVector.anharmonic(lam, omega2, cfg.M, order)
    try:
        trace = run_flow(initial, cfg, stride=cfg.n_modes, flowing_order=flowing_order)
    except LogDomainError as exc:
        return FlowRow(lam, order, flowing_order, omega2, None, None, str(exc), info)
    g = trace.final.couplings
    return FlowRow(lam, order, flowing_order, omega2, g.derivs, g[0], "ok", info)


def table1_rows(cfg: LatticeConfig, workers=None) -> list:
    def one(spec):
        (order, flowing), ref = spec
        row = flow_row(TABLE1_LAMBDA, order, cfg, flowing_order=flowing)
        values = None
        if row.couplings is not None:
            g = list(row.couplings) + [0.0] * 11
            values = [g[2], g[4], g[6], g[8], g[10], row.energy]
        return {"values": values, "reference": ref, "status": row.status,
                "truncation": row.truncation}
    return parallel_map(one, TABLE1, workers)


def table2_rows(cfg: LatticeConfig, lambdas=None, order: int = 6, workers=None) -> list:
    lambdas = list(TABLE2) if lambdas is None else list(lambdas)

    def one(lam):
        status = []
        try:
            e_exact = schrodinger_ground_energy(
                CouplingVector.anharmonic(lam, 1.0, cfg.M, 4), hbar=cfg.hbar, M=cfg.M).value
        except (DomainError, ConvergenceError) as exc:
            e_exact = None
            status.append(f"E_exact: {exc}")
        e_var = fk_variational_energy(CouplingVector.anharmonic(lam, 1.0, cfg.M, 4),
                                      cfg.M, cfg.hbar)
        row = flow_row(lam, order, cfg)
        if row.couplings is None:
            status.append(row.status)
            g = (None,) * 7
        else:
            g = row.couplings
        values = [lam, e_exact, e_var, row.energy, g[2], g[4], g[6]]
        return {"values": values, "reference": (lam,) + TABLE2.get(lam, (None,) * 6),
                "status": "; ".join(status) or "ok", "truncation": row.truncation}
    return parallel_map(one, lambdas, workers)


def table3_rows(cfg: LatticeConfig, lambdas=None, order: int = 6, workers=None) -> list:
    lambdas = [TABLE3_FAILING_LAMBDA, *TABLE3] if lambdas is None else list(lambdas)

    def one(lam):
        row = flow_row(lam, order, cfg, omega2=TABLE3_OMEGA2)
        if row.couplings is None:
            values = [lam, None, None, None, None]
        else:
            g = row.couplings
            values = [lam, row.energy, g[2], g[4], g[6]]
        ref = (lam,) + TABLE3[lam] if lam in TABLE3 else None
        return {"values": values, "reference": ref, "status": row.status,
                "truncation": row.truncation}
    return parallel_map(one, lambdas, workers)
