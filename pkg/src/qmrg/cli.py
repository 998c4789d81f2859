"""Command-line front end.

    qmrg flow      coupling flow for V = M omega2 x^2/2 + lambda x^4/24
    qmrg vflow     variational RG flow of a gridded potential
    qmrg tables    regenerate the reference tables as CSV
    qmrg oracle    schrodinger | single-mode | small-lattice
    qmrg harmonic  closed-form harmonic lattice results

Exit status: 0 success, 1 computational error, 2 usage error. Results go to
--out (JSON or CSV); a one-line summary goes to stdout, progress to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import ConvergenceError, DomainError, LogDomainError
from .exact import (HarmonicSpec, continuum_harmonic_partition_function_log,
                    harmonic_effective_constant, harmonic_partition_function_log)
from .fk_rg import GridPotential, run_variational_flow
from .lattice import LatticeConfig
from .oracle import (schrodinger_ground_energy, single_mode_step_oracle,
                     small_lattice_effective_potential)
from .series import CouplingVector
from .tables import (REFERENCE_BETA, REFERENCE_N, TABLE1_COLUMNS, TABLE2_COLUMNS, TABLE3_COLUMNS,
                     table1_rows, table2_rows, table3_rows)
from .wh_flow import run_flow

PROGRESS_EVERY = 10**6


@dataclass
class RunSpec:
    command: str
    lam: float
    omega2: float
    M: float
    hbar: float
    N: int
    beta: float
    order: int
    stride: Optional[int]
    scale: int
    out: Optional[str]
    format: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _even(n: int) -> int:
    n = int(n)
    return max(2, n - (n % 2))


def _lattice(spec: RunSpec) -> LatticeConfig:
    return LatticeConfig(spec.N, spec.beta, spec.M, spec.hbar)


def _header(spec: RunSpec) -> dict:
    return {"run_spec": spec.to_dict(), "version": __version__}


def _write(spec: RunSpec, text: str, name: Optional[str] = None) -> None:
    if spec.out is None:
        return
    path = Path(spec.out)
    if name is not None:
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    path.write_text(text)


def _csv_text(spec: RunSpec, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {json.dumps(_header(spec), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _progress(done: int, total: int) -> None:
    print(f"progress: {done}/{total} modes", file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_flow(spec: RunSpec) -> int:
    cfg = _lattice(spec)
    frozen = spec.extra.get("frozen_quartic", False)
    order = 4 if frozen else spec.order
    initial = CouplingVector.anharmonic(spec.lam, spec.omega2, spec.M, order)
    trace = run_flow(initial, cfg, stride=spec.stride, flowing_order=2 if frozen else None,
                     progress=_progress, progress_every=PROGRESS_EVERY)
    if spec.format == "json":
        doc = trace.to_dict()
        doc.update(_header(spec))
        _write(spec, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        cols = ["m"] + [f"g{k}" for k in range(order + 1)]
        _write(spec, _csv_text(spec, cols, [[m, *cv.derivs] for m, cv in trace.snapshots]))
    g = trace.final.couplings
    couplings = " ".join(f"g{k}={g[k]:.5f}" for k in range(2, order + 1, 2))
    print(f"E_RG={trace.energy:.5f} {couplings} mode={trace.meta['truncation']['mode']}")
    return 0


def cmd_vflow(spec: RunSpec) -> int:
    cfg = _lattice(spec)
    potential = CouplingVector.anharmonic(spec.lam, spec.omega2, spec.M, 4)
    half = spec.extra["half_width"]
    V = GridPotential.from_function(potential, half, spec.extra["points"])
    out = run_variational_flow(V, cfg, progress=_progress, progress_every=10**4)
    if spec.format == "json":
        doc = out.to_dict()
        doc.update(_header(spec))
        _write(spec, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        _write(spec, f"# {json.dumps(_header(spec), sort_keys=True)}\n" + out.to_csv())
    print(f"V0(0)={float(out(0.0)):.5f}")
    return 0


def _table_doc(rows, columns, spec):
    body = []
    for r in rows:
        values = r["values"]
        ref = r["reference"]
        dev = ""
        e_idx = columns.index("E_RG")
        if ref is not None and values[e_idx] is not None and ref[e_idx] is not None:
            dev = values[e_idx] - ref[e_idx]
        body.append([*values, r["truncation"]["mode"], r["truncation"]["order"],
                     spec.N, spec.beta, spec.scale,
                     None if ref is None else ref[e_idx], dev, r["status"]])
    meta_cols = ["truncation_mode", "order", "N", "beta", "scale", "ref_E_RG",
                 "dev_E_RG", "status"]
    return _csv_text(spec, columns + meta_cols, body)


def cmd_tables(spec: RunSpec) -> int:
    cfg = _lattice(spec)
    which = spec.extra.get("which", [1, 2, 3])
    failures = 0
    for t in which:
        if t == 1:
            rows, cols = table1_rows(cfg), TABLE1_COLUMNS
        elif t == 2:
            rows, cols = table2_rows(cfg), TABLE2_COLUMNS
        else:
            rows, cols = table3_rows(cfg), TABLE3_COLUMNS
        text = _table_doc(rows, cols, spec)
        if spec.out is None:
            sys.stdout.write(text)
        else:
            _write(spec, text, f"table{t}.csv")
        failures += sum(r["status"] != "ok" for r in rows)
        print(f"table{t}: {len(rows)} rows, {sum(r['status'] == 'ok' for r in rows)} ok",
              file=sys.stderr)
    return 0


def cmd_oracle(spec: RunSpec) -> int:
    method = spec.extra["method"]
    x0 = spec.extra["x0"]
    if method == "schrodinger":
        potential = CouplingVector.anharmonic(spec.lam, spec.omega2, spec.M, 4)
        res = schrodinger_ground_energy(potential, spec.extra.get("L"),
                                        spec.extra.get("points") or 4000, spec.hbar, spec.M)
    elif method == "single-mode":
        cfg = _lattice(spec)
        potential = CouplingVector.anharmonic(spec.lam, spec.omega2, spec.M, 4)
        m = spec.extra.get("m") or max(1, cfg.n_modes // 2)
        res = single_mode_step_oracle(potential, cfg, m, x0)
    else:
        cfg = _lattice(spec)
        potential = CouplingVector.anharmonic(spec.lam, spec.omega2, spec.M, 4)
        res = small_lattice_effective_potential(potential, cfg, x0)
    doc = res.to_dict()
    doc.update(_header(spec))
    text = json.dumps(doc, sort_keys=True, default=float)
    if spec.out is None:
        print(text)
    else:
        _write(spec, text + "\n")
        print(f"{res.method}: {res.value:.5f} +- {res.est_error:.1e}")
    return 0


def cmd_harmonic(spec: RunSpec) -> int:
    cfg = _lattice(spec)
    hs = HarmonicSpec(spec.omega2, cfg)
    doc = {"effective_constant": harmonic_effective_constant(hs)}
    if spec.omega2 > 0:
        doc["log_Z"] = harmonic_partition_function_log(hs)
        doc["log_Z_continuum"] = continuum_harmonic_partition_function_log(
            spec.omega2, spec.beta, spec.hbar)
    doc.update(_header(spec))
    text = json.dumps(doc, sort_keys=True)
    if spec.out is None:
        print(text)
    else:
        _write(spec, text + "\n")
        print(f"C={doc['effective_constant']:.5f}")
    return 0


COMMANDS = {"flow": cmd_flow, "vflow": cmd_vflow, "tables": cmd_tables,
            "oracle": cmd_oracle, "harmonic": cmd_harmonic}

# command -> (N, beta) defaults
_LATTICE_DEFAULTS = {
    "flow": (REFERENCE_N, REFERENCE_BETA),
    "tables": (REFERENCE_N, REFERENCE_BETA),
    "vflow": (10**4, 10.0),
    "harmonic": (REFERENCE_N, REFERENCE_BETA),
    "schrodinger": (REFERENCE_N, REFERENCE_BETA),
    "single-mode": (REFERENCE_N, REFERENCE_BETA),
    "small-lattice": (4, 0.1),
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("shared options")
    g.add_argument("--n", type=int, help="lattice N (even); time slices N+1")
    g.add_argument("--beta", type=float, help="inverse temperature")
    g.add_argument("--mass", type=float, default=1.0)
    g.add_argument("--hbar", type=float, default=1.0)
    g.add_argument("--lambda", dest="lam", type=float, default=2.4,
                   help="quartic coupling (V has lambda x^4/4!)")
    g.add_argument("--omega2", type=float, default=1.0, help="Omega^2 of the quadratic term")
    g.add_argument("--order", type=int, default=6, help="truncation order of the jet")
    g.add_argument("--out", help="output file (directory for `tables`)")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("--stride", type=int, help="snapshot interval in modes")
    g.add_argument("--scale", type=int, default=1,
                   help="divide the default N by this factor for desk-scale runs")

    p = argparse.ArgumentParser(prog="qmrg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    f = sub.add_parser("flow", parents=[shared], help="coupling flow")
    f.add_argument("--frozen-quartic", action="store_true",
                   help="flow only g0, g2 with g4 held at lambda (order 4)")
    v = sub.add_parser("vflow", parents=[shared], help="variational RG flow on a grid")
    v.add_argument("--half-width", type=float, default=12.0)
    v.add_argument("--points", type=int, default=241)
    t = sub.add_parser("tables", parents=[shared], help="regenerate tables as CSV")
    t.add_argument("--which", default="1,2,3", help="comma-separated subset of 1,2,3")
    o = sub.add_parser("oracle", parents=[shared], help="independent verification methods")
    o.add_argument("method", choices=["schrodinger", "single-mode", "small-lattice"])
    o.add_argument("--x0", type=float, default=0.0)
    o.add_argument("--m", type=int, help="mode index for single-mode")
    o.add_argument("--L", type=float, help="box half-width for schrodinger")
    o.add_argument("--points", type=int, help="grid points for schrodinger")
    sub.add_parser("harmonic", parents=[shared], help="harmonic lattice closed forms")
    return p


def parse_spec(argv=None) -> RunSpec:
    parser = build_parser()
    a = parser.parse_args(argv)
    key = a.method if a.command == "oracle" else a.command
    n_default, beta_default = _LATTICE_DEFAULTS[key]
    if a.scale < 1:
        parser.error("--scale must be >= 1")
    N = a.n if a.n is not None else _even(n_default // a.scale)
    beta = a.beta if a.beta is not None else beta_default
    if N < 2 or N % 2:
        parser.error(f"--n must be even and >= 2, got {N}")
    if not beta > 0 or not a.mass > 0 or not a.hbar > 0:
        parser.error("--beta, --mass and --hbar must be positive")
    if a.order < 4 or a.order % 2:
        parser.error("--order must be even and >= 4")
    if a.stride is not None and a.stride < 1:
        parser.error("--stride must be >= 1")
    extra = {}
    if a.command == "flow":
        extra["frozen_quartic"] = a.frozen_quartic
    elif a.command == "vflow":
        if a.points < 33 or a.half_width <= 0:
            parser.error("--points must be >= 33 and --half-width > 0")
        extra.update(half_width=a.half_width, points=a.points)
    elif a.command == "tables":
        try:
            which = sorted({int(x) for x in a.which.split(",")})
        except ValueError:
            parser.error(f"bad --which {a.which!r}")
        if not set(which) <= {1, 2, 3}:
            parser.error("--which takes a subset of 1,2,3")
        extra["which"] = which
    elif a.command == "oracle":
        extra.update(method=a.method, x0=a.x0, m=a.m, L=a.L, points=a.points)
    return RunSpec(a.command, a.lam, a.omega2, a.mass, a.hbar, N, beta, a.order,
                   a.stride, a.scale, a.out, a.format, extra)


def main(argv=None) -> int:
    spec = parse_spec(argv)
    try:
        return COMMANDS[spec.command](spec)
    except (LogDomainError, DomainError, ConvergenceError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
