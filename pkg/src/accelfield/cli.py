"""Command line: ``verify``, ``converge``, ``bogoliubov`` and ``doppler``."""
from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path
import sys

import numpy as np

from .confmap import KINDS, bogoliubov, doppler_experiment, make_map
from .fock.basis import build_basis
from .fock.states import gaussian_packet
from .grid import derivative_matrix, make_grid
from .report import ALL_SUITES, WORKERS_ENV, converge, load_config, run_suite


def parse_map(spec: str):
    """``kind:key=value,key=value`` -> ConformalMap, e.g. ``rindler:accel=1``."""
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = float(val)
    if kind == "polynomial" and "k" in params:
        params["k"] = int(params["k"])
    return make_map(kind, **params)


def _cmd_verify(args) -> int:
    cfg = load_config(args.config, suites=args.suite or None, out_dir=args.out)
    report = run_suite(cfg)
    path = report.write(cfg.out_dir)
    for r in report.records:
        flag = "skip" if r.kind == "skip" else ("PASS" if r.passed else "FAIL")
        print(f"{flag:4s}  {r.check_id}")
    print(f"report: {path}")
    return 0 if report.passed else 1


def _cmd_converge(args) -> int:
    sweep = [int(x) for x in args.sweep.split(",")] if args.sweep else None
    cfg = load_config(args.config, sweep=sweep)
    out = args.out or str(Path(cfg.out_dir) / "converge.csv")
    for s in converge(cfg, out):
        print(f"{s.name:28s} slope {s.slope:7.3f}  errors {', '.join(f'{e:.3e}' for e in s.err)}")
    print(f"table: {out}")
    return 0


def _cmd_bogoliubov(args) -> int:
    g = make_grid(args.M, args.domega)
    bp = bogoliubov(parse_map(args.map), g)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["out_index", "in_index", "omega_out", "omega_in", "abs_alpha", "abs_beta"])
        for k in range(len(bp.omega_out)):
            for j in range(len(bp.omega_in)):
                w.writerow([k + 1, j + 1, bp.omega_out[k], bp.omega_in[j],
                            abs(bp.alpha[k, j]), abs(bp.beta[k, j])])
    print(json.dumps({"max_abs_beta": bp.beta_norm, **{k: v for k, v in bp.meta.items()}}, default=str))
    return 0


def _cmd_doppler(args) -> int:
    g = make_grid(args.M, args.domega)
    D = derivative_matrix(g, 2)
    sigma_omega = 1 / (2 * args.sigma)
    pk = gaussian_packet(g, args.omega_c or 0.5 * g.omega_max, sigma_omega, args.u0,
                         support=D.interior, cut=1e-10)
    r = doppler_experiment(pk, args.eps, build_basis(g, 1), D)
    summary = {k: v for k, v in r.items() if np.ndim(v) == 0}
    print(json.dumps(summary, indent=2))
    ok = (not np.isfinite(r["rel_l2"]) or r["rel_l2"] <= 0.1) and r["m_rel_err"] <= 0.02
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="accelfield", description=__doc__,
                                 epilog=f"worker threads: set {WORKERS_ENV}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run verification suites and write report.json")
    v.add_argument("--config", help="YAML config file")
    v.add_argument("--suite", action="append", choices=ALL_SUITES, help="repeatable")
    v.add_argument("--out", help="output directory")
    v.set_defaults(func=_cmd_verify)

    c = sub.add_parser("converge", help="refinement sweeps to CSV")
    c.add_argument("--config")
    c.add_argument("--sweep", help="comma-separated mode counts, e.g. 16,32,64")
    c.add_argument("--out", help="CSV path")
    c.set_defaults(func=_cmd_converge)

    b = sub.add_parser("bogoliubov", help="alpha/beta magnitudes for a map")
    b.add_argument("--map", required=True, help=f"kind:key=val,...; kinds: {', '.join(KINDS)}")
    b.add_argument("--out", required=True)
    b.add_argument("--M", type=int, default=16)
    b.add_argument("--domega", type=float, default=0.5)
    b.set_defaults(func=_cmd_bogoliubov)

    d = sub.add_parser("doppler", help="acceleration Doppler shift of a packet")
    d.add_argument("--u0", type=float, required=True, help="packet position")
    d.add_argument("--sigma", type=float, required=True, help="position spread sigma_u")
    d.add_argument("--eps", type=float, required=True, help="acceleration parameter")
    d.add_argument("--omega-c", type=float, default=None)
    d.add_argument("--M", type=int, default=64)
    d.add_argument("--domega", type=float, default=0.125)
    d.set_defaults(func=_cmd_doppler)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
