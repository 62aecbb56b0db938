"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import analysis
from .config import RunConfig, parse_angle
from .dynamics import DdeConfigError, integrate, steady_state
from .linear_response import ResponseError
from .sensing import ClosedFormUnavailable, sensitivity_closed
from .topology import Topology
from .validation import CHECKS, run_battery, unitarity_table

TOPOLOGY_LABELS = (
    "separated-i", "separated-ii", "nested-i", "nested-ii",
    "braided-i", "braided-ii", "coincident", "direct",
)


class UsageError(Exception):
    pass


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared options")
    g.add_argument("--config", help="JSON run configuration file")
    g.add_argument("--out", help="output file (or directory for multi-file commands)")
    g.add_argument("--seed", type=int, default=0, help="seed for randomized validation sets")
    g.add_argument("--topology", choices=TOPOLOGY_LABELS)
    g.add_argument("--n", type=int, help="number of mode-a coupling points N")
    g.add_argument("--m", type=int, help="number of mode-b coupling points M")
    g.add_argument("--nest-index", type=int)
    g.add_argument("--kappa", type=float, help="port rate, sets kappa_a = kappa_b")
    g.add_argument("--gamma-x", type=float)
    g.add_argument("--gamma-y", type=float)
    g.add_argument("--co", type=float, help="cooperativity; sets gamma = (kappa/2) sqrt(C_o)")
    g.add_argument("--omega-rot", type=float, help="angular velocity Omega")
    g.add_argument("--phi", type=str, help="phase per lattice step (accepts e.g. 0.5pi)")
    g.add_argument("--phi-steps", type=int, default=401, help="points in phi sweeps over [0, 2pi]")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="giantgyro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("sigma", parents=[common], help="nonreciprocal strength over phi")

    p = sub.add_parser("snr", parents=[common], help="SNR per photon over phi, or figure panels")
    p.add_argument("--figure", choices=["f4", "f6", "f8", "f11"], help="write the panel set of an SNR figure")

    p = sub.add_parser("sensitivity", parents=[common], help="angular-velocity sensitivity over phi")
    p.add_argument("--numeric", action="store_true", help="finite-difference pipeline column")
    p.add_argument("--closed", action="store_true", help="closed-form column")

    p = sub.add_parser("compare", parents=[common], help="strict braided vs traditional sensitivity ratios")
    p.add_argument("--baseline", choices=["traditional-i", "traditional-ii"], default="traditional-i")

    p = sub.add_parser("dynamics", parents=[common], help="integrate the delayed equations of motion")
    p.add_argument("--steps-per-tau", type=int)
    p.add_argument("--total-time", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=complex)
    p.add_argument("--beta", type=complex)
    p.add_argument("--record-every", type=int)
    p.add_argument("--markovian", action="store_true", help="instantaneous (delay-free) comparison mode")

    p = sub.add_parser("reciprocal-points", parents=[common], help="phases where sigma(0) = 0")
    p.add_argument("--method", choices=["closed", "numeric", "both"], default="both")

    p = sub.add_parser("figures", parents=[common], help="write data for all figures into --out")
    p.add_argument("--figure", action="append", choices=[f.lower() for f in analysis.FIGURES])

    p = sub.add_parser("validate", parents=[common], help="run the invariant battery")
    p.add_argument("--check", action="append", choices=list(CHECKS))
    p.add_argument("--omega-span", type=float, default=10.0, help="omega range in units of kappa")
    p.add_argument("--random-sets", type=int, default=5)
    return parser


def _merge(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    params = cfg.params
    if args.kappa is not None:
        params = replace(params, kappa_a=args.kappa, kappa_b=args.kappa)
    if args.gamma_x is not None:
        params = replace(params, gamma_x=args.gamma_x)
    if args.gamma_y is not None:
        params = replace(params, gamma_y=args.gamma_y)
    if args.omega_rot is not None:
        params = replace(params, omega_rot=args.omega_rot)
    if args.phi is not None:
        params = replace(params, drive_phase_per_tau=parse_angle(args.phi))
    if args.co is not None:
        params = params.with_cooperativity(args.co)
    elif args.kappa is not None and cfg.params.cooperativity is not None and not args.config:
        # keep the default cooperativity when only kappa changes
        params = params.with_cooperativity(cfg.params.cooperativity)
    cfg.params = params
    if args.topology is not None:
        base = cfg.topology
        label = args.topology
        if label in ("coincident", "direct"):
            cfg.topology = Topology.from_label(label)
        else:
            N = args.n if args.n is not None else (base.N if base else None)
            M = args.m if args.m is not None else (base.M if base else None)
            if N is None:
                raise UsageError(f"--topology {label} needs --n")
            if M is None:
                raise UsageError(f"--topology {label} needs --m")
            nest = args.nest_index if args.nest_index is not None else (base.nest_index if base else None)
            if not label.startswith("nested"):
                nest = None
            cfg.topology = Topology.from_label(label, N, M, nest)
    elif any(v is not None for v in (args.n, args.m, args.nest_index)):
        if cfg.topology is None:
            raise UsageError("--n/--m/--nest-index need --topology")
        t = cfg.topology
        cfg.topology = Topology(t.kind, t.orientation,
                                args.n if args.n is not None else t.N,
                                args.m if args.m is not None else t.M,
                                args.nest_index if args.nest_index is not None else t.nest_index)
    if args.out is not None:
        cfg.out = args.out
    return cfg


def _require_topology(cfg: RunConfig) -> Topology:
    if cfg.topology is None:
        raise UsageError("this command needs --topology (or a topology section in --config)")
    return cfg.topology


def _validate_params(cfg: RunConfig):
    bad = cfg.params.violations()
    if bad:
        raise UsageError("invalid parameters: " + "; ".join(bad))


def _emit(text: str, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _phi_sweep(cfg, steps, sensitivity=False, closed=True):
    grid = np.linspace(0.0, 2 * math.pi, steps)
    spec = analysis.SweepSpec("phi", grid, cfg.params, _require_topology(cfg), cfg.drive,
                              sensitivity=sensitivity, closed=closed)
    return analysis.sweep(spec)


def _write_panels(panels: dict, outdir: str, prefix: str):
    os.makedirs(outdir, exist_ok=True)
    names = []
    for name, data in panels.items():
        path = os.path.join(outdir, f"{prefix}_{name}.csv")
        data.to_csv(path)
        names.append(path)
    return names


def cmd_sigma(cfg, args) -> int:
    if args.phi_steps < 2:
        raise UsageError("--phi-steps must be at least 2")
    data = _phi_sweep(cfg, args.phi_steps, closed=False)
    data.columns = {"sigma": data.columns["sigma"]}
    _emit(data.to_csv(), cfg.out)
    return 0


def cmd_snr(cfg, args) -> int:
    if args.figure:
        if not cfg.out:
            raise UsageError("--figure needs --out DIR")
        for path in _write_panels(analysis.figure_data(args.figure.upper(), args.phi_steps), cfg.out, args.figure):
            print(path)
        return 0
    data = _phi_sweep(cfg, args.phi_steps)
    keep = [k for k in data.columns if "snr" in k or "noise" in k]
    data.columns = {k: data.columns[k] for k in keep}
    _emit(data.to_csv(), cfg.out)
    return 0


def cmd_sensitivity(cfg, args) -> int:
    numeric = args.numeric or not args.closed
    closed = args.closed
    topo = _require_topology(cfg)
    grid = np.linspace(0.0, 2 * math.pi, args.phi_steps)
    spec = analysis.SweepSpec("phi", grid, cfg.params, topo, cfg.drive, sensitivity=numeric, closed=False)
    data = analysis.sweep(spec)
    cols = {}
    if numeric:
        cols["sens_alpha"] = data.columns["sens_alpha"]
        cols["sens_beta"] = data.columns["sens_beta"]
    if closed:
        try:
            ca, cb = sensitivity_closed(cfg.params, topo, grid, alpha=cfg.drive.alpha)
        except ClosedFormUnavailable as exc:
            raise UsageError(str(exc))
        cols["closed_sens_alpha"], cols["closed_sens_beta"] = ca, cb
        if numeric:
            cols["rel_err_alpha"] = np.abs(cols["sens_alpha"] - ca) / ca
            cols["rel_err_beta"] = np.abs(cols["sens_beta"] - cb) / cb
    data.columns = cols
    _emit(data.to_csv(), cfg.out)
    return 0


def cmd_compare(cfg, args) -> int:
    phi = cfg.params.drive_phase_per_tau
    which = "i" if args.baseline == "traditional-i" else "ii"
    data = analysis.compare_table(which, phi)
    _emit(data.to_csv(), cfg.out)
    return 0


def cmd_dynamics(cfg, args) -> int:
    topo = _require_topology(cfg)
    params = cfg.params if args.tau is None else replace(cfg.params, tau=args.tau)
    bad = params.violations()
    if bad:
        raise UsageError("invalid parameters: " + "; ".join(bad))
    dde = cfg.dde
    updates = {}
    for key, value in (("steps_per_tau", args.steps_per_tau), ("total_time", args.total_time),
                       ("drive_alpha", args.alpha), ("drive_beta", args.beta),
                       ("record_every", args.record_every)):
        if value is not None:
            updates[key] = value
    if args.markovian:
        updates["markovian"] = True
    dde = replace(dde, **updates)
    try:
        dde.validate()
    except DdeConfigError as exc:
        raise UsageError(str(exc))
    traj = integrate(params, topo, dde)
    if cfg.out:
        traj.to_csv(cfg.out)
        line_out = sys.stdout
    else:
        traj.to_csv(sys.stdout)
        line_out = sys.stderr
    ss = steady_state(params, topo, dde.drive_alpha, dde.drive_beta)
    err = np.linalg.norm(traj.final_means[:2] - ss) / max(np.linalg.norm(ss), 1e-300)
    print(f"steady-state relative error {err:.3e} (t={traj.times[-1]:.6g}, K={dde.steps_per_tau})", file=line_out)
    return 0


def cmd_reciprocal_points(cfg, args) -> int:
    topo = _require_topology(cfg)
    methods = ["closed", "numeric"] if args.method == "both" else [args.method]
    for method in methods:
        result = analysis.reciprocal_points(topo, method)
        if result.everywhere:
            print(f"{method}: sigma(0) vanishes for every phi")
        else:
            text = ", ".join(f"{r / math.pi:.8f}pi" for r in result.roots) or "none"
            print(f"{method}: {text}")
    return 0


def cmd_figures(cfg, args) -> int:
    if not cfg.out:
        raise UsageError("figures needs --out DIR")
    figures = [f.upper() for f in args.figure] if args.figure else list(analysis.FIGURES)
    for fid in figures:
        for path in _write_panels(analysis.figure_data(fid, args.phi_steps), cfg.out, fid.lower()):
            print(path)
    return 0


def cmd_validate(cfg, args) -> int:
    checks = tuple(args.check) if args.check else CHECKS
    if args.check == ["unitarity"] and cfg.topology is not None:
        rows = unitarity_table(cfg.params, cfg.topology, args.omega_span)
        print("omega,unitarity_residual")
        for om, r in rows:
            print(f"{om:.17g},{r:.17g}")
        worst = max(r for _, r in rows)
        print(f"{'PASS' if worst <= 1e-10 else 'FAIL'}  unitarity max residual={worst:.3e} tol=1.0e-10")
        return 0 if worst <= 1e-10 else 1
    results = run_battery(cfg.params, cfg.topology, checks, seed=args.seed,
                          random_sets=args.random_sets, omega_span=args.omega_span)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "sigma": cmd_sigma,
    "snr": cmd_snr,
    "sensitivity": cmd_sensitivity,
    "compare": cmd_compare,
    "dynamics": cmd_dynamics,
    "reciprocal-points": cmd_reciprocal_points,
    "figures": cmd_figures,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        if args.command != "validate":
            # validate reports violated invariants as failed checks instead
            _validate_params(cfg)
        return COMMANDS[args.command](cfg, args)
    except ResponseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
