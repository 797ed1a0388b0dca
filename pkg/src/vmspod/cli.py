"""Command-line driver: ``python -m vmspod <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(including a failed invariant check), 4 I/O or archive format error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import archive
from .config import ConfigError, parse_config
from .fe_core import build_space
from .harness import Experiment, dt_sweep, final_l2_error, prepare, r_cutoff_sweep
from .integrator import (NewtonError, RieszMap, simulate, stability_check,
                         write_trajectory_csv)
from .manufactured import ManufacturedProblem, generate_snapshots
from .pod import (EigensolverError, correlation_matrix, h1_truncation_check,
                  l2_truncation_check, pod)
from .rom import SingularProjectorError, build_model

log = logging.getLogger("vmspod")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class InvariantError(RuntimeError):
    pass


def _check(cond, msg):
    if not cond:
        raise InvariantError(msg)
    print(f"  ok: {msg}")


def _config(args):
    overrides = {}
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    text += "\n" + "\n".join(f"{k} = {v}" for k, v in overrides.items())
    cfg = parse_config(text)
    return cfg.replace(
        snapshots=args.snapshots or cfg.snapshots,
        basis=args.basis or cfg.basis,
        out=args.out or cfg.out,
    )


def _problem(cfg):
    return ManufacturedProblem(cfg.nu, cfg.steepness, cfg.T_final)


def _basis(cfg):
    if cfg.basis:
        return archive.read_basis(cfg.basis)
    if cfg.snapshots:
        return pod(archive.read_snapshots(cfg.snapshots), cfg.rank_tol)
    space = build_space(cfg.n_div)
    return pod(generate_snapshots(space, _problem(cfg), cfg.dT, cfg.M), cfg.rank_tol)


def cmd_gen_snapshots(cfg, args):
    space = build_space(cfg.n_div)
    snaps = generate_snapshots(space, _problem(cfg), cfg.dT, cfg.M)
    out = cfg.out or "snapshots.bin"
    archive.write_snapshots(out, snaps)
    print(f"wrote {snaps.n_snapshots} snapshots (n_dof={space.n_dof}) to {out}")


def cmd_build_pod(cfg, args):
    if not cfg.snapshots:
        raise ConfigError("build-pod needs --snapshots PATH")
    snaps = archive.read_snapshots(cfg.snapshots)
    basis = pod(snaps, cfg.rank_tol)
    out = cfg.out or "basis.bin"
    archive.write_basis(out, basis, snaps.dT, snaps.nu)
    print(f"# POD rank d = {basis.d}")
    print("j,lambda,h1_norm_sq")
    for j, (lam, h1) in enumerate(zip(basis.eigenvalues, basis.h1_norms_sq), 1):
        print(f"{j},{lam:.17g},{h1:.17g}")
    if args.check_invariants:
        s = basis.space
        gram = basis.modes.T @ (s.mass @ basis.modes)
        _check(np.abs(gram - np.eye(basis.d)).max() <= 1e-10, "modes are L2-orthonormal")
        _check(np.all(np.diff(basis.eigenvalues) <= 0), "eigenvalues descending")
        r = min(cfg.r, basis.d)
        direct, tail = l2_truncation_check(snaps, basis, r)
        print(f"  L2 truncation r={r}: direct={direct:.17g} tail={tail:.17g}")
        _check(abs(direct - tail) <= 1e-8 * max(tail, 1e-12 * basis.eigenvalues[0]),
               "L2 truncation identity")
        direct, tail = h1_truncation_check(snaps, basis, r)
        print(f"  H1 truncation r={r}: direct={direct:.17g} tail={tail:.17g}")
        _check(abs(direct - tail) <= 1e-8 * max(tail, 1e-12 * basis.h1_tail(0)),
               "H1 truncation identity")
        K = correlation_matrix(snaps)
        _check(abs(np.trace(K) - basis.all_eigenvalues.sum()) <= 1e-10 * np.trace(K),
               "trace of correlation matrix equals eigenvalue sum")


def _rom_invariants(model):
    T, D, K = model.T, model.D, model.K
    scale = max(np.abs(T).max(), 1e-300)
    r = model.r
    diag = T[:, np.arange(r), np.arange(r)]
    _check(np.abs(diag).max() <= 1e-12 * scale, "T[i,j,j] = 0")
    _check(np.abs(T + T.transpose(0, 2, 1)).max() <= 1e-12 * scale, "T antisymmetric in last two slots")
    knorm = np.linalg.norm(K, 2)
    R = model.closure.effective_R
    if model.alpha > 0 or model.closure.variant.name != "GALERKIN":
        _check(np.abs(D[:R]).max(initial=0) <= 1e-12 * knorm, f"D_R rows 1..{R} vanish")
        _check(np.linalg.eigvalsh(D)[0] >= -1e-10 * knorm, "D_R positive semidefinite")


def cmd_simulate(cfg, args):
    problem = _problem(cfg)
    basis = _basis(cfg)
    if cfg.r > basis.d:
        raise ConfigError(f"r={cfg.r} exceeds the POD rank d={basis.d}")
    model = build_model(basis, cfg.r, problem, cfg.closure)
    traj = simulate(model, cfg.dt, cfg.T_final, riesz=RieszMap(basis.space))
    out = cfg.out or "trajectory.csv"
    write_trajectory_csv(traj, out)
    lhs, rhs, holds = stability_check(traj, model, cfg.nu)
    err = final_l2_error(traj, problem, basis)
    print(f"wrote {len(traj.times)} states to {out}")
    print(f"final L2 error = {err:.17g}")
    print(f"stability: lhs = {lhs:.17g}  rhs = {rhs:.17g}  holds = {holds}")
    print(f"newton iterations: max {traj.newton_iters.max()}  mean {traj.newton_iters.mean():.3f}")
    if args.check_invariants:
        _rom_invariants(model)
    if not holds:
        raise InvariantError("stability bound violated")


def _sweep(cfg, args, runner, names):
    exp: Experiment = prepare(cfg, basis=_basis(cfg) if (cfg.basis or cfg.snapshots) else None)
    report = runner(cfg, exp=exp)
    out = cfg.out or f"{runner.__name__}.csv"
    with open(out, "w", newline="") as fh:
        fh.write(report.to_csv(names))
    summary = report.summary()
    with open(out + ".summary.txt", "w") as fh:
        fh.write(summary)
    sys.stdout.write(report.to_csv(names))
    sys.stdout.write(summary)
    if not all(s[2] for s in report.stability):
        raise InvariantError("stability bound violated in at least one sweep point")


def cmd_sweep_dt(cfg, args):
    if len(cfg.dt_set) < 2:
        raise ConfigError("sweep-dt needs at least two time steps (regression)")
    _sweep(cfg, args, dt_sweep, ("dt", "error"))


def cmd_sweep_R(cfg, args):
    if len(cfg.R_set) < 2:
        raise ConfigError("sweep-R needs at least two cutoffs (regression)")
    _sweep(cfg, args, r_cutoff_sweep, ("R", "tail", "error_sq"))


COMMANDS = {
    "gen-snapshots": cmd_gen_snapshots,
    "build-pod": cmd_build_pod,
    "simulate": cmd_simulate,
    "sweep-dt": cmd_sweep_dt,
    "sweep-R": cmd_sweep_R,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vmspod", description="POD reduced-order models with VMS eddy viscosity")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--snapshots", metavar="PATH")
        p.add_argument("--basis", metavar="PATH")
        p.add_argument("--check-invariants", action="store_true")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (archive.ArchiveError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NewtonError, EigensolverError, SingularProjectorError, InvariantError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
