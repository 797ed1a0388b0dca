"""Error measurement and convergence sweeps against the exact solution."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fe_core import build_space
from .integrator import RieszMap, precompute_forcing, simulate, stability_check, step_count
from .manufactured import ManufacturedProblem, generate_snapshots
from .pod import pod
from .rom import ClosureConfig, build_model, reduce_trilinear

__all__ = [
    "Experiment",
    "SweepReport",
    "final_l2_error",
    "loglog_regression",
    "prepare",
    "dt_sweep",
    "r_cutoff_sweep",
]

log = logging.getLogger(__name__)


def loglog_regression(points):
    """Least-squares line through ``(log x, log y)``.

    Returns
    -------
    slope, intercept, r2 : float
        ``log y ~ slope * log x + intercept``; ``r2`` is the coefficient of
        determination (1.0 for a perfect fit, including degenerate ``y``).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 2:
        raise ValueError("regression needs at least two points")
    if np.any(pts <= 0):
        raise ValueError("log-log regression requires positive values")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(x) == 0:
        raise ValueError("all x values coincide")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid ** 2) / ss_tot
    return float(slope), float(intercept), float(r2)


def final_l2_error(traj, problem, basis):
    """``||u(T) - u_r^M||`` against the nodal interpolant of the exact solution."""
    t_end = traj.times[-1]
    if abs(t_end - problem.t_final) > 1e-9:
        raise ValueError(f"trajectory ends at t={t_end}, expected {problem.t_final}")
    r = traj.states.shape[1]
    space = basis.space
    ur = basis.truncate(r) @ traj.final
    ue = space.interpolate(problem.exact_velocity, t_end).coeffs
    e = ue - ur
    return float(np.sqrt(e @ (space.mass @ e)))


@dataclass
class SweepReport:
    """One row per control value, sorted ascending by control.

    ``columns`` names the row entries; the first is the control value.
    """

    columns: tuple
    rows: list
    regression: tuple
    config: dict
    stability: list = field(default_factory=list)

    def column(self, name):
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def to_csv(self, names=None):
        names = names or self.columns
        idx = [self.columns.index(n) for n in names]
        lines = [",".join(names)]
        for row in self.rows:
            lines.append(",".join(_fmt(row[i]) for i in idx))
        return "\n".join(lines) + "\n"

    def summary(self):
        slope, intercept, r2 = self.regression
        cfg = ", ".join(f"{k}={v}" for k, v in self.config.items())
        holds = all(s[2] for s in self.stability) if self.stability else None
        return (f"# {cfg}\n"
                f"slope = {slope:.6f}\n"
                f"prefactor = {np.exp(intercept):.6g}\n"
                f"r2 = {r2:.6f}\n"
                f"stability_holds = {holds}\n")


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass
class Experiment:
    """Snapshot/POD/reduced-operator state shared by every point of a sweep."""

    problem: ManufacturedProblem
    space: object
    snapshots: object
    basis: object
    r: int
    T: np.ndarray
    riesz: RieszMap

    def model(self, closure):
        return build_model(self.basis, self.r, self.problem, closure, T=self.T)


def prepare(config, basis=None):
    """Build (or reuse) the space, snapshots, POD basis and trilinear tensor."""
    problem = ManufacturedProblem(config.nu, config.steepness, config.T_final)
    if basis is None:
        space = build_space(config.n_div)
        snaps = generate_snapshots(space, problem, config.dT, config.M)
        basis = pod(snaps, config.rank_tol)
    else:
        space = basis.space
        snaps = None
    if config.r > basis.d:
        raise ValueError(f"r={config.r} exceeds the POD rank d={basis.d}")
    T = reduce_trilinear(basis, config.r)
    return Experiment(problem, space, snaps, basis, config.r, T, RieszMap(space))


def _run(exp, closure, dt, forcing):
    model = exp.model(closure)
    traj = simulate(model, dt, exp.problem.t_final, forcing=forcing)
    err = final_l2_error(traj, exp.problem, exp.basis)
    return err, stability_check(traj, model, exp.problem.nu)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def dt_sweep(config, dt_set=None, exp=None):
    """Final-time L2 error for each time step at fixed ``h``, ``r``, ``R``, ``alpha``.

    Regression is of ``log E`` on ``log dt``.
    """
    dt_set = sorted(config.dt_set if dt_set is None else dt_set)
    if len(dt_set) < 2:
        raise ValueError("a sweep needs at least two time steps for the regression")
    for dt in dt_set:
        step_count(dt, config.T_final)
    exp = exp or prepare(config)
    closure = config.closure

    def point(dt):
        n = step_count(dt, config.T_final)
        forcing = precompute_forcing(exp.basis, exp.problem, dt, n, exp.r, exp.riesz)
        err, stab = _run(exp, closure, dt, forcing)
        log.info("dt=%g  E=%.6e  stability %s", dt, err, stab[2])
        return dt, err, stab

    results = _map(point, dt_set, config.workers)
    rows = [(dt, err) for dt, err, _ in results]
    reg = loglog_regression(rows)
    echo = dict(h=1.0 / config.n_div, r=config.r, R=config.R, alpha=config.alpha,
                variant=config.closure.variant.name, dt_set=tuple(dt_set))
    return SweepReport(("dt", "error"), rows, reg, echo, [s for *_, s in results])


def r_cutoff_sweep(config, R_set=None, exp=None):
    """Squared final-time error against the H1-weighted POD tail beyond ``R``.

    All points share one time grid, so the projected forcing is assembled
    once.  Regression is of ``log E^2`` on ``log tail``.
    """
    R_set = sorted(config.R_set if R_set is None else R_set)
    if len(R_set) < 2:
        raise ValueError("a sweep needs at least two cutoffs for the regression")
    exp = exp or prepare(config)
    if max(R_set) > exp.r:
        raise ValueError(f"cutoff {max(R_set)} exceeds r={exp.r}")
    dt = config.R_sweep_dt
    n = step_count(dt, config.T_final)
    forcing = precompute_forcing(exp.basis, exp.problem, dt, n, exp.r, exp.riesz)

    def point(R):
        closure = ClosureConfig(config.variant, config.alpha, R)
        err, stab = _run(exp, closure, dt, forcing)
        tail = exp.basis.h1_tail(R)
        log.info("R=%d  tail=%.4e  E^2=%.6e  stability %s", R, tail, err ** 2, stab[2])
        return R, tail, err ** 2, stab

    results = _map(point, R_set, config.workers)
    rows = [(R, tail, e2) for R, tail, e2, _ in results]
    reg = loglog_regression([(tail, e2) for _, tail, e2 in rows])
    echo = dict(h=1.0 / config.n_div, r=config.r, alpha=config.alpha, dt=dt,
                variant=config.variant.name, R_set=tuple(R_set))
    return SweepReport(("R", "tail", "error_sq"), rows, reg, echo,
                       [s for *_, s in results])
