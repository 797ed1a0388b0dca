"""Backward Euler for the reduced system, solved by Newton's method.

Each step solves, for ``a = a^{k+1}``,

    (a - a^k)/dt + (nu K_r + alpha D_R) a + N(a) = F(t_{k+1}),

with ``N(a)_l = sum_ij a_i a_j T[i, j, l]``.  Along the way the integrator
accumulates both sides of the discrete energy bound

    |a^M|^2 + nu dt sum |grad u_r^{k+1}|^2 <= |a^0|^2 + dt/nu sum ||f^{k+1}||_{-1}^2,

where the dual norm is the discrete one, ``F_h^T A^{-1} F_h`` with ``A`` the
FE stiffness plus mass matrix.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .fe_core import load_vector

__all__ = [
    "NewtonError",
    "Trajectory",
    "ForcingSeries",
    "RieszMap",
    "residual",
    "jacobian",
    "step",
    "step_count",
    "precompute_forcing",
    "simulate",
    "stability_check",
    "write_trajectory_csv",
]

log = logging.getLogger(__name__)

NEWTON_RTOL = 1e-12
NEWTON_MAXIT = 10
LINE_SEARCH_HALVINGS = 20


class NewtonError(RuntimeError):
    def __init__(self, step_index, residual_norm, iterations):
        super().__init__(
            f"Newton failed at step {step_index}: residual {residual_norm:.3e} "
            f"after {iterations} iterations")
        self.step_index = step_index
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    newton_iters: np.ndarray
    stability_lhs: float = 0.0   # nu dt sum (a^{k+1})^T K a^{k+1}
    stability_rhs: float = 0.0   # dt/nu sum ||f^{k+1}||_{-1,h}^2
    forced: bool = True

    @property
    def final(self):
        return self.states[-1]


class RieszMap:
    """Discrete ``H^{-1}`` norm ``F^T (K + M)^{-1} F`` on a fixed FE space."""

    def __init__(self, space):
        self.space = space
        A = (space.scalar_stiffness + space.scalar_mass).tocsc()
        try:
            self._lu = spla.splu(A)
        except RuntimeError as exc:
            raise ValueError(f"singular Riesz operator: {exc}") from exc

    def dual_norm_sq(self, F):
        fx, fy = self.space.split(F)
        return float(fx @ self._lu.solve(fx) + fy @ self._lu.solve(fy))


@dataclass
class ForcingSeries:
    """Projected loads and dual norms at ``t_k = k dt``, ``k = 1..n_steps``.

    ``projected`` has one column per retained mode of the basis it was built
    from; models with fewer modes use the leading columns.
    """

    dt: float
    projected: np.ndarray
    dual_norm_sq: np.ndarray = field(default=None)


def step_count(dt, t_final):
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    ratio = t_final / dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 or n < 1:
        raise ValueError(f"T_final/dt = {ratio!r} is not a positive integer")
    return n


def precompute_forcing(basis, problem, dt, n_steps, r=None, riesz=None):
    """Assemble a fresh FE load at every step time, then project it.

    The result depends only on the basis and the time grid, so one series
    serves every closure variant and cutoff of a sweep.
    """
    r = basis.d if r is None else r
    Phi = basis.truncate(r)
    proj = np.empty((n_steps, r))
    dual = np.empty(n_steps) if riesz is not None else None
    for k in range(n_steps):
        Fh = load_vector(basis.space, problem.exact_forcing, (k + 1) * dt)
        proj[k] = Phi.T @ Fh
        if riesz is not None:
            dual[k] = riesz.dual_norm_sq(Fh)
    return ForcingSeries(dt, proj, dual)


def residual(model, a, a_prev, F, dt):
    return (a - a_prev) / dt + model.linear_operator @ a + model.convection(a) - F


def jacobian(model, a, dt):
    J = model.linear_operator + model.convection_jacobian(a)
    J[np.diag_indices_from(J)] += 1.0 / dt
    return J


def step(model, a_k, t_next, dt, F=None, step_index=0, return_iters=False):
    """One backward Euler step.

    Parameters
    ----------
    model : ReducedModel
    a_k : (r,) ndarray
    t_next : float
        Time level of the unknown; the forcing is evaluated there unless
        ``F`` is given.
    dt : float
    F : (r,) ndarray, optional
        Projected forcing at ``t_next``.

    Raises
    ------
    NewtonError
        If the residual does not reach ``1e-12 (1 + |F|_inf)`` within ten
        damped Newton iterations.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if F is None:
        F = model.forcing(t_next)
    tol = NEWTON_RTOL * (1.0 + np.abs(F).max(initial=0.0))
    L = model.linear_operator
    a = np.array(a_k, dtype=float, copy=True)

    def res(x):
        return (x - a_k) / dt + L @ x + model.convection(x) - F

    g = res(a)
    gnorm = np.abs(g).max(initial=0.0)
    it = 0
    while gnorm > tol:
        if it == NEWTON_MAXIT:
            raise NewtonError(step_index, gnorm, it)
        J = L + model.convection_jacobian(a)
        J[np.diag_indices_from(J)] += 1.0 / dt
        delta = np.linalg.solve(J, -g)
        lam = 1.0
        for _ in range(LINE_SEARCH_HALVINGS + 1):
            trial = a + lam * delta
            g_trial = res(trial)
            n_trial = np.abs(g_trial).max()
            if n_trial < gnorm or n_trial <= tol:
                break
            lam *= 0.5
        else:
            raise NewtonError(step_index, gnorm, it + 1)
        a, g, gnorm = trial, g_trial, n_trial
        it += 1
    if return_iters:
        return a, it
    return a


def simulate(model, dt, t_final=1.0, forcing=None, riesz=None, monitor=True):
    """Integrate from ``model.a0`` to ``t_final``.

    Parameters
    ----------
    forcing : ForcingSeries, optional
        Precomputed projected loads on this time grid.  Built on the fly
        when omitted.
    riesz : RieszMap, optional
        Needed for the stability monitor when ``forcing`` carries no dual
        norms; constructed from the basis space if absent.
    monitor : bool
        Accumulate the energy-bound terms.
    """
    n = step_count(dt, t_final)
    r = model.r
    forced = model.problem is not None and model.basis is not None
    if forced and forcing is None:
        if monitor and riesz is None:
            riesz = RieszMap(model.basis.space)
        forcing = precompute_forcing(model.basis, model.problem, dt, n, r,
                                     riesz if monitor else None)
    if forcing is not None:
        if forcing.projected.shape[0] != n or abs(forcing.dt - dt) > 1e-15 * dt:
            raise ValueError("forcing series does not match the time grid")
        if forcing.projected.shape[1] < r:
            raise ValueError("forcing series has fewer modes than the model")
        if monitor and forcing.dual_norm_sq is None:
            raise ValueError("stability monitor needs dual norms in the forcing series")

    states = np.empty((n + 1, r))
    states[0] = model.a0
    iters = np.zeros(n, dtype=int)
    lhs = rhs = 0.0
    zero = np.zeros(r)
    a = states[0]
    for k in range(n):
        F = forcing.projected[k, :r] if forcing is not None else zero
        a, iters[k] = step(model, a, (k + 1) * dt, dt, F=F, step_index=k + 1,
                           return_iters=True)
        states[k + 1] = a
        if monitor:
            lhs += model.nu * dt * float(a @ model.K @ a)
            if forcing is not None:
                rhs += dt / model.nu * forcing.dual_norm_sq[k]
    log.debug("simulated %d steps, mean Newton iterations %.2f", n, iters.mean())
    times = dt * np.arange(n + 1)
    return Trajectory(times, states, dt, iters, lhs, rhs, forcing is not None)


def stability_check(traj, model=None, nu=None, rtol=1e-8):
    """Both sides of the discrete energy bound and whether it holds.

    ``model`` and ``nu`` are accepted for interface symmetry; the
    accumulators in ``traj`` already carry the viscosity weighting.
    """
    a0, aM = traj.states[0], traj.states[-1]
    lhs = float(aM @ aM) + traj.stability_lhs
    rhs = float(a0 @ a0) + traj.stability_rhs
    return lhs, rhs, bool(lhs <= rhs * (1.0 + rtol))


def write_trajectory_csv(traj, path):
    r = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "time"] + [f"a_{j + 1}" for j in range(r)])
        for k, (t, a) in enumerate(zip(traj.times, traj.states)):
            w.writerow([k, f"{t:.17g}"] + [f"{x:.17g}" for x in a])
