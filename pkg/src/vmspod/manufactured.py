"""Moving-front exact solution on the unit square and its snapshot sampling.

The velocity is ``u = g(y - t) sin(pi y)``, ``v = g(x - t) sin(pi x)`` with
``g(z) = (2/pi) arctan(-s z)`` and pressure ``p = 0``.  The forcing
``f = u_t - nu Lap u + (u . grad) u`` is hard-coded below; since ``u`` does
not depend on ``x`` and ``v`` does not depend on ``y`` the field is
solenoidal and the convective term reduces to ``(v u_y, u v_x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fe_core import FeSpace

__all__ = ["ManufacturedProblem", "SnapshotSet", "generate_snapshots"]


@dataclass(frozen=True)
class ManufacturedProblem:
    nu: float = 1e-3
    steepness: float = 500.0
    t_final: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.steepness >= 0:
            raise ValueError(f"steepness must be nonnegative, got {self.steepness}")

    # profile g and its first two derivatives
    def _g(self, z):
        s = self.steepness
        g = (2.0 / np.pi) * np.arctan(-s * z)
        q = 1.0 + (s * z) ** 2
        g1 = (2.0 / np.pi) * (-s) / q
        g2 = (2.0 / np.pi) * 2.0 * s ** 3 * z / q ** 2
        return g, g1, g2

    def exact_velocity(self, x, y, t):
        """Pointwise ``(u, v)``; broadcasts over array arguments."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s = self.steepness
        u = (2.0 / np.pi) * np.arctan(-s * (y - t)) * np.sin(np.pi * y)
        v = (2.0 / np.pi) * np.arctan(-s * (x - t)) * np.sin(np.pi * x)
        return u, v

    def exact_forcing(self, x, y, t):
        """Pointwise ``(f_x, f_y)`` matching :meth:`exact_velocity`."""
        ut, u, uy, uyy = self._jet(np.asarray(y, dtype=float), t)
        vt, v, vx, vxx = self._jet(np.asarray(x, dtype=float), t)
        fx = ut - self.nu * uyy + v * uy
        fy = vt - self.nu * vxx + u * vx
        return fx, fy

    def _jet(self, z, t):
        """``w = g(z - t) sin(pi z)`` with ``w_t``, ``w_z`` and ``w_zz``."""
        g, g1, g2 = self._g(z - t)
        sz = np.sin(np.pi * z)
        cz = np.cos(np.pi * z)
        wt = -g1 * sz
        w = g * sz
        wz = g1 * sz + np.pi * g * cz
        wzz = g2 * sz + 2.0 * np.pi * g1 * cz - np.pi ** 2 * w
        return wt, w, wz, wzz


@dataclass
class SnapshotSet:
    """Velocity snapshots ``U[:, i]`` sampled at ``t_i = i * dT``."""

    space: FeSpace
    coeff_matrix: np.ndarray
    dT: float
    nu: float

    def __post_init__(self):
        self.coeff_matrix = np.asarray(self.coeff_matrix, dtype=float)
        if self.coeff_matrix.ndim != 2 or self.coeff_matrix.shape[0] != self.space.n_dof:
            raise ValueError(
                f"snapshot matrix must be ({self.space.n_dof}, M+1), "
                f"got {self.coeff_matrix.shape}")
        if self.coeff_matrix.shape[1] == 0:
            raise ValueError("empty snapshot set")

    @property
    def n_snapshots(self):
        return self.coeff_matrix.shape[1]

    @property
    def M(self):
        return self.n_snapshots - 1

    @property
    def sample_times(self):
        return self.dT * np.arange(self.n_snapshots)


def generate_snapshots(space, problem, dT=1e-2, M=100):
    """Nodal interpolants of the exact velocity at ``t_i = i*dT``, i = 0..M."""
    if M < 0 or int(M) != M:
        raise ValueError(f"M must be a nonnegative integer, got {M!r}")
    if not dT > 0:
        raise ValueError(f"dT must be positive, got {dT}")
    if dT * M > problem.t_final * (1 + 1e-12):
        raise ValueError(f"dT*M = {dT * M} exceeds the time horizon {problem.t_final}")
    M = int(M)
    U = np.empty((space.n_dof, M + 1))
    for i in range(M + 1):
        U[:, i] = space.interpolate(problem.exact_velocity, i * dT).coeffs
    return SnapshotSet(space, U, dT, problem.nu)
