"""Reduced operators for the POD Galerkin model and its eddy-viscosity closures.

With L2-orthonormal modes the reduced mass matrix is the identity, so a
reduced model is fully described by

* ``K_r[i, j] = (grad phi_j, grad phi_i)``,
* ``T[i, j, l] = b*(phi_i, phi_j, phi_l)`` (test function in the last slot),
* ``D_R[i, j] = (P'_R grad phi_j, P'_R grad phi_i)``, where ``P_R`` is the
  L2 projection of velocity-gradient tensors onto
  ``span{grad phi_1, ..., grad phi_R}`` and ``P'_R = I - P_R``.

Because the range of ``P_R`` is spanned by mode gradients, ``D_R`` is the
Schur complement of the leading ``R x R`` block of ``K_r``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fe_core import FeFunction, load_vector

__all__ = [
    "Variant",
    "ClosureConfig",
    "ReducedModel",
    "SingularProjectorError",
    "reduce_gram",
    "mode_fields_at_qp",
    "reduce_trilinear",
    "vms_matrix",
    "closure_matrix",
    "initial_condition",
    "project_forcing",
    "build_model",
]


class Variant(enum.Enum):
    GALERKIN = "GALERKIN"
    MIXING_LENGTH = "MIXING_LENGTH"
    VMS = "VMS"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(
                f"unknown variant {value!r}; expected one of "
                f"{', '.join(v.name for v in cls)}") from None


class SingularProjectorError(ValueError):
    """The leading Gram block of the mode gradients is numerically singular."""

    def __init__(self, R, cond):
        super().__init__(
            f"gradient Gram block for cutoff R={R} is numerically singular "
            f"(condition estimate {cond:.3e})")
        self.R = R
        self.cond = cond


@dataclass(frozen=True)
class ClosureConfig:
    variant: Variant = Variant.VMS
    alpha: float = 1e-3
    R: int = 95

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.R < 0 or int(self.R) != self.R:
            raise ValueError(f"R must be a nonnegative integer, got {self.R!r}")

    @property
    def effective_alpha(self):
        return 0.0 if self.variant is Variant.GALERKIN else self.alpha

    @property
    def effective_R(self):
        return 0 if self.variant is Variant.MIXING_LENGTH else self.R


@dataclass
class ReducedModel:
    """Assembled reduced system for ``r`` retained modes.

    ``forcing(t)`` returns the projected load ``(f(., t), phi_j)``; it
    assembles a fresh FE load vector each call.
    """

    r: int
    nu: float
    K: np.ndarray
    T: np.ndarray
    D: np.ndarray
    a0: np.ndarray
    closure: ClosureConfig
    basis: object = None
    problem: object = None

    def __post_init__(self):
        # contiguous unfoldings used by the nonlinear term and its Jacobian
        r = self.r
        self._T_i = np.ascontiguousarray(self.T.reshape(r, r * r))
        self._T_j = np.ascontiguousarray(self.T.transpose(1, 0, 2).reshape(r, r * r))

    @property
    def alpha(self):
        return self.closure.effective_alpha

    @property
    def linear_operator(self):
        """``nu K_r + alpha D_R``."""
        return self.nu * self.K + self.alpha * self.D

    def convection(self, a):
        """``N(a)_l = sum_ij a_i a_j T[i, j, l]``."""
        W = (a @ self._T_i).reshape(self.r, self.r)
        return a @ W

    def convection_jacobian(self, a):
        """``dN/da`` with ``[l, m] = sum_j a_j (T[m, j, l] + T[j, m, l])``."""
        r = self.r
        W = (a @ self._T_i).reshape(r, r)       # W[j, l] = sum_i a_i T[i, j, l]
        P = (a @ self._T_j).reshape(r, r)       # P[m, l] = sum_j a_j T[m, j, l]
        return (W + P).T

    def forcing(self, t):
        if self.problem is None or self.basis is None:
            return np.zeros(self.r)
        return project_forcing(self.basis, self.r, self.problem.exact_forcing, t)

    def with_closure(self, closure, D=None):
        """Same operators under a different closure; ``D`` is rebuilt if omitted."""
        if D is None:
            D = closure_matrix(self.K, closure)
        return ReducedModel(self.r, self.nu, self.K, self.T, D, self.a0, closure,
                            self.basis, self.problem)


def reduce_gram(basis, r):
    """``K_r[i, j] = (grad phi_j, grad phi_i)``."""
    Phi = basis.truncate(r)
    K = Phi.T @ (basis.space.stiffness @ Phi)
    return 0.5 * (K + K.T)


def mode_fields_at_qp(basis, r):
    """Mode values ``(n_qp, 2, r)`` and gradients ``(n_qp, 2, 2, r)`` at quadrature points.

    Gradient layout follows :meth:`FeSpace.gradients_at_qp`:
    ``G[q, a, b, j] = d (phi_j)_b / d x_a``.
    """
    s = basis.space
    Phi = basis.truncate(r)
    return s.values_at_qp(Phi), s.gradients_at_qp(Phi)


def reduce_trilinear(basis, r, chunk=1024):
    """Dense tensor ``T[i, j, l] = b*(phi_i, phi_j, phi_l)``.

    The convective integral ``C[i, j, l] = ((phi_i . grad) phi_j, phi_l)``
    is accumulated over blocks of quadrature points and then antisymmetrized
    in its last two indices, so ``T[i, j, j] = 0`` holds exactly.
    """
    V, G = mode_fields_at_qp(basis, r)
    w = basis.space.qweights
    C = np.zeros((r, r, r))
    for start in range(0, w.size, chunk):
        sl = slice(start, start + chunk)
        v, g = V[sl], G[sl]
        # Y[q, b, i, j] = sum_a v[q, a, i] g[q, a, b, j]
        Y = (v[:, 0, None, :, None] * g[:, 0, :, None, :]
             + v[:, 1, None, :, None] * g[:, 1, :, None, :])
        wv = v * w[sl, None, None]
        C += np.tensordot(Y, wv, axes=([0, 1], [0, 1]))
    return 0.5 * (C - C.transpose(0, 2, 1))


def vms_matrix(K_full, R, cond_max=1e14):
    """Gram matrix of ``P'_R grad phi_j`` for ``j = 1..r``.

    ``D_R = K - B G^{-1} B^T`` with ``G = K[:R, :R]``, ``B = K[:, :R]``.
    The first ``R`` rows and columns vanish identically, so only the
    trailing Schur block is computed.

    Raises
    ------
    SingularProjectorError
        When ``cond(G)`` exceeds ``cond_max``.
    """
    K_full = np.asarray(K_full, dtype=float)
    r = K_full.shape[0]
    if not 0 <= R <= r:
        raise ValueError(f"cutoff R={R} outside [0, {r}]")
    D = np.zeros_like(K_full)
    if R == 0:
        D[:] = K_full
        return D
    if R == r:
        return D
    G = K_full[:R, :R]
    ev = np.linalg.eigvalsh(G)
    cond = np.inf if ev[0] <= 0 else ev[-1] / ev[0]
    if not cond <= cond_max:
        raise SingularProjectorError(R, cond)
    B = K_full[:R, R:]
    S = K_full[R:, R:] - B.T @ sla.cho_solve(sla.cho_factor(G), B)
    D[R:, R:] = 0.5 * (S + S.T)
    return D


def closure_matrix(K, closure):
    """Dissipation matrix of a closure; Galerkin has none, whatever its ``R``."""
    if closure.variant is Variant.GALERKIN:
        return np.zeros_like(K)
    if closure.effective_R > K.shape[0]:
        raise ValueError(f"cutoff R={closure.R} exceeds r={K.shape[0]}")
    return vms_matrix(K, closure.effective_R)


def initial_condition(basis, r, u0):
    """Coefficients of the L2 projection of ``u0`` onto the first ``r`` modes."""
    c = u0.coeffs if isinstance(u0, FeFunction) else np.asarray(u0, dtype=float)
    return basis.truncate(r).T @ (basis.space.mass @ c)


def project_forcing(basis, r, f, t):
    """``(f(., t), phi_j)`` for ``j = 1..r``."""
    return basis.truncate(r).T @ load_vector(basis.space, f, t)


def build_model(basis, r, problem, closure=None, u0=None, T=None):
    """Assemble the reduced model with ``r`` modes.

    Parameters
    ----------
    basis : PodBasis
    r : int
    problem : ManufacturedProblem
        Supplies ``nu``, the forcing, and the default initial condition
        (exact velocity at ``t = 0``).
    closure : ClosureConfig, optional
    u0 : FeFunction, optional
    T : ndarray, optional
        Precomputed trilinear tensor, reused across sweeps.
    """
    if not 1 <= r <= basis.d:
        raise ValueError(f"r={r} outside [1, {basis.d}]")
    closure = closure or ClosureConfig()
    K = reduce_gram(basis, r)
    D = closure_matrix(K, closure)
    if T is None:
        T = reduce_trilinear(basis, r)
    if u0 is None:
        u0 = basis.space.interpolate(problem.exact_velocity, 0.0)
    a0 = initial_condition(basis, r, u0)
    return ReducedModel(r, problem.nu, K, T, D, a0, closure, basis, problem)
