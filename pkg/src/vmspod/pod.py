"""Proper orthogonal decomposition by the method of snapshots.

The snapshot correlation matrix carries the ``1/(M+1)`` averaging factor,
and modes are scaled to be exactly L2-orthonormal:
``phi_j = U z_j / sqrt((M+1) lambda_j)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fe_core import FeFunction, FeSpace

__all__ = [
    "PodBasis",
    "EigensolverError",
    "correlation_matrix",
    "sym_eig_descending",
    "build_basis",
    "pod",
    "projection_coefficients",
    "l2_truncation_check",
    "h1_truncation_check",
    "h1_gram",
    "inverse_estimate_constant",
    "inverse_estimate_check",
]

log = logging.getLogger(__name__)


class EigensolverError(RuntimeError):
    pass


@dataclass
class PodBasis:
    """L2-orthonormal POD modes, eigenvalue-descending.

    Attributes
    ----------
    modes : (n_dof, d) ndarray
        FE coefficients of the modes (blocked component layout).
    eigenvalues : (d,) ndarray
        Retained correlation eigenvalues, ``lambda_1 >= ... >= lambda_d``.
    h1_norms_sq : (d,) ndarray
        Full H1 norm squared of each mode, L2 part plus gradient part.
    all_eigenvalues : ndarray
        The whole correlation spectrum, including the discarded part.
    """

    space: FeSpace
    modes: np.ndarray
    eigenvalues: np.ndarray
    h1_norms_sq: np.ndarray
    all_eigenvalues: np.ndarray | None = None

    @property
    def d(self):
        return self.modes.shape[1]

    def mode(self, j):
        return FeFunction(self.space, self.modes[:, j])

    def truncate(self, r):
        if not 0 <= r <= self.d:
            raise ValueError(f"r={r} outside [0, {self.d}]")
        return self.modes[:, :r]

    def h1_tail(self, r):
        """``sum_{j>r} ||phi_j||_1^2 lambda_j`` over retained modes."""
        return float(np.sum(self.h1_norms_sq[r:] * self.eigenvalues[r:]))

    def l2_tail(self, r):
        return float(np.sum(self.eigenvalues[r:]))


def correlation_matrix(snapshots):
    """``K = U^T M U / (M+1)`` with the FE mass matrix as inner product."""
    U = snapshots.coeff_matrix
    K = U.T @ (snapshots.space.mass @ U) / U.shape[1]
    return 0.5 * (K + K.T)


def _off_norm(A):
    off = A - np.diag(np.diag(A))
    return np.linalg.norm(off)


def sym_eig_descending(K, tol=1e-13, max_sweeps=50):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    K : (n, n) array_like
        Symmetric matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``tol * ||K||_F``.
    max_sweeps : int

    Returns
    -------
    eigenvalues : (n,) ndarray, descending
    eigenvectors : (n, n) ndarray, columns orthonormal

    Raises
    ------
    EigensolverError
        If the tolerance is not met within ``max_sweeps`` sweeps.
    """
    A = np.array(K, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(np.abs(A).max(), 1e-300)):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    target = tol * scale

    sweep = 0
    while _off_norm(A) > target:
        if sweep == max_sweeps:
            raise EigensolverError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {_off_norm(A):.3e}, target {target:.3e})")
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q]
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                A[p, :] = A[:, p]
                A[q, :] = A[:, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    log.debug("Jacobi converged in %d sweeps", sweep)

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _m_orthonormalize(modes, mass):
    """Classical Gram-Schmidt, two passes, in the mass inner product.

    Columns are processed in order, so leading (well-conditioned) modes move
    only at roundoff level while trailing modes are cleaned of the
    cross-talk that the squared conditioning of the correlation matrix
    introduces.
    """
    Q = np.array(modes, dtype=float, copy=True)
    MQ = np.asarray(mass @ Q)
    for j in range(Q.shape[1]):
        v = Q[:, j]
        for _ in range(2):
            c = MQ[:, :j].T @ v
            v = v - Q[:, :j] @ c
        Mv = mass @ v
        nrm = np.sqrt(v @ Mv)
        Q[:, j] = v / nrm
        MQ[:, j] = Mv / nrm
    return Q


def build_basis(snapshots, eig=None, rank_tol=1e-14):
    """Assemble L2-orthonormal POD modes from the correlation eigenpairs.

    Modes with ``lambda_j < rank_tol * lambda_1`` are dropped; their number
    defines the numerical rank ``d``.  Modes from ``phi_j = U z_j /
    sqrt((M+1) lambda_j)`` are re-orthonormalized in L2 and the retained
    eigenvalues are recomputed as Rayleigh quotients
    ``lambda_j = sum_l (u_l, phi_j)^2 / (M+1)``; forming the correlation
    matrix squares the snapshot conditioning, so the smallest eigenpairs
    would otherwise be accurate only to ``eps * lambda_1`` in absolute terms.
    Each mode's sign is chosen so that its largest-magnitude coefficient is
    positive.
    """
    if eig is None:
        eig = sym_eig_descending(correlation_matrix(snapshots))
    lam, Z = eig
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0 or not lam[0] > 0:
        raise ValueError("all correlation eigenvalues are nonpositive; snapshots are zero")
    d = int(np.sum(lam >= rank_tol * lam[0]))
    if d == 0:
        raise ValueError("no eigenvalue above the rank threshold")
    U = snapshots.coeff_matrix
    n_snap = U.shape[1]
    space = snapshots.space
    modes = (U @ Z[:, :d]) / np.sqrt(n_snap * lam[:d])
    modes = _m_orthonormalize(modes, space.mass)
    idx = np.argmax(np.abs(modes), axis=0)
    modes *= np.sign(modes[idx, np.arange(d)])
    coef = modes.T @ (space.mass @ U)
    ritz = np.sum(coef * coef, axis=1) / n_snap
    h1 = np.einsum("ij,ij->j", modes, space.mass @ modes) + \
        np.einsum("ij,ij->j", modes, space.stiffness @ modes)
    return PodBasis(space, modes, ritz, h1, lam.copy())


def pod(snapshots, rank_tol=1e-14):
    """Correlation matrix, Jacobi eigensolve and mode assembly in one call."""
    return build_basis(snapshots, sym_eig_descending(correlation_matrix(snapshots)), rank_tol)


def projection_coefficients(basis, coeffs):
    """L2 coefficients ``(u, phi_j)`` of one field or a column stack of fields."""
    return basis.modes.T @ (basis.space.mass @ coeffs)


def _truncation_error(snapshots, basis, r, norm_matrix):
    U = snapshots.coeff_matrix
    Phi = basis.truncate(r)
    C = Phi.T @ (basis.space.mass @ U)
    E = U - Phi @ C
    return float(np.sum(E * (norm_matrix @ E)) / U.shape[1])


def l2_truncation_check(snapshots, basis, r):
    """Both sides of the POD error identity in L2.

    Returns
    -------
    direct_error : float
        Mean squared L2 distance between each snapshot and its projection
        onto the first ``r`` modes.
    eigen_tail : float
        ``sum_{j>r} lambda_j``.
    """
    direct = _truncation_error(snapshots, basis, r, basis.space.mass)
    return direct, basis.l2_tail(r)


def h1_truncation_check(snapshots, basis, r):
    """Both sides of the POD error identity in the full H1 norm.

    The projection is still the L2 one; the tail is weighted by
    ``||phi_j||_1^2``.
    """
    s = basis.space
    direct = _truncation_error(snapshots, basis, r, s.mass + s.stiffness)
    return direct, basis.h1_tail(r)


def h1_gram(basis, r):
    """Reduced mass and full-H1 Gram matrices ``(M_r, S_r)``."""
    Phi = basis.truncate(r)
    s = basis.space
    Mr = Phi.T @ (s.mass @ Phi)
    Sr = Mr + Phi.T @ (s.stiffness @ Phi)
    return 0.5 * (Mr + Mr.T), 0.5 * (Sr + Sr.T)


def inverse_estimate_constant(basis, r):
    """``sqrt(||S_r||_2 ||M_r^{-1}||_2)`` bounding H1 by L2 norms on span{phi_1..phi_r}."""
    Mr, Sr = h1_gram(basis, r)
    s_max = np.linalg.eigvalsh(Sr)[-1]
    m_min = np.linalg.eigvalsh(Mr)[0]
    return float(np.sqrt(s_max / m_min))


def inverse_estimate_check(basis, r, v_coeffs, rtol=1e-12):
    """True iff ``||v||_H1 <= C ||v||_L2`` for ``v = sum_j v_j phi_j``."""
    v_coeffs = np.asarray(v_coeffs, dtype=float)
    if v_coeffs.shape != (r,):
        raise ValueError(f"expected {r} reduced coefficients, got shape {v_coeffs.shape}")
    Mr, Sr = h1_gram(basis, r)
    h1 = np.sqrt(v_coeffs @ Sr @ v_coeffs)
    l2 = np.sqrt(v_coeffs @ Mr @ v_coeffs)
    return bool(h1 <= inverse_estimate_constant(basis, r) * l2 * (1.0 + rtol))
