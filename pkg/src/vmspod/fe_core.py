"""Quadratic (P2) vector Lagrange elements on a structured triangulation of
the unit square.

Degree-of-freedom layout
------------------------
Velocity coefficient vectors are *blocked by component*: entries
``[0, scalar_dofs)`` hold the x-component at every P2 node, entries
``[scalar_dofs, 2*scalar_dofs)`` hold the y-component.  P2 nodes form the
regular ``(2*n_div+1)**2`` lattice of spacing ``h/2`` and are numbered
row-major, ``node = J*(2*n_div+1) + I`` for the node at ``(I*h/2, J*h/2)``.

Sparse matrices are ``scipy.sparse.csr_matrix`` with sorted column indices
and summed duplicates.

All integrals use the 7-point degree-5 rule, which is exact for every form
assembled here (mass: degree 4, trilinear: degree 5).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Mesh",
    "FeSpace",
    "FeFunction",
    "quadrature_rule",
    "p2_shape",
    "build_mesh",
    "build_space",
    "l2_inner",
    "h1_semi_inner",
    "load_vector",
    "trilinear",
]

VectorField = Callable[[np.ndarray, np.ndarray, float], tuple]


def quadrature_rule():
    """Seven-point degree-5 rule on the reference triangle.

    Returns
    -------
    bary : (7, 3) ndarray
        Barycentric coordinates of the points.
    weights : (7,) ndarray
        Weights normalized to sum to one (multiply by the triangle area).
    """
    s15 = np.sqrt(15.0)
    a1 = (6.0 - s15) / 21.0
    b1 = (9.0 + 2.0 * s15) / 21.0
    a2 = (6.0 + s15) / 21.0
    b2 = (9.0 - 2.0 * s15) / 21.0
    w1 = (155.0 - s15) / 1200.0
    w2 = (155.0 + s15) / 1200.0
    bary = np.array([
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [b1, a1, a1], [a1, b1, a1], [a1, a1, b1],
        [b2, a2, a2], [a2, b2, a2], [a2, a2, b2],
    ])
    weights = np.array([9.0 / 40.0, w1, w1, w1, w2, w2, w2])
    return bary, weights


def p2_shape(bary):
    """Values and barycentric derivatives of the six P2 shape functions.

    Local ordering: vertices 0, 1, 2, then edge midpoints (0,1), (1,2), (2,0).

    Parameters
    ----------
    bary : (q, 3) ndarray

    Returns
    -------
    values : (q, 6) ndarray
    dlam : (q, 6, 3) ndarray
        Derivative of each shape function with respect to each barycentric
        coordinate, treated as independent variables.
    """
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    q = bary.shape[0]
    values = np.stack([
        l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
        4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0,
    ], axis=1)
    dlam = np.zeros((q, 6, 3))
    dlam[:, 0, 0] = 4 * l0 - 1
    dlam[:, 1, 1] = 4 * l1 - 1
    dlam[:, 2, 2] = 4 * l2 - 1
    dlam[:, 3, 0], dlam[:, 3, 1] = 4 * l1, 4 * l0
    dlam[:, 4, 1], dlam[:, 4, 2] = 4 * l2, 4 * l1
    dlam[:, 5, 2], dlam[:, 5, 0] = 4 * l0, 4 * l2
    return values, dlam


@dataclass(frozen=True)
class Mesh:
    """Structured triangulation of the unit square, two triangles per cell.

    Each cell is split along its (lower-left, upper-right) diagonal.
    """

    n_div: int
    vertices: np.ndarray
    triangles: np.ndarray

    @property
    def h(self):
        return 1.0 / self.n_div

    def signed_areas(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def build_mesh(n_div):
    if int(n_div) != n_div or n_div < 1:
        raise ValueError(f"n_div must be a positive integer, got {n_div!r}")
    n = int(n_div)
    t = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(t, t)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper
    return Mesh(n, vertices, triangles)


@dataclass(eq=False)
class FeSpace:
    """Vector-valued P2 space with assembled mass and stiffness matrices.

    Besides the global matrices, the space keeps sparse *evaluation
    operators* mapping scalar nodal coefficients to values (``eval_val``) and
    physical derivatives (``eval_dx``, ``eval_dy``) at every quadrature
    point, ordered triangle-major.  ``qweights`` holds the matching physical
    quadrature weights.
    """

    mesh: Mesh
    scalar_dofs: int
    dof_coords: np.ndarray
    cell_dofs: np.ndarray
    qpoints: np.ndarray
    qweights: np.ndarray
    eval_val: sp.csr_matrix
    eval_dx: sp.csr_matrix
    eval_dy: sp.csr_matrix
    scalar_mass: sp.csr_matrix
    scalar_stiffness: sp.csr_matrix
    mass: sp.csr_matrix = field(repr=False)
    stiffness: sp.csr_matrix = field(repr=False)

    @property
    def n_dof(self):
        return 2 * self.scalar_dofs

    @property
    def h(self):
        return self.mesh.h

    @property
    def n_qp(self):
        return self.qweights.size

    def interpolate(self, func, t=0.0):
        """Nodal interpolant of ``func(x, y, t) -> (u, v)``."""
        x, y = self.dof_coords[:, 0], self.dof_coords[:, 1]
        u, v = func(x, y, t)
        coeffs = np.empty(self.n_dof)
        coeffs[: self.scalar_dofs] = u
        coeffs[self.scalar_dofs:] = v
        return FeFunction(self, coeffs)

    def zero(self):
        return FeFunction(self, np.zeros(self.n_dof))

    def split(self, coeffs):
        """View a blocked coefficient array (n_dof, ...) as its two components."""
        return coeffs[: self.scalar_dofs], coeffs[self.scalar_dofs:]

    def values_at_qp(self, coeffs):
        """Velocity values at quadrature points, shape (n_qp, 2, ...)."""
        cx, cy = self.split(coeffs)
        return np.stack([self.eval_val @ cx, self.eval_val @ cy], axis=1)

    def gradients_at_qp(self, coeffs):
        """Velocity gradients ``g[q, a, b] = d u_b / d x_a``, shape (n_qp, 2, 2, ...)."""
        cx, cy = self.split(coeffs)
        gx = np.stack([self.eval_dx @ cx, self.eval_dx @ cy], axis=1)
        gy = np.stack([self.eval_dy @ cx, self.eval_dy @ cy], axis=1)
        return np.stack([gx, gy], axis=1)

    def integrate(self, g):
        """Quadrature of a scalar field ``g(x, y)`` over the unit square."""
        return float(self.qweights @ g(self.qpoints[:, 0], self.qpoints[:, 1]))


@dataclass
class FeFunction:
    """A velocity field in ``space``, coefficients in blocked layout."""

    space: FeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.n_dof,):
            raise ValueError(
                f"coefficient vector has shape {self.coeffs.shape}, "
                f"expected ({self.space.n_dof},)")


def _p2_dofs(mesh):
    """Global P2 node indices (n_tri, 6) and node coordinates."""
    n = mesh.n_div
    stride = 2 * n + 1
    # vertex (i, j) of the coarse grid sits at lattice node (2i, 2j)
    vi = mesh.triangles % (n + 1)
    vj = mesh.triangles // (n + 1)
    I = 2 * vi
    J = 2 * vj
    pairs = ((0, 1), (1, 2), (2, 0))
    I_all = np.concatenate([I] + [(I[:, [a]] + I[:, [b]]) // 2 for a, b in pairs], axis=1)
    J_all = np.concatenate([J] + [(J[:, [a]] + J[:, [b]]) // 2 for a, b in pairs], axis=1)
    cell_dofs = J_all * stride + I_all
    s = np.linspace(0.0, 1.0, stride)
    X, Y = np.meshgrid(s, s)
    coords = np.column_stack([X.ravel(), Y.ravel()])
    return cell_dofs, coords


def build_space(n_div):
    """Assemble the vector P2 space on an ``n_div x n_div`` structured mesh.

    Parameters
    ----------
    n_div : int
        Cells per side, ``h = 1/n_div``.  Must be at least 2.
    """
    if int(n_div) != n_div or n_div < 2:
        raise ValueError(f"n_div must be an integer >= 2, got {n_div!r}")
    mesh = build_mesh(int(n_div))
    cell_dofs, coords = _p2_dofs(mesh)
    n_tri = mesh.triangles.shape[0]
    ns = coords.shape[0]

    bary, wref = quadrature_rule()
    nq = wref.size
    phi, dlam = p2_shape(bary)

    p = mesh.vertices[mesh.triangles]                  # (n_tri, 3, 2)
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns = edges
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    if np.any(det <= 0):
        raise RuntimeError("mesh contains non-positively oriented triangles")
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1] / det
    inv[:, 1, 1] = jac[:, 0, 0] / det
    inv[:, 0, 1] = -jac[:, 0, 1] / det
    inv[:, 1, 0] = -jac[:, 1, 0] / det

    # reference gradient w.r.t. (xi, eta) with l0 = 1 - xi - eta
    dref = np.stack([dlam[..., 1] - dlam[..., 0], dlam[..., 2] - dlam[..., 0]], axis=-1)
    # d/dx_k = sum_a d/dxi_a (J^{-1})_{ak}
    grad = np.einsum("tak,qia->tqik", inv, dref)       # (n_tri, nq, 6, 2)

    qpoints = np.einsum("qk,tkd->tqd", bary, p).reshape(-1, 2)
    qweights = (0.5 * det[:, None] * wref[None, :]).ravel()

    rows = np.repeat(np.arange(n_tri * nq), 6)
    cols = np.repeat(cell_dofs[:, None, :], nq, axis=1).ravel()
    shape = (n_tri * nq, ns)
    eval_val = sp.csr_matrix((np.tile(phi.ravel(), n_tri), (rows, cols)), shape=shape)
    eval_dx = sp.csr_matrix((grad[..., 0].ravel(), (rows, cols)), shape=shape)
    eval_dy = sp.csr_matrix((grad[..., 1].ravel(), (rows, cols)), shape=shape)
    for m in (eval_val, eval_dx, eval_dy):
        m.sum_duplicates()
        m.sort_indices()

    W = sp.diags(qweights)
    ms = _symmetric(eval_val.T @ W @ eval_val)
    ks = _symmetric(eval_dx.T @ W @ eval_dx + eval_dy.T @ W @ eval_dy)
    mass = sp.block_diag([ms, ms], format="csr")
    stiffness = sp.block_diag([ks, ks], format="csr")
    for m in (mass, stiffness):
        m.sort_indices()

    return FeSpace(
        mesh=mesh, scalar_dofs=ns, dof_coords=coords, cell_dofs=cell_dofs,
        qpoints=qpoints, qweights=qweights,
        eval_val=eval_val, eval_dx=eval_dx, eval_dy=eval_dy,
        scalar_mass=ms, scalar_stiffness=ks, mass=mass, stiffness=stiffness,
    )


def _symmetric(a):
    a = sp.csr_matrix(0.5 * (a + a.T))
    a.sum_duplicates()
    a.sort_indices()
    return a


def _check_pair(u, v):
    if u.space is not v.space:
        raise ValueError("functions belong to different spaces")
    if u.coeffs.shape != v.coeffs.shape:
        raise ValueError(f"dimension mismatch: {u.coeffs.shape} vs {v.coeffs.shape}")


def l2_inner(u, v):
    """``(u, v)`` in L2, i.e. ``u^T M v``."""
    _check_pair(u, v)
    return float(u.coeffs @ (u.space.mass @ v.coeffs))


def h1_semi_inner(u, v):
    """``(grad u, grad v)``, i.e. ``u^T K v``."""
    _check_pair(u, v)
    return float(u.coeffs @ (u.space.stiffness @ v.coeffs))


def load_vector(space, f, t):
    """Entries ``int f(., t) . N_i`` for every vector basis function ``N_i``.

    ``f(x, y, t)`` must accept arrays and return the pair ``(f_x, f_y)``.
    """
    x, y = space.qpoints[:, 0], space.qpoints[:, 1]
    fx, fy = f(x, y, t)
    wx = space.qweights * np.broadcast_to(fx, x.shape)
    wy = space.qweights * np.broadcast_to(fy, x.shape)
    return np.concatenate([space.eval_val.T @ wx, space.eval_val.T @ wy])


def convection_at_qp(space, u_coeffs, v_coeffs, w_coeffs):
    """``int ((u . grad) v) . w`` evaluated by quadrature."""
    uq = space.values_at_qp(u_coeffs)
    gv = space.gradients_at_qp(v_coeffs)
    wq = space.values_at_qp(w_coeffs)
    integrand = np.einsum("qa,qab,qb->q", uq, gv, wq)
    return float(space.qweights @ integrand)


def trilinear(u, v, w):
    """Skew-symmetrized convection ``1/2 [((u.grad)v, w) - ((u.grad)w, v)]``."""
    _check_pair(u, v)
    _check_pair(u, w)
    s = u.space
    return 0.5 * (convection_at_qp(s, u.coeffs, v.coeffs, w.coeffs)
                  - convection_at_qp(s, u.coeffs, w.coeffs, v.coeffs))
