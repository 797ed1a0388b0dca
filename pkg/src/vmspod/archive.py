"""Binary archives for snapshots, POD bases and reduced models.

All numbers are little-endian.  Layouts (after the 8-byte magic):

``PODSNAP1``  u64 n_div, u64 n_dof, u64 n_snap; f64 dT, f64 nu;
              f64[n_dof * n_snap] snapshot matrix, column-major.

``PODBAS01``  u64 n_div, u64 n_dof, u64 d; f64 dT, f64 nu;
              f64[n_dof * d] modes, column-major; f64[d] eigenvalues;
              u64 n_all; f64[n_all] full correlation spectrum.

``PODROM01``  u64 r, u64 R, u64 variant (0 Galerkin, 1 mixing length, 2 VMS);
              f64 alpha, f64 nu;
              f64[r*r] K_r, f64[r*r*r] T, f64[r*r] D_R (all C order); f64[r] a0.
"""

from __future__ import annotations

import struct

import numpy as np

from .fe_core import build_space
from .manufactured import SnapshotSet
from .pod import PodBasis
from .rom import ClosureConfig, ReducedModel, Variant

__all__ = [
    "ArchiveError",
    "write_snapshots",
    "read_snapshots",
    "write_basis",
    "read_basis",
    "write_model",
    "read_model",
]

SNAP_MAGIC = b"PODSNAP1"
BASIS_MAGIC = b"PODBAS01"
ROM_MAGIC = b"PODROM01"
_HEAD = struct.Struct("<8sQQQdd")
_U64 = struct.Struct("<Q")
_VARIANTS = [Variant.GALERKIN, Variant.MIXING_LENGTH, Variant.VMS]


class ArchiveError(IOError):
    pass


def _f64(a):
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _read_header(buf, magic, path):
    if len(buf) < _HEAD.size:
        raise ArchiveError(f"{path}: truncated header")
    tag, a, b, c, x, y = _HEAD.unpack_from(buf)
    if tag != magic:
        raise ArchiveError(f"{path}: bad magic {tag!r}, expected {magic!r}")
    return a, b, c, x, y


def _take(buf, offset, count, path):
    end = offset + 8 * count
    if end > len(buf):
        raise ArchiveError(f"{path}: truncated data block")
    return np.frombuffer(buf, dtype="<f8", count=count, offset=offset).astype(float), end


def write_snapshots(path, snaps):
    U = snaps.coeff_matrix
    head = _HEAD.pack(SNAP_MAGIC, snaps.space.mesh.n_div, U.shape[0], U.shape[1],
                      snaps.dT, snaps.nu)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(_f64(U.T))


def read_snapshots(path, space=None):
    with open(path, "rb") as fh:
        buf = fh.read()
    n_div, n_dof, n_snap, dT, nu = _read_header(buf, SNAP_MAGIC, path)
    space = space or _space_for(n_div, n_dof, path)
    if n_snap == 0 or space.n_dof != n_dof:
        raise ArchiveError(f"{path}: inconsistent dimensions n_dof={n_dof}, n_snap={n_snap}")
    data, end = _take(buf, _HEAD.size, n_dof * n_snap, path)
    if end != len(buf):
        raise ArchiveError(f"{path}: {len(buf) - end} trailing bytes")
    return SnapshotSet(space, data.reshape(n_snap, n_dof).T.copy(), dT, nu)


def _space_for(n_div, n_dof, path):
    if n_div < 2 or n_dof != 2 * (2 * n_div + 1) ** 2:
        raise ArchiveError(f"{path}: n_dof={n_dof} does not match n_div={n_div}")
    return build_space(int(n_div))


def write_basis(path, basis, dT=0.0, nu=0.0):
    d = basis.d
    all_ev = basis.all_eigenvalues if basis.all_eigenvalues is not None else basis.eigenvalues
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(BASIS_MAGIC, basis.space.mesh.n_div, basis.modes.shape[0], d, dT, nu))
        fh.write(_f64(basis.modes.T))
        fh.write(_f64(basis.eigenvalues))
        fh.write(_U64.pack(len(all_ev)))
        fh.write(_f64(all_ev))


def read_basis(path, space=None):
    """Load a basis; H1 norms are recomputed from the rebuilt FE space."""
    with open(path, "rb") as fh:
        buf = fh.read()
    n_div, n_dof, d, _, _ = _read_header(buf, BASIS_MAGIC, path)
    space = space or _space_for(n_div, n_dof, path)
    if d == 0 or space.n_dof != n_dof:
        raise ArchiveError(f"{path}: inconsistent dimensions n_dof={n_dof}, d={d}")
    modes, off = _take(buf, _HEAD.size, n_dof * d, path)
    lam, off = _take(buf, off, d, path)
    if off + 8 > len(buf):
        raise ArchiveError(f"{path}: truncated spectrum block")
    (n_all,) = _U64.unpack_from(buf, off)
    all_ev, off = _take(buf, off + 8, n_all, path)
    if off != len(buf):
        raise ArchiveError(f"{path}: {len(buf) - off} trailing bytes")
    modes = modes.reshape(d, n_dof).T.copy()
    h1 = np.einsum("ij,ij->j", modes, space.mass @ modes) + \
        np.einsum("ij,ij->j", modes, space.stiffness @ modes)
    return PodBasis(space, modes, lam, h1, all_ev)


def write_model(path, model):
    c = model.closure
    r = model.r
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(ROM_MAGIC, r, c.R, _VARIANTS.index(c.variant), c.alpha, model.nu))
        for block in (model.K, model.T, model.D, model.a0):
            fh.write(_f64(block))


def read_model(path, basis=None, problem=None):
    with open(path, "rb") as fh:
        buf = fh.read()
    r, R, code, alpha, nu = _read_header(buf, ROM_MAGIC, path)
    if code >= len(_VARIANTS) or (R > r and _VARIANTS[code] is not Variant.GALERKIN):
        raise ArchiveError(f"{path}: invalid closure fields (variant={code}, R={R}, r={r})")
    off = _HEAD.size
    K, off = _take(buf, off, r * r, path)
    T, off = _take(buf, off, r ** 3, path)
    D, off = _take(buf, off, r * r, path)
    a0, off = _take(buf, off, r, path)
    if off != len(buf):
        raise ArchiveError(f"{path}: {len(buf) - off} trailing bytes")
    closure = ClosureConfig(_VARIANTS[code], alpha, int(R))
    return ReducedModel(int(r), nu, K.reshape(r, r), T.reshape(r, r, r), D.reshape(r, r),
                        a0, closure, basis, problem)
