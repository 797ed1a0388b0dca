import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vmspod.manufactured import SnapshotSet
from vmspod.pod import (EigensolverError, build_basis, correlation_matrix, h1_gram,
                        h1_truncation_check, inverse_estimate_check,
                        inverse_estimate_constant, l2_truncation_check, pod,
                        projection_coefficients, sym_eig_descending)


def power_iteration(A, iters=5000):
    """Dominant eigenvalue of an SPD matrix, independent of the Jacobi code."""
    x = np.ones(A.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = A @ x
        lam_new = np.linalg.norm(y)
        x = y / lam_new
        if abs(lam_new - lam) <= 1e-15 * lam_new:
            break
        lam = lam_new
    return x @ A @ x


def test_jacobi_two_by_two():
    w, V = sym_eig_descending([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(w, [3.0, 1.0], atol=1e-15)
    assert abs(abs(V[0, 0]) - np.sqrt(0.5)) <= 1e-15
    np.testing.assert_allclose(V.T @ V, np.eye(2), atol=1e-15)


def test_jacobi_identity_and_diagonal():
    w, V = sym_eig_descending(np.eye(4))
    np.testing.assert_array_equal(w, np.ones(4))
    np.testing.assert_array_equal(V, np.eye(4))
    w, _ = sym_eig_descending(np.diag([1.0, 5.0, 3.0]))
    np.testing.assert_array_equal(w, [5.0, 3.0, 1.0])


def test_jacobi_rejects_bad_input():
    with pytest.raises(ValueError):
        sym_eig_descending(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        sym_eig_descending([[1.0, 2.0], [0.0, 1.0]])


def test_jacobi_sweep_limit():
    A = np.random.default_rng(0).standard_normal((6, 6))
    with pytest.raises(EigensolverError):
        sym_eig_descending(A + A.T, max_sweeps=1)


def test_jacobi_against_power_iteration(rng):
    for _ in range(20):
        n = rng.integers(3, 15)
        B = rng.standard_normal((n, n))
        A = B @ B.T + 0.1 * np.eye(n)
        w, V = sym_eig_descending(A)
        assert np.all(np.diff(w) <= 0)
        assert abs(w[0] - power_iteration(A)) <= 1e-10 * w[0]
        recon = (V * w) @ V.T
        assert np.linalg.norm(recon - A) <= 1e-12 * np.linalg.norm(A)
        np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)))
def test_jacobi_reconstruction_property(B):
    A = B + B.T
    w, V = sym_eig_descending(A)
    scale = max(np.linalg.norm(A), 1e-300)
    assert np.linalg.norm((V * w) @ V.T - A) <= 1e-11 * scale + 1e-300
    assert np.all(np.diff(w) <= 0)
    assert abs(w.sum() - np.trace(A)) <= 1e-11 * max(scale, 1.0)


def test_correlation_matrix_is_mass_gram(small_setup):
    snaps, _ = small_setup
    K = correlation_matrix(snaps)
    U = snaps.coeff_matrix
    s = snaps.space
    i, j = 3, 11
    # oracle: quadrature of the pointwise dot product
    vi, vj = s.values_at_qp(U[:, i]), s.values_at_qp(U[:, j])
    direct = s.qweights @ np.sum(vi * vj, axis=1) / U.shape[1]
    assert abs(K[i, j] - direct) <= 1e-13
    np.testing.assert_array_equal(K, K.T)


def test_basis_orthonormal_and_sorted(small_setup):
    snaps, basis = small_setup
    G = basis.modes.T @ (snaps.space.mass @ basis.modes)
    assert np.abs(G - np.eye(basis.d)).max() <= 1e-10
    assert np.all(np.diff(basis.eigenvalues) <= 0)
    assert basis.d <= snaps.n_snapshots
    K = correlation_matrix(snaps)
    assert abs(basis.all_eigenvalues.sum() - np.trace(K)) <= 1e-12 * np.trace(K)


def test_truncation_identities_small(small_setup):
    snaps, basis = small_setup
    for r in range(basis.d + 1):
        direct, tail = l2_truncation_check(snaps, basis, r)
        assert abs(direct - tail) <= 1e-8 * max(tail, 1e-14 * basis.eigenvalues[0]), r
        direct, tail = h1_truncation_check(snaps, basis, r)
        assert abs(direct - tail) <= 1e-8 * max(tail, 1e-14 * basis.h1_tail(0)), r


def test_full_rank_reconstruction(small_setup):
    snaps, basis = small_setup
    U = snaps.coeff_matrix
    C = projection_coefficients(basis, U)
    E = U - basis.modes @ C
    rel = np.sqrt(np.sum(E * (snaps.space.mass @ E)) / np.sum(U * (snaps.space.mass @ U)))
    assert rel <= 1e-6


def test_single_snapshot_basis(space8, problem):
    u = space8.interpolate(problem.exact_velocity, 0.3).coeffs
    snaps = SnapshotSet(space8, u[:, None], 1e-2, 1e-3)
    basis = pod(snaps)
    assert basis.d == 1
    norm_sq = u @ (space8.mass @ u)
    assert abs(basis.eigenvalues[0] - norm_sq) <= 1e-14 * norm_sq
    # the mode is u / ||u||, up to the sign convention
    phi = basis.modes[:, 0] * np.sqrt(norm_sq)
    assert min(np.abs(phi - u).max(), np.abs(phi + u).max()) <= 1e-12


def test_zero_snapshots_rejected(space8):
    snaps = SnapshotSet(space8, np.zeros((space8.n_dof, 3)), 1e-2, 1e-3)
    with pytest.raises(ValueError):
        pod(snaps)


def test_rank_tolerance_truncates(small_setup):
    snaps, _ = small_setup
    K = correlation_matrix(snaps)
    eig = sym_eig_descending(K)
    loose = build_basis(snaps, eig, rank_tol=1e-3)
    assert loose.d == int(np.sum(eig[0] >= 1e-3 * eig[0][0]))
    assert loose.d < pod(snaps).d


def test_truncate_bounds(small_setup):
    _, basis = small_setup
    assert basis.truncate(0).shape[1] == 0
    with pytest.raises(ValueError):
        basis.truncate(basis.d + 1)
    tails = [basis.h1_tail(r) for r in range(basis.d + 1)]
    assert np.all(np.diff(tails) <= 0) and tails[-1] == 0


def test_inverse_estimate(small_setup, rng):
    _, basis = small_setup
    r = min(8, basis.d)
    C = inverse_estimate_constant(basis, r)
    for _ in range(100):
        assert inverse_estimate_check(basis, r, rng.standard_normal(r))
    # tight case: the top generalized eigenvector of (S_r, M_r) attains C
    Mr, Sr = h1_gram(basis, r)
    w, V = np.linalg.eigh(np.linalg.solve(Mr, Sr))
    v = V[:, -1]
    ratio = np.sqrt(v @ Sr @ v / (v @ Mr @ v))
    assert abs(ratio - C) <= 1e-10 * C
    assert inverse_estimate_check(basis, r, v)
    with pytest.raises(ValueError):
        inverse_estimate_check(basis, r, np.ones(r + 1))
