import numpy as np
import pytest

from vmspod import archive
from vmspod.archive import ArchiveError
from vmspod.rom import ClosureConfig, build_model


def test_snapshot_roundtrip(small_setup, tmp_path):
    snaps, _ = small_setup
    path = tmp_path / "s.bin"
    archive.write_snapshots(path, snaps)
    back = archive.read_snapshots(path)
    np.testing.assert_array_equal(back.coeff_matrix, snaps.coeff_matrix)
    assert (back.dT, back.nu, back.space.mesh.n_div) == (snaps.dT, snaps.nu, 8)
    assert path.stat().st_size == 48 + 8 * snaps.coeff_matrix.size
    assert path.read_bytes()[:8] == b"PODSNAP1"


def test_basis_roundtrip(small_setup, tmp_path):
    snaps, basis = small_setup
    path = tmp_path / "b.bin"
    archive.write_basis(path, basis, snaps.dT, snaps.nu)
    back = archive.read_basis(path, space=basis.space)
    np.testing.assert_array_equal(back.modes, basis.modes)
    np.testing.assert_array_equal(back.eigenvalues, basis.eigenvalues)
    np.testing.assert_array_equal(back.all_eigenvalues, basis.all_eigenvalues)
    np.testing.assert_allclose(back.h1_norms_sq, basis.h1_norms_sq, rtol=1e-14)


def test_model_roundtrip(small_setup, problem, tmp_path):
    _, basis = small_setup
    model = build_model(basis, 5, problem, ClosureConfig("MIXING_LENGTH", 2e-3, 2))
    path = tmp_path / "m.bin"
    archive.write_model(path, model)
    back = archive.read_model(path)
    for name in ("K", "T", "D", "a0"):
        np.testing.assert_array_equal(getattr(back, name), getattr(model, name))
    assert back.closure == model.closure and back.nu == model.nu
    gal = build_model(basis, 5, problem, ClosureConfig("GALERKIN", 0.0, 95))
    archive.write_model(path, gal)
    assert archive.read_model(path).closure.R == 95


def test_bad_magic_names_file(small_setup, tmp_path):
    snaps, _ = small_setup
    path = tmp_path / "s.bin"
    archive.write_snapshots(path, snaps)
    data = bytearray(path.read_bytes())
    data[:8] = b"PODSNAP9"
    path.write_bytes(bytes(data))
    with pytest.raises(ArchiveError, match="s.bin"):
        archive.read_snapshots(path)
    with pytest.raises(ArchiveError):
        archive.read_basis(path)


@pytest.mark.parametrize("cut", [10, 60, -8])
def test_truncated_archive(small_setup, tmp_path, cut):
    snaps, _ = small_setup
    path = tmp_path / "s.bin"
    archive.write_snapshots(path, snaps)
    data = path.read_bytes()
    path.write_bytes(data[:cut])
    with pytest.raises(ArchiveError):
        archive.read_snapshots(path)


def test_trailing_bytes(small_setup, tmp_path):
    snaps, basis = small_setup
    path = tmp_path / "b.bin"
    archive.write_basis(path, basis)
    path.write_bytes(path.read_bytes() + b"\0" * 8)
    with pytest.raises(ArchiveError, match="trailing"):
        archive.read_basis(path)


def test_archive_error_is_ioerror():
    assert issubclass(ArchiveError, OSError)
