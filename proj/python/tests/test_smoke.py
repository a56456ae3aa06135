import numpy as np
import pytest

import alignrecon as ar


def rand_image(h, w, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((h, w)) + 1j * rng.standard_normal((h, w))


def test_fft_matches_numpy_centered_orthonormal():
    x = rand_image(16, 12, 0)
    want = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x), norm="ortho"))
    np.testing.assert_allclose(ar.fft2c(x), want, atol=1e-12)
    np.testing.assert_allclose(ar.ifft2c(ar.fft2c(x)), x, atol=1e-12)


def test_masked_adjoint():
    x, y = rand_image(32, 32, 1), rand_image(32, 32, 2)
    mask = ar.make_mask(32, 4.0, "random", seed=3)
    lhs = np.vdot(y, ar.forward_masked(x, mask))
    rhs = np.vdot(ar.adjoint_masked(y, mask), x)
    assert abs(lhs - rhs) < 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)


def test_mask_counts():
    for accel, total in ((4.0, 80), (8.0, 40)):
        for pattern in ("equispaced", "random"):
            assert ar.make_mask(320, accel, pattern).sum() == total


def test_warp_constant_shift():
    x = rand_image(16, 16, 4)
    field = np.zeros((2, 16, 16))
    field[0] = 1.0
    out = ar.warp(x, field)
    np.testing.assert_allclose(out[:, :-1], x[:, 1:], atol=1e-12)


def test_prox_reduces_tv():
    x = rand_image(16, 16, 5)
    z = ar.prox_tv(x, 0.5)
    assert ar.tv(z) < ar.tv(x)
    xi = ar.edge_field(np.abs(rand_image(16, 16, 6)), 0.3)
    assert xi.shape == (2, 16, 16)
    assert ar.dtv(ar.prox_dtv(x, xi, 0.5), xi) < ar.dtv(x, xi)


def test_reconstruction_improves_on_zero_filling():
    target, reference = ar.phantom_pair(64, seed=1)
    mask = ar.make_mask(64, 4.0)
    k = ar.acquire(target, mask, 0.01, seed=2)
    cfg = ar.SolverConfig()
    out = ar.reconstruct(k, mask, reference, cfg, truth=target)
    assert out["x"].shape == (64, 64)
    assert out["phi"].shape == (2, 64, 64)
    assert len(out["stages"]) == cfg.stages
    zf = ar.evaluate(ar.zero_filled(k, mask), target)["psnr"]
    assert ar.evaluate(out["x"], target)["psnr"] > zf + 1.0
    assert out["stages"][-1]["psnr"] == pytest.approx(ar.evaluate(out["x"], target)["psnr"])


def test_misalign_and_inverse():
    _, reference = ar.phantom_pair(64, seed=3)
    moved, field = ar.misalign(reference, 1.0, seed=4)
    assert moved.shape == reference.shape
    assert ar.mean_endpoint_error(field, field) == 0.0
    assert ar.inverse_field(field).shape == field.shape


def test_grid_round_trip(tmp_path):
    x = rand_image(9, 11, 7)
    ar.write_grid(tmp_path / "x.grid", x)
    np.testing.assert_array_equal(ar.read_grid(tmp_path / "x.grid"), x)
    f = np.random.default_rng(8).standard_normal((2, 9, 11))
    ar.write_grid(tmp_path / "f.grid", f)
    np.testing.assert_array_equal(ar.read_grid(tmp_path / "f.grid"), f)


def test_errors_are_mapped():
    with pytest.raises(ar.DimensionError):
        ar.fft2c(np.zeros((4, 4), dtype=complex))
    with pytest.raises(ar.InvalidInput):
        ar.fft2c(np.full((8, 8), np.nan, dtype=complex))
    with pytest.raises(ar.Error):
        ar.make_mask(320, 0.5)
