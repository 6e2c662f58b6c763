"""Transform-layer tests: unitary DFT contract, decomposition oracles,
kernel closed form, mirror extension."""

import numpy as np
import pytest
from scipy import fft as sfft

from fpmkit.transforms import (
    boundary_image,
    crop_quarter,
    dft2,
    idft2,
    kernel_spectrum,
    periodic_smooth_decompose,
    pft_forward,
    symmetric_quadruple,
)


def naive_dft2(f):
    """Quadratic-time unitary DFT, the independent oracle for dft2."""
    m, n = f.shape
    wm = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    wn = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return wm @ f @ wn / np.sqrt(m * n)


def laplacian_stencil(shape):
    """Rasterized circular 4-neighbour stencil: -4 center, +1 neighbours."""
    k = np.zeros(shape)
    k[0, 0] = -4.0
    k[1, 0] += 1.0
    k[-1, 0] += 1.0
    k[0, 1] += 1.0
    k[0, -1] += 1.0
    return k


def circular_convolve(kernel, image):
    return np.real(sfft.ifft2(sfft.fft2(kernel) * sfft.fft2(image)))


def dense_smooth_solve(f):
    """Dense linear-system oracle for the smooth component.

    Unknowns are the pixels of e; equations are the circular convolution
    stencil (*) e = boundary_image(f) plus the zero-mean constraint.
    """
    m, n = f.shape
    u = boundary_image(f)
    rows = []
    for i in range(m):
        for j in range(n):
            row = np.zeros(m * n)
            row[i * n + j] = -4.0
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                row[((i + di) % m) * n + (j + dj) % n] += 1.0
            rows.append(row)
    rows.append(np.ones(m * n))
    a = np.stack(rows)
    b = np.concatenate([u.ravel(), [0.0]])
    e, *_ = np.linalg.lstsq(a, b, rcond=None)
    return e.reshape(m, n)


class TestDft2:
    @pytest.mark.parametrize("shape", [(2, 2), (3, 5), (8, 8), (16, 12)])
    def test_matches_naive_oracle(self, shape):
        rng = np.random.default_rng(7)
        f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        assert np.allclose(dft2(f), naive_dft2(f), atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(8)
        f = rng.standard_normal((33, 47)) + 1j * rng.standard_normal((33, 47))
        assert np.linalg.norm(dft2(f)) == pytest.approx(np.linalg.norm(f), rel=1e-12)

    def test_roundtrip(self):
        rng = np.random.default_rng(9)
        f = rng.standard_normal((17, 21))
        assert np.allclose(idft2(dft2(f)), f, atol=1e-12)

    def test_shift_theorem(self):
        rng = np.random.default_rng(10)
        f = rng.standard_normal((24, 24))
        dy, dx = 5, 9
        spectrum = dft2(np.roll(f, (dy, dx), axis=(0, 1)))
        k = np.fft.fftfreq(24)
        twiddle = np.exp(-2j * np.pi * (k[:, None] * dy + k[None, :] * dx))
        assert np.allclose(spectrum, dft2(f) * twiddle, atol=1e-12)

    def test_dc_is_scaled_mean(self):
        f = np.arange(30.0).reshape(5, 6)
        assert dft2(f)[0, 0] == pytest.approx(f.mean() * np.sqrt(30), rel=1e-12)

    @pytest.mark.parametrize("bad", [np.ones(5), np.ones((1, 4)), np.array([[1.0, np.inf], [0, 0]])])
    def test_rejects_invalid_images(self, bad):
        with pytest.raises(ValueError):
            dft2(bad)


class TestBoundaryImage:
    def test_supported_on_border_only(self):
        rng = np.random.default_rng(11)
        u = boundary_image(rng.standard_normal((9, 13)))
        assert np.all(u[1:-1, 1:-1] == 0.0)

    def test_zero_for_wrap_matched_input(self):
        rng = np.random.default_rng(12)
        core = rng.standard_normal((7, 5))
        f = np.pad(core, ((0, 1), (0, 1)), mode="wrap")
        assert np.all(boundary_image(f) == 0.0)

    def test_zero_sum(self):
        rng = np.random.default_rng(13)
        u = boundary_image(rng.standard_normal((6, 8)))
        assert abs(u.sum()) < 1e-12

    def test_known_gap(self):
        f = np.zeros((4, 4))
        f[0, :] = 1.0
        u = boundary_image(f)
        # rows: f[-1] - f[0] = -1; columns cancel except where row 0 contributes
        assert np.allclose(u[0, 1:-1], -1.0)
        assert np.allclose(u[-1, 1:-1], 1.0)


class TestKernelSpectrum:
    @pytest.mark.parametrize("m", range(2, 65))
    def test_closed_form_matches_stencil_dft(self, m):
        spectrum = kernel_spectrum((m, m))
        # unitary dft2 of the stencil scaled back to the plain (unnormalized) DFT
        plain = dft2(laplacian_stencil((m, m))) * np.sqrt(m * m)
        assert np.allclose(spectrum, plain.real, atol=1e-12)
        assert np.abs(plain.imag).max() < 1e-12

    def test_dc_zero_rest_negative(self):
        spectrum = kernel_spectrum((16, 23))
        assert spectrum[0, 0] == 0.0
        mask = np.ones_like(spectrum, dtype=bool)
        mask[0, 0] = False
        assert spectrum[mask].max() < 0.0

    def test_rejects_degenerate_shape(self):
        with pytest.raises(ValueError):
            kernel_spectrum((1, 8))


class TestDecomposition:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m, n = rng.integers(2, 9, size=2)
        f = rng.standard_normal((m, n))
        if seed % 2:
            f = f + 1j * rng.standard_normal((m, n))
        d = periodic_smooth_decompose(f)
        if np.iscomplexobj(f):
            oracle = dense_smooth_solve(f.real) + 1j * dense_smooth_solve(f.imag)
        else:
            oracle = dense_smooth_solve(f)
        scale = max(np.abs(oracle).max(), 1e-30)
        assert np.abs(d.smooth - oracle).max() / scale < 1e-10

    def test_reconstruction_and_zero_mean(self):
        rng = np.random.default_rng(21)
        f = rng.standard_normal((40, 56))
        d = periodic_smooth_decompose(f)
        assert np.allclose(d.periodic + d.smooth, f, atol=1e-12)
        assert abs(d.smooth.mean()) < 1e-12

    def test_convolution_system(self):
        rng = np.random.default_rng(22)
        f = rng.standard_normal((31, 18))
        d = periodic_smooth_decompose(f)
        lhs = circular_convolve(laplacian_stencil(f.shape), d.smooth)
        assert np.allclose(lhs, d.boundary, atol=1e-9)

    def test_wrap_matched_input_is_fixed_point(self):
        rng = np.random.default_rng(23)
        f = np.pad(rng.standard_normal((30, 30)), ((0, 1), (0, 1)), mode="wrap")
        d = periodic_smooth_decompose(f)
        assert np.linalg.norm(d.smooth) <= 1e-12 * np.linalg.norm(f)

    def test_linear_in_input(self):
        rng = np.random.default_rng(24)
        f, g = rng.standard_normal((2, 12, 15))
        sum_smooth = periodic_smooth_decompose(2.0 * f - g).smooth
        parts = 2.0 * periodic_smooth_decompose(f).smooth - periodic_smooth_decompose(g).smooth
        assert np.allclose(sum_smooth, parts, atol=1e-12)

    def test_periodic_component_kills_axis_cross(self):
        # a strong ramp leaks energy onto the spectral axes; the periodic
        # component must carry far less of it
        rows = np.linspace(0.0, 1.0, 64)[:, None] * np.ones(64)
        d = periodic_smooth_decompose(rows)
        def axis_energy(spec):
            energy = np.abs(spec) ** 2
            mask = np.zeros_like(energy, dtype=bool)
            mask[0, :] = True
            mask[:, 0] = True
            mask[0, 0] = False
            return energy[mask].sum()
        assert axis_energy(dft2(d.periodic)) < 1e-3 * axis_energy(dft2(rows))


class TestPftForward:
    def test_equals_dft_of_periodic_component(self):
        rng = np.random.default_rng(31)
        f = rng.standard_normal((27, 27)) + 1j * rng.standard_normal((27, 27))
        d = periodic_smooth_decompose(f)
        assert np.allclose(pft_forward(f), dft2(d.periodic), atol=1e-11)

    def test_identity_for_wrap_matched_input(self):
        rng = np.random.default_rng(32)
        f = np.pad(rng.standard_normal((20, 20)), ((0, 1), (0, 1)), mode="wrap")
        assert np.allclose(pft_forward(f), dft2(f), atol=1e-12)

    def test_preserves_dc(self):
        rng = np.random.default_rng(33)
        f = rng.standard_normal((14, 19))
        assert pft_forward(f)[0, 0] == pytest.approx(dft2(f)[0, 0], abs=1e-12)


class TestMirrorExtension:
    def test_quadruple_is_wrap_matched(self):
        rng = np.random.default_rng(41)
        q = symmetric_quadruple(rng.standard_normal((9, 6)))
        assert q.shape == (18, 12)
        assert np.all(boundary_image(q) == 0.0)

    def test_crop_inverts_quadruple(self):
        rng = np.random.default_rng(42)
        f = rng.standard_normal((11, 7))
        assert np.array_equal(crop_quarter(symmetric_quadruple(f)), f)

    def test_quadrants_are_flips(self):
        rng = np.random.default_rng(43)
        f = rng.standard_normal((5, 4))
        q = symmetric_quadruple(f)
        assert np.array_equal(q[:5, 4:], f[:, ::-1])
        assert np.array_equal(q[5:, :4], f[::-1, :])
        assert np.array_equal(q[5:, 4:], f[::-1, ::-1])

    def test_quadruple_spectrum_is_real_for_real_input(self):
        # mirrored extensions have cosine-only content up to the grid phase
        rng = np.random.default_rng(44)
        q = symmetric_quadruple(rng.standard_normal((8, 8)))
        spectrum = dft2(q)
        m, n = q.shape
        phase = np.exp(
            -1j * np.pi * (np.fft.fftfreq(m)[:, None] + np.fft.fftfreq(n)[None, :])
        )
        assert np.abs((spectrum * phase).imag).max() < 1e-12

    def test_crop_rejects_odd_sizes(self):
        with pytest.raises(ValueError):
            crop_quarter(np.ones((5, 4)))
