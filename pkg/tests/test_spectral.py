import json
import math

import numpy as np
import pytest

from bernstein_lp import spectral as sp
from bernstein_lp.catalog import make
from bernstein_lp.parabolic import random_sources
from bernstein_lp.reports import ParameterError

PHI = make("two_power")
GRID = sp.TorusGrid(1, 2 * math.pi, 64)


def random_field(grid, channels=2, seed=0):
    rng = np.random.default_rng(seed)
    return sp.GridField(grid, rng.standard_normal((channels,) + grid.shape))


def plane_wave(grid, k):
    x = grid.coordinates()
    phase = sum(ki * 2 * math.pi / grid.L * xi for ki, xi in zip(k, x))
    return np.exp(1j * phase)


class TestGrid:
    def test_frequencies(self):
        g = sp.TorusGrid(1, 4.0, 8)
        np.testing.assert_allclose(np.sort(g.xi1d), 2 * math.pi / 4.0 * np.arange(-4, 4))
        assert g.h == 0.5

    @pytest.mark.parametrize("n", [0, 6, 12])
    def test_power_of_two(self, n):
        with pytest.raises(ParameterError):
            sp.TorusGrid(1, 1.0, n)

    def test_space_time_shape_check(self):
        with pytest.raises(ParameterError):
            sp.SpaceTimeField(GRID, 0.1, np.zeros((1, 64)))


class TestSemigroup:
    def test_identity(self):
        f = random_field(GRID)
        np.testing.assert_array_equal(sp.semigroup_apply(f, 0.0, PHI).values, f.values)

    def test_eigenfunction(self):
        g = sp.TorusGrid(2, 2 * math.pi, 16)
        wave = plane_wave(g, (3, -2))
        out = sp.semigroup_apply(sp.GridField(g, wave), 0.7, PHI).values[0]
        np.testing.assert_allclose(out, math.exp(-0.7 * PHI(13.0)) * wave, atol=1e-14)

    def test_semigroup_property(self):
        f = random_field(GRID)
        a = sp.semigroup_apply(sp.semigroup_apply(f, 0.3, PHI), 0.5, PHI).values
        np.testing.assert_allclose(a, sp.semigroup_apply(f, 0.8, PHI).values, atol=1e-13)

    def test_cauchy_convolution(self):
        # the periodized Cauchy kernel has the closed form sinh(s)/(L (cosh(s) - cos(2 pi x/L)))
        L, t = 25.0, 1.0
        g = sp.TorusGrid(1, L, 512)
        x = g.x1d
        bump = np.exp(-0.5 * (x - L / 2) ** 2)
        got = sp.semigroup_apply(sp.GridField(g, bump), t, make("stable", alpha=1.0)).values[0]
        s = 2 * math.pi * t / L
        diff = x[:, None] - x[None, :]
        kern = math.sinh(s) / (L * (math.cosh(s) - np.cos(2 * math.pi * diff / L)))
        conv = kern @ bump * g.h
        np.testing.assert_allclose(got, conv, atol=1e-5 * conv.max())

    @pytest.mark.parametrize("p", [1, 2, math.inf])
    def test_contraction(self, p):
        for seed in range(5):
            f = random_field(sp.TorusGrid(2, 3.0, 32), seed=seed)
            assert sp.lp_norm(sp.semigroup_apply(f, 0.2, PHI), p) <= sp.lp_norm(f, p) * (1 + 1e-12)

    def test_negative_time(self):
        with pytest.raises(ParameterError):
            sp.semigroup_apply(random_field(GRID), -1.0, PHI)


class TestPowers:
    def test_zero_power(self):
        f = random_field(GRID)
        np.testing.assert_array_equal(sp.phi_power_apply(f, 0.0, PHI).values, f.values)
        np.testing.assert_array_equal(sp.bessel_apply(f, 0.0, PHI).values, f.values)

    def test_additivity(self):
        f = random_field(GRID)
        twice = sp.phi_power_apply(sp.phi_power_apply(f, 1.0, PHI), 1.0, PHI).values
        once = sp.phi_power_apply(f, 2.0, PHI).values
        np.testing.assert_allclose(twice, once, rtol=1e-12, atol=1e-12 * np.abs(once).max())

    def test_stable_quarter_power(self):
        alpha = 1.2
        wave = plane_wave(GRID, (5,))
        out = sp.phi_power_apply(sp.GridField(GRID, wave), 0.5, make("stable", alpha=alpha)).values[0]
        np.testing.assert_allclose(out, 5.0 ** (alpha / 2) * wave, atol=1e-13)

    def test_negative_power_projects_off_constants(self):
        f = sp.GridField(GRID, np.ones(GRID.shape) + np.cos(GRID.x1d))
        out = sp.phi_power_apply(f, -1.0, PHI).values[0]
        assert abs(out.mean()) < 1e-15
        np.testing.assert_allclose(out, np.cos(GRID.x1d), atol=1e-14)

    def test_bessel_inverse_pair(self):
        f = random_field(GRID)
        back = sp.bessel_apply(sp.bessel_apply(f, 2.0, PHI), -2.0, PHI).values
        np.testing.assert_allclose(back, f.values, rtol=1e-13, atol=1e-13)

    def test_bessel_constant(self):
        f = sp.GridField(GRID, 3.0 * np.ones(GRID.shape))
        np.testing.assert_allclose(sp.bessel_apply(f, 1.7, PHI).values, f.values, rtol=1e-15)

    def test_operators_commute(self):
        f = random_field(sp.TorusGrid(2, 5.0, 16))
        ab = sp.bessel_apply(sp.semigroup_apply(f, 0.4, PHI), 1.0, PHI).values
        ba = sp.semigroup_apply(sp.bessel_apply(f, 1.0, PHI), 0.4, PHI).values
        np.testing.assert_allclose(ab, ba, atol=1e-12)

    def test_real_in_real_out(self):
        f = random_field(GRID)
        for op in (lambda v: sp.phi_power_apply(v, 0.5, PHI), lambda v: sp.bessel_apply(v, -1, PHI)):
            assert np.isrealobj(op(f).values)


class TestParabolicMultiplier:
    def field(self, M=16, seed=0):
        rng = np.random.default_rng(seed)
        return sp.SpaceTimeField(GRID, 1.0 / M, rng.standard_normal((M, 2, GRID.n)))

    def test_spatial_constants_annihilated(self):
        M = 16
        vals = np.sin(np.arange(M))[:, None, None] * np.ones((M, 1, GRID.n))
        out = sp.parabolic_multiplier_apply(sp.SpaceTimeField(GRID, 0.1, vals), PHI).values
        assert np.abs(out).max() < 1e-14

    def test_space_time_mode(self):
        M, dt, j, k = 16, 0.05, 3, 2
        t = dt * np.arange(M)
        tau = 2 * math.pi * j / (M * dt)
        vals = np.exp(1j * tau * t)[:, None] * plane_wave(GRID, (k,))[None, :]
        F = sp.SpaceTimeField(GRID, dt, vals)
        out = sp.parabolic_multiplier_apply(F, PHI, pad_factor=1).values[:, 0]
        m = PHI(k * k) / (1j * tau + PHI(k * k))
        assert abs(m) <= 1
        np.testing.assert_allclose(out, m * vals, atol=1e-13)

    def test_l2_contraction(self):
        for seed in range(4):
            F = self.field(seed=seed)
            assert sp.multiplier_ratio(F, PHI, 2) <= 1.0 + 1e-12

    def test_real_output(self):
        assert np.isrealobj(sp.parabolic_multiplier_apply(self.field(), PHI).values)

    def test_verify_multiplier(self):
        srcs = random_sources(6, 1, 4, 1.0, seed=3)
        rep = sp.verify_multiplier(srcs, PHI, sp.TorusGrid(1, 2 * math.pi, 32), 32, 1.0, 4)
        assert rep.inequality_id == "lem6.4"
        assert rep.passed


class TestNorms:
    @pytest.mark.parametrize("p", [1, 2, 3.5])
    def test_single_cell(self, p):
        g = sp.TorusGrid(2, 3.0, 8)
        v = np.zeros(g.shape)
        v[2, 5] = 1.0
        assert sp.lp_norm(sp.GridField(g, v), p) == pytest.approx(g.h ** (2 / p), rel=1e-15)

    def test_parseval(self):
        f = random_field(GRID, channels=3)
        spec = np.fft.fft(f.values, axis=-1)
        assert sp.lp_norm(f, 2) ** 2 == pytest.approx(GRID.L / GRID.n ** 2 * np.sum(np.abs(spec) ** 2),
                                                      rel=1e-12)

    def test_homogeneity(self):
        f = random_field(GRID)
        g = sp.GridField(GRID, -2.5 * f.values)
        assert sp.lp_norm(g, 3) == pytest.approx(2.5 * sp.lp_norm(f, 3), rel=1e-14)

    def test_space_time_weight(self):
        F = sp.SpaceTimeField(GRID, 0.25, np.ones((4, 1, GRID.n)))
        assert sp.lp_norm(F, 2) == pytest.approx(math.sqrt(GRID.L), rel=1e-14)

    def test_max_norm_uses_channel_magnitude(self):
        v = np.zeros((2,) + GRID.shape)
        v[0, 3], v[1, 3] = 3.0, 4.0
        assert sp.lp_norm(sp.GridField(GRID, v), math.inf) == pytest.approx(5.0)

    def test_norm_equivalence_identity(self):
        f = random_field(GRID)
        lhs = sp.lp_norm(f, 3) + sp.lp_norm(sp.phi_power_apply(f, 0.0, PHI), 3)
        assert lhs / sp.bessel_norm(f, 0.0, 3, PHI) == pytest.approx(2.0, rel=1e-14)

    def test_norm_equivalence_single_mode(self):
        f = sp.GridField(GRID, np.cos(4 * GRID.x1d))
        lam = PHI(16.0)
        lhs = sp.lp_norm(f, 2) + sp.lp_norm(sp.phi_power_apply(f, 1.0, PHI), 2)
        assert lhs / sp.bessel_norm(f, 2.0, 2, PHI) == pytest.approx(1.0, rel=1e-13)
        assert sp.bessel_norm(f, 2.0, 2, PHI) == pytest.approx((1 + lam) * sp.lp_norm(f, 2), rel=1e-13)

    def test_norm_equivalence_ensemble(self):
        rep = sp.verify_norm_equivalence(make("stable", alpha=1.0), 1.0, 4, sp.TorusGrid(1, 2 * math.pi, 64))
        assert 1.0 <= rep.n_hat <= 4.0
        assert rep.passed

    def test_small_ensemble_rejected(self):
        with pytest.raises(ParameterError):
            sp.verify_norm_equivalence(PHI, 1.0, 2, GRID, count=10)


class TestBandlimited:
    def test_refinement_consistency(self):
        bf = sp.BandlimitedField.random(2, 3, 2, np.random.default_rng(1))
        g = sp.TorusGrid(2, 2.0, 16)
        coarse = bf.sample(g)
        fine = bf.sample(g.refined())
        np.testing.assert_allclose(fine[:, ::2, ::2], coarse, atol=1e-12)
        assert sp.effective_band(coarse, g) == 3

    def test_resample_exact(self):
        bf = sp.BandlimitedField.random(1, 5, 1, np.random.default_rng(2))
        v = bf.sample(GRID)
        np.testing.assert_allclose(sp.fourier_resample(v, GRID, 256), bf.sample(sp.TorusGrid(1, GRID.L, 256)),
                                   atol=1e-12)

    def test_band_too_wide(self):
        with pytest.raises(ParameterError):
            sp.BandlimitedField.random(1, 40, 1, np.random.default_rng(0)).sample(GRID)


class TestBinaryFormat:
    def test_grid_round_trip(self, tmp_path):
        f = random_field(sp.TorusGrid(2, 1.5, 8), channels=3)
        path = tmp_path / "f.bin"
        sp.write_field(path, f, {"note": "x"})
        back = sp.read_field(path)
        np.testing.assert_array_equal(back.values, f.values)
        assert back.grid == f.grid
        header = np.fromfile(path, dtype="<f8", count=4)
        np.testing.assert_array_equal(header, [2, 8, 1.5, 3])
        side = json.loads((tmp_path / "f.bin.json").read_text())
        assert side["metadata"] == {"note": "x"} and side["byte_order"] == "little"

    def test_complex_space_time_round_trip(self, tmp_path):
        vals = np.exp(1j * np.arange(3 * 64)).reshape(3, 1, 64)
        F = sp.SpaceTimeField(GRID, 0.2, vals, t0=1.0)
        sp.write_field(tmp_path / "st.bin", F)
        back = sp.read_field(tmp_path / "st.bin")
        np.testing.assert_array_equal(back.values, F.values)
        assert (back.dt, back.t0) == (0.2, 1.0)
