import math

import numpy as np
import pytest

from bernstein_lp import spde
from bernstein_lp.catalog import make
from bernstein_lp.reports import ParameterError
from bernstein_lp.spectral import SpaceTimeField, TorusGrid

PHI = make("two_power")
GRID = TorusGrid(1, 2 * math.pi, 16)


def st_field(profile, M, T, grid=GRID):
    """Time-constant field with spatial profile of shape (K, n...) or (n...)."""
    profile = np.asarray(profile, dtype=float)
    if profile.ndim == grid.d:
        profile = profile[None]
    return SpaceTimeField(grid, T / M, np.broadcast_to(profile, (M,) + profile.shape).copy())


def problem(f=None, g=None, M=32, T=1.0, grid=GRID, phi=PHI):
    return spde.SpdeProblem(phi, grid, T, M,
                            None if f is None else st_field(f, M, T, grid),
                            None if g is None else st_field(g, M, T, grid))


def random_profile(seed, K=None, grid=GRID, band=3):
    rng = np.random.default_rng(seed)
    x = grid.x1d
    shape = () if K is None else (K,)
    out = np.zeros(shape + grid.shape)
    for k in range(band + 1):
        a, b = rng.standard_normal((2,) + shape)
        out += np.multiply.outer(a, np.cos(k * x)) + np.multiply.outer(b, np.sin(k * x))
    return out


class TestDeterministic:
    def test_zero_forcing(self):
        assert np.all(spde.solve_deterministic(problem()) == 0.0)

    def test_single_mode_closed_form(self):
        k, M, T = 2, 40, 3.0
        prob = problem(f=np.cos(k * GRID.x1d), M=M, T=T)
        u = spde.solve_deterministic(prob)
        lam = PHI(k * k)
        t = T / M * np.arange(M + 1)
        exact = (-np.expm1(-t * lam) / lam)[:, None] * np.cos(k * GRID.x1d)[None]
        np.testing.assert_allclose(u, exact, rtol=1e-10, atol=1e-14)

    def test_zero_mode_grows_linearly(self):
        M, T, c = 20, 2.0, 1.5
        u = spde.solve_deterministic(problem(f=c * np.ones(GRID.shape), M=M, T=T))
        np.testing.assert_allclose(u[:, 3], c * T / M * np.arange(M + 1), rtol=1e-13)

    def test_multiplier_cross_check_first_order(self):
        f = random_profile(3)
        errs = []
        for M in (32, 64, 128):
            prob = problem(f=f, M=M)
            lhs = spde.phi_u_via_multiplier(prob)
            u = spde.solve_deterministic(prob)[:-1]
            rhs = np.fft.ifft(PHI(GRID.xi2) * np.fft.fft(u, axis=-1), axis=-1).real
            errs.append(np.abs(lhs - rhs).max() / np.abs(rhs).max())
        assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.15)
        assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.15)


class TestMild:
    def test_noise_free_equals_deterministic(self):
        prob = problem(f=random_profile(1), M=16)
        sol = spde.solve_mild(prob, 2, keep_paths=True)
        det = spde.solve_deterministic(prob)
        np.testing.assert_array_equal(sol.paths[0], det)
        np.testing.assert_array_equal(sol.paths[1], det)

    def test_seed_determinism_and_batching(self):
        prob = problem(f=random_profile(1), g=random_profile(2, K=3), M=16)
        a = spde.solve_mild(prob, 7, seed=5, keep_paths=True, batch=3)
        b = spde.solve_mild(prob, 7, seed=5, keep_paths=True, batch=512)
        np.testing.assert_array_equal(a.paths, spde.solve_mild(prob, 7, seed=5, keep_paths=True, batch=3).paths)
        # batched FFTs may round differently in the last bit
        np.testing.assert_allclose(a.paths, b.paths, rtol=0, atol=1e-14)
        assert not np.array_equal(a.paths[0], a.paths[1])
        c = spde.solve_mild(prob, 7, seed=6)
        assert not np.array_equal(a.energy_T, c.energy_T)

    def test_real_solution(self):
        prob = problem(g=random_profile(2, K=2), M=8)
        sol = spde.solve_mild(prob, 2, keep_paths=True)
        assert np.isrealobj(sol.paths) and np.all(sol.paths[:, 0] == 0.0)

    def test_linearity(self):
        f1, f2 = random_profile(1), random_profile(2)
        g1, g2 = random_profile(3, K=2), random_profile(4, K=2)
        run = lambda f, g: spde.solve_mild(problem(f=f, g=g, M=16), 3, seed=9, keep_paths=True).paths
        combo = run(2 * f1 - f2, 2 * g1 - g2)
        np.testing.assert_allclose(combo, 2 * run(f1, g1) - run(f2, g2), atol=1e-12)

    def test_mean_dynamics(self):
        prob = problem(f=random_profile(1), g=random_profile(2, K=2), M=16)
        sol = spde.solve_mild(prob, 4000, seed=1, keep_paths=True)
        det = spde.solve_deterministic(prob)
        mean = sol.paths.mean(axis=0)
        se = sol.paths.std(axis=0, ddof=1) / math.sqrt(4000)
        z = np.abs(mean - det)[1:] / se[1:]
        # 16 x 16 correlated statistics; a 5 sigma cap keeps the false-alarm rate negligible
        assert z.max() < 5.0

    def test_bad_replica_count(self):
        with pytest.raises(ParameterError):
            spde.solve_mild(problem(), 0)


class TestWiener:
    def test_aggregation(self):
        b = spde.WienerBundle(3, 2, 1.0, 64)
        fine = b.increments(4)
        np.testing.assert_allclose(b.increments(4, 16), fine.reshape(16, 4, 2).sum(axis=1), atol=1e-15)

    def test_increment_variance(self):
        b = spde.WienerBundle(0, 1, 2.0, 50)
        dw = np.concatenate([b.increments(r) for r in range(400)])
        assert dw.var() == pytest.approx(2.0 / 50, rel=0.05)

    def test_non_divisor(self):
        with pytest.raises(ParameterError):
            spde.WienerBundle(0, 1, 1.0, 64).increments(0, 24)

    def test_negative_seed(self):
        with pytest.raises(ParameterError):
            spde.philox_generator(-1, 0, spde.PURPOSE_WIENER)


class TestSecondMoments:
    def test_single_mode_discrete_sum(self):
        k, M, T = 2, 50, 1.0
        prob = problem(g=np.cos(k * GRID.x1d), M=M, T=T)
        lam, dt = PHI(k * k), T / M
        # E|u_hat(T)|^2 for cos(kx): two modes of amplitude n/2, each sum_m e^{-2 (M-m) dt lam} dt
        geo = sum(math.exp(-2 * (M - m) * dt * lam) * dt for m in range(M))
        energy = GRID.L / 2 * geo
        assert spde.second_moments(prob)["energy_T"] == pytest.approx(energy, rel=1e-12)

    def test_closed_form_matches_recursion(self):
        prob = problem(g=random_profile(2, K=3), M=40)
        np.testing.assert_allclose(spde.variance_closed_form(prob), spde.second_moments(prob)["variance_T"],
                                   rtol=1e-12, atol=1e-14)

    def test_channel_additivity(self):
        g = random_profile(5, K=4)
        total = spde.second_moments(problem(g=g))["energy_T"]
        parts = sum(spde.second_moments(problem(g=g[k]))["energy_T"] for k in range(4))
        assert total == pytest.approx(parts, rel=1e-12)

    def test_no_noise(self):
        out = spde.ito_isometry_check(problem(), 50)
        assert out["energy_T"]["monte_carlo"] == out["energy_T"]["exact"] == 0.0
        assert out["pass"]

    def test_monte_carlo(self):
        prob = problem(f=random_profile(1), g=random_profile(2, K=4), M=32)
        out = spde.ito_isometry_check(prob, 3000, seed=2)
        assert out["pass"], out

    def test_std_err_scaling(self):
        prob = problem(g=random_profile(2, K=2), M=16)
        a = spde.ito_isometry_check(prob, 1000, seed=1)["energy_T"]["std_err"]
        b = spde.ito_isometry_check(prob, 4000, seed=1)["energy_T"]["std_err"]
        assert a / b == pytest.approx(2.0, rel=0.15)


class TestApriori:
    def test_zero_data(self):
        rep = spde.apriori_estimate_report(problem(), 2, 3)
        assert rep["solution_norm"] == 0.0 and rep["data_norm"] == 0.0

    def test_deterministic_mode_ratio(self):
        k, M = 3, 32
        prob = problem(f=np.cos(k * GRID.x1d), M=M)
        rep = spde.apriori_estimate_report(prob, 2, 2)
        # u_m = c_m cos(kx), read c_m at x = 0; every norm carries the same factor ||cos||_2
        c = spde.solve_deterministic(prob)[:-1, 0]
        dt, lam = 1.0 / M, PHI(k * k)
        bessel = math.sqrt(dt * np.sum(((1 + lam) * c) ** 2))
        drift = math.sqrt(dt * np.sum((1 - lam * c) ** 2))
        expected = bessel + drift
        assert rep["n_hat"] == pytest.approx(expected, rel=1e-10)
        assert spde.apriori_estimate_report(prob, 2, 5)["n_hat"] == rep["n_hat"]

    def test_rejects_small_p(self):
        with pytest.raises(ParameterError):
            spde.apriori_estimate_report(problem(f=random_profile(1)), 1.5, 2)

    def test_sweep_stability(self):
        def make_problem(level):
            grid = TorusGrid(1, 2 * math.pi, 16 * 2 ** level)
            return problem(f=random_profile(1, grid=grid), g=random_profile(2, K=2, grid=grid),
                           M=16 * 2 ** level, grid=grid)

        rep = spde.apriori_sweep(make_problem, 4, 200, seed=3)
        assert rep.inequality_id == "thm6.5"
        assert rep.passed and np.isfinite(rep.n_hat)


class TestWeakForm:
    def test_zero_mode_exact(self):
        prob = problem(f=random_profile(1), g=random_profile(2, K=2), M=32)
        psi = spde.gaussian_test_function(GRID, math.inf)
        assert spde.weak_form_residual(prob, 0, psi) <= 1e-12

    def test_deterministic_first_order(self):
        psi = spde.gaussian_test_function(GRID, 0.6)
        res = [spde.weak_form_residual(problem(f=random_profile(1), M=M), 0, psi) for M in (32, 64, 128)]
        assert res[0] / res[1] == pytest.approx(2.0, rel=0.15)
        assert res[1] / res[2] == pytest.approx(2.0, rel=0.15)

    def test_stochastic_order_at_least_half(self):
        psi = spde.gaussian_test_function(GRID, 0.6)
        bundle = spde.WienerBundle(11, 2, 1.0, 512)
        g = random_profile(2, K=2)
        res = [np.mean([spde.weak_form_residual(problem(g=g, M=M), r, psi, bundle=bundle)
                        for r in range(8)]) for M in (64, 128, 256)]
        assert res[0] / res[1] >= math.sqrt(2) * 0.95
        assert res[1] / res[2] >= math.sqrt(2) * 0.95
