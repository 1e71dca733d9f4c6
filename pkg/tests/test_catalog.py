import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernstein_lp.catalog import (ENTRY_NAMES, BernsteinFunction, LogLattice, catalog_entry,
                                  check_scaling_conditions, default_catalog, entry_from_dict,
                                  make, phi_scaled, tail_integral_ratio,
                                  verify_derivative_ratio, verify_tail_integral)
from bernstein_lp.reports import DomainError, ParameterError, ScalingViolation

CATALOG = default_catalog()


class TestEvaluation:
    def test_power_law(self):
        assert make("stable", alpha=1.0)(4.0) == pytest.approx(2.0, rel=1e-15)

    def test_two_power_normalized(self):
        phi = make("two_power", alpha=0.3, beta=0.7)
        assert phi.c0 == pytest.approx(2.0)
        assert phi(1.0) == 1.0

    def test_relativistic_value(self):
        phi = make("relativistic", alpha=1.0, m=1.0)
        assert phi.c0 == pytest.approx(math.sqrt(2) - 1, rel=1e-14)
        assert phi(3.0) == pytest.approx(1.0 / (math.sqrt(2) - 1), rel=1e-13)

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_normalized_and_increasing(self, name):
        phi = CATALOG[name]
        assert phi(1.0) == pytest.approx(1.0, rel=1e-15)
        assert phi(0.0) == 0.0
        lam = np.geomspace(1e-8, 1e8, 400)
        assert np.all(np.diff(phi(lam)) > 0)

    def test_negative_lambda_rejected(self):
        with pytest.raises(DomainError):
            CATALOG["stable"](-1.0)

    @pytest.mark.parametrize("name,params", [
        ("log_up", {"alpha": 0.6, "beta": 0.5}),
        ("two_power", {"alpha": 0.7, "beta": 0.3}),
        ("stable", {"alpha": 2.0}),
        ("relativistic", {"m": -1.0}),
    ])
    def test_parameter_constraints(self, name, params):
        with pytest.raises(ParameterError):
            BernsteinFunction(name, params)

    def test_nonzero_drift_rejected(self):
        with pytest.raises(ParameterError):
            BernsteinFunction("stable", drift=1.0)


class TestDerivatives:
    def test_power_rule(self):
        for alpha in (0.4, 1.0, 1.6):
            assert make("stable", alpha=alpha).deriv(1.0, 1) == pytest.approx(alpha / 2, rel=1e-14)

    def test_two_power_second_derivative_vs_difference_oracle(self):
        phi = make("two_power", alpha=0.4, beta=0.9)
        raw = lambda x: (x ** 0.4 + x ** 0.9) / 2.0
        h = 1e-3 / 4
        fd = (raw(2.0 + h) - 2 * raw(2.0) + raw(2.0 - h)) / h ** 2
        assert phi.deriv(2.0, 2) == pytest.approx(fd, abs=1e-6)

    def test_difference_path_against_hand_derivatives(self):
        a, b = 0.5, 0.5
        phi = make("power_mix", alpha=a, beta=b)
        lam = np.array([0.01, 0.7, 3.0, 250.0])
        base = lam + lam ** a
        d1 = b * base ** (b - 1) * (1 + a * lam ** (a - 1)) / phi.c0
        d2 = (b * (b - 1) * base ** (b - 2) * (1 + a * lam ** (a - 1)) ** 2
              + b * base ** (b - 1) * a * (a - 1) * lam ** (a - 2)) / phi.c0
        np.testing.assert_allclose(phi.deriv(lam, 1), d1, rtol=1e-7)
        np.testing.assert_allclose(phi.deriv(lam, 2), d2, rtol=1e-6)

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_alternating_signs(self, name):
        phi = CATALOG[name]
        lam = np.geomspace(1e-6, 1e6, 49)
        for n in range(1, 7):
            vals = phi.deriv(lam, n)
            sign = (-1) ** (n + 1)
            assert np.all(sign * vals >= -1e-12 * phi(lam) / lam ** n), (name, n)

    def test_order_out_of_range(self):
        with pytest.raises(ParameterError):
            CATALOG["stable"].deriv(1.0, 7)


class TestInverse:
    def test_power_law(self):
        assert make("stable", alpha=1.0).inverse(3.0) == pytest.approx(9.0, rel=1e-13)

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_unit_value(self, name):
        assert CATALOG[name].inverse(1.0) == pytest.approx(1.0, rel=1e-12)

    def test_residual(self):
        phi = make("two_power", alpha=0.3, beta=0.7)
        lam = phi.inverse(5.0)
        assert abs(phi(lam) - 5.0) <= 5e-12

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(ENTRY_NAMES), st.floats(-8.0, 8.0))
    def test_inverse_of_eval(self, name, log_lam):
        phi = CATALOG[name]
        lam = 10.0 ** log_lam
        assert phi.inverse(phi(lam)) == pytest.approx(lam, rel=1e-10)

    def test_characteristic_scale(self):
        phi = CATALOG["log_cosh"]
        for t in (0.1, 1.0, 7.0):
            assert t * phi(phi.a_t(t) ** -2) == pytest.approx(1.0, rel=1e-12)

    def test_nonpositive_value_rejected(self):
        with pytest.raises(DomainError):
            CATALOG["stable"].inverse(0.0)


class TestScaled:
    @pytest.mark.parametrize("a", [0.3, 1.0, 5.0])
    def test_unit(self, a):
        assert phi_scaled(CATALOG["log_sinh"], a, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_power_scale_invariance(self):
        phi = make("stable", alpha=1.2)
        lam = np.geomspace(1e-3, 1e3, 13)
        np.testing.assert_allclose(phi_scaled(phi, 2.0, lam), lam ** 0.6, rtol=1e-14)

    def test_direct_formula(self):
        phi = make("two_power", alpha=0.3, beta=0.7)
        direct = (16 ** 0.3 + 16 ** 0.7) / (4 ** 0.3 + 4 ** 0.7)
        assert phi_scaled(phi, 0.5, 4.0) == pytest.approx(direct, rel=1e-14)


class TestScalingConditions:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_power_exponents(self, alpha):
        ex = check_scaling_conditions(make("stable", alpha=alpha))
        for delta in (ex.delta1, ex.delta2, ex.delta3):
            assert delta == pytest.approx(alpha / 2, abs=1e-3)

    def test_two_power_exponents(self):
        a, b = 0.3, 0.7
        ex = check_scaling_conditions(make("two_power", alpha=a, beta=b))
        # log-slope of the sum is (a u^a + b u^b)/(u^a + u^b): (a+b)/2 at u=1, -> b at infinity.
        # The first lattice secant sits half a cell (log 10 / 80) above u=1, where the
        # slope grows at rate (b-a)^2/4.
        first_secant = (a + b) / 2 + (b - a) ** 2 / 4 * math.log(10) / 80
        assert ex.delta1 == pytest.approx(first_secant, abs=1e-5)
        assert ex.delta2 == pytest.approx(b, abs=1e-2)
        assert ex.delta3 == pytest.approx(a, abs=1e-2)

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_two_sided_bound_spot(self, name):
        ratio = CATALOG[name](6.0) / CATALOG[name](2.0)
        assert 1.0 <= ratio <= 3.0

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_every_entry_succeeds(self, name):
        entry = catalog_entry(name)
        assert 0 < entry.exponents.delta1 <= entry.exponents.delta2 < 1

    def test_non_bernstein_candidate(self):
        class Convex:
            def __call__(self, lam):
                return np.asarray(lam, dtype=float) ** 1.5

        with pytest.raises(ScalingViolation):
            check_scaling_conditions(Convex())

    def test_coarse_lattice_rejected(self):
        with pytest.raises(ParameterError):
            check_scaling_conditions(CATALOG["stable"], LogLattice(1e-4, 1e4, 10))

    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_concavity_consequences(self, name):
        phi = CATALOG[name]
        t = np.geomspace(1e-4, 1e4, 41)
        for lam in (1.0, 2.5, 40.0):
            assert np.all(phi(lam * t) <= lam * phi(t) * (1 + 1e-12))
        q = phi(t) / t
        assert np.all(np.diff(q) <= 0)


class TestDerivativeRatio:
    @pytest.mark.parametrize("alpha", [0.6, 1.4])
    def test_power(self, alpha):
        rep = verify_derivative_ratio(make("stable", alpha=alpha), 1)
        assert rep.n_hat == pytest.approx(alpha / 2, abs=1e-6)
        assert rep.passed

    def test_two_power(self):
        rep = verify_derivative_ratio(make("two_power", alpha=0.3, beta=0.7), 1)
        assert rep.n_hat <= 0.7 + 1e-3

    def test_relativistic_second_order(self):
        rep = verify_derivative_ratio(make("relativistic", alpha=1.0, m=1.0), 2)
        assert np.isfinite(rep.n_hat) and rep.passed


class TestTailIntegral:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_power(self, alpha):
        phi = make("stable", alpha=alpha)
        for lam in (0.1, 1.0, 30.0):
            assert tail_integral_ratio(phi, lam) == pytest.approx(1 / alpha, abs=1e-4)

    def test_sqrt_variant_power(self):
        phi = make("stable", alpha=1.0)
        # sqrt(phi) is the power with exponent alpha/4, so the ratio is 2/alpha
        assert tail_integral_ratio(phi, 3.0, sqrt_variant=True) == pytest.approx(2.0, abs=1e-4)

    def test_two_power(self):
        rep = verify_tail_integral(make("two_power"), lambdas=np.array([0.1, 1.0, 10.0]))
        assert rep.passed and np.isfinite(rep.n_hat)


class TestSerialization:
    @pytest.mark.parametrize("name", ENTRY_NAMES)
    def test_round_trip(self, name):
        phi = CATALOG[name]
        assert entry_from_dict(json.loads(json.dumps(phi.to_dict()))) == phi

    def test_entry_json_fields(self):
        data = json.loads(catalog_entry("stable", alpha=1.0).to_json())
        assert {"name", "params", "normalization", "exponents"} <= set(data)
        assert data["exponents"]["delta1"] == pytest.approx(0.5, abs=1e-3)
