import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import special

from paretocoal.specfun import (
    EULER_GAMMA,
    digamma,
    log_abs_gamma,
    log_beta,
    log_binomial,
    log_gamma,
)


class TestLogGamma:
    def test_known_values(self):
        assert abs(log_gamma(1.0)) < 1e-14
        assert abs(log_gamma(2.0)) < 1e-14
        assert_allclose(log_gamma(0.5), 0.5 * math.log(math.pi), rtol=1e-13)
        assert_allclose(log_gamma(10.0), math.log(362880.0), rtol=1e-13)

    def test_matches_reference_over_wide_range(self):
        x = np.concatenate(
            [
                np.geomspace(1e-3, 1.0, 400),
                np.linspace(1.0, 200.0, 400),
                np.geomspace(200.0, 1e6, 200),
            ]
        )
        ours = log_gamma(x)
        ref = special.gammaln(x)
        err = np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))
        assert err.max() < 1e-12

    def test_recurrence_thousand_points(self):
        rng = np.random.default_rng(1234)
        x = rng.uniform(1e-6, 100.0, size=1000)
        lhs = log_gamma(x + 1.0)
        rhs = log_gamma(x) + np.log(x)
        assert np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))) < 1e-11

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e5))
    def test_recurrence_property(self, x):
        assert log_gamma(x + 1.0) == pytest.approx(
            log_gamma(x) + math.log(x), rel=1e-11, abs=1e-11
        )

    def test_domain_errors(self):
        for bad in (0.0, -1.0, -0.5, float("nan")):
            with pytest.raises(ValueError):
                log_gamma(bad)
        with pytest.raises(ValueError):
            log_gamma(np.array([1.0, -2.0]))


class TestLogAbsGamma:
    def test_negative_half(self):
        val, sign = log_abs_gamma(-0.5)
        assert sign == -1
        assert_allclose(val, math.log(2.0 * math.sqrt(math.pi)), rtol=1e-13)

    def test_two(self):
        val, sign = log_abs_gamma(2.0)
        assert sign == 1
        assert abs(val) < 1e-14

    def test_minus_three_halves(self):
        # Gamma(-1.5) = Gamma(0.5) / ((-1.5)(-0.5)) = 4 sqrt(pi) / 3 > 0
        val, sign = log_abs_gamma(-1.5)
        assert sign == 1
        assert_allclose(val, math.log(4.0 * math.sqrt(math.pi) / 3.0), rtol=1e-12)

    def test_sign_alternates_on_negative_unit_intervals(self):
        signs = [log_abs_gamma(-k - 0.5)[1] for k in range(6)]
        assert signs == [-1, 1, -1, 1, -1, 1]

    def test_poles_raise(self):
        for bad in (0.0, -1.0, -7.0):
            with pytest.raises(ValueError):
                log_abs_gamma(bad)

    @settings(max_examples=150, deadline=None)
    @given(
        st.floats(min_value=-40.0, max_value=-1e-3).filter(
            lambda x: abs(x - round(x)) > 1e-4
        )
    )
    def test_reflection_against_reference(self, x):
        val, sign = log_abs_gamma(x)
        ref = special.gammaln(x)  # scipy returns log|Gamma| for x < 0
        assert val == pytest.approx(float(ref), rel=1e-10, abs=1e-10)
        assert sign == special.gammasgn(x)


class TestDigamma:
    def test_known_values(self):
        assert_allclose(digamma(1.0), -EULER_GAMMA, atol=1e-12)
        assert_allclose(digamma(2.0), 1.0 - EULER_GAMMA, atol=1e-12)
        assert_allclose(
            digamma(0.5), -EULER_GAMMA - 2.0 * math.log(2.0), atol=1e-12
        )

    def test_against_reference(self):
        x = np.concatenate(
            [np.geomspace(1e-3, 1.0, 300), np.geomspace(1.0, 1e6, 300)]
        )
        assert np.max(np.abs(digamma(x) - special.digamma(x))) < 1e-10

    def test_matches_finite_difference_of_log_gamma(self):
        h = 1e-5
        x = np.linspace(0.1, 50.0, 197)
        fd = (log_gamma(x + h) - log_gamma(x - h)) / (2.0 * h)
        assert np.max(np.abs(digamma(x) - fd)) < 1e-6

    def test_domain_error(self):
        with pytest.raises(ValueError):
            digamma(0.0)
        with pytest.raises(ValueError):
            digamma(-3.2)


class TestLogBeta:
    def test_known_values(self):
        assert_allclose(log_beta(2.0, 3.0), math.log(1.0 / 12.0), rtol=1e-13)
        assert_allclose(log_beta(0.5, 1.5), math.log(math.pi / 2.0), rtol=1e-13)

    def test_first_argument_one(self):
        for b in (0.25, 1.0, 7.5, 40.0):
            assert_allclose(log_beta(1.0, b), -math.log(b), atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(min_value=1e-3, max_value=1e3),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_symmetry_exact(self, a, b):
        assert log_beta(a, b) == log_beta(b, a)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            log_beta(0.0, 1.0)
        with pytest.raises(ValueError):
            log_beta(1.0, -2.0)


class TestLogBinomial:
    def test_integer_values(self):
        for n, k in [(5, 2), (10, 0), (10, 10), (52, 5)]:
            assert_allclose(
                log_binomial(n, k), math.log(math.comb(n, k)), atol=1e-11
            )

    def test_domain_error(self):
        with pytest.raises(ValueError):
            log_binomial(3, 5)
        with pytest.raises(ValueError):
            log_binomial(3, -1)
