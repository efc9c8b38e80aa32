import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from awgnauth.numerics import (
    chi_square_tail_bound,
    d2,
    gaussian_cdf,
    gaussian_posterior,
    h2,
    i2,
    i2_divergence_form,
    quantization_slack,
)

# Frozen by hand from the defining formulas (nats throughout).
H2_THREE_QUARTERS = 0.5623351446188083
D2_09_05 = 0.36806420716849714
I2_075_05 = 0.130812035941137
I2_23_13 = 0.1239686396190054


class TestH2:
    def test_frozen_value(self):
        assert h2(0.75) == pytest.approx(H2_THREE_QUARTERS, rel=1e-12)

    def test_endpoints(self):
        assert h2(0.0) == 0.0
        assert h2(1.0) == 0.0

    def test_max_at_half(self):
        assert h2(0.5) == pytest.approx(math.log(2.0), rel=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_symmetry(self, a):
        assert h2(a) == pytest.approx(h2(1.0 - a), abs=1e-12)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_range(self, a):
        assert 0.0 <= h2(a) <= math.log(2.0) + 1e-15

    def test_domain(self):
        with pytest.raises(ValueError):
            h2(-0.1)
        with pytest.raises(ValueError):
            h2(1.1)


class TestD2:
    def test_frozen_value(self):
        assert d2(0.9, 0.5) == pytest.approx(D2_09_05, rel=1e-12)

    def test_zero_at_equality(self):
        for a in (0.1, 0.5, 0.9):
            assert d2(a, a) == pytest.approx(0.0, abs=1e-15)

    def test_deterministic_vs_fair(self):
        assert d2(1.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-15)
        assert d2(0.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0),
           st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
    def test_nonnegative(self, a, b):
        assert d2(a, b) >= -1e-15

    def test_domain(self):
        with pytest.raises(ValueError):
            d2(0.5, 0.0)
        with pytest.raises(ValueError):
            d2(0.5, 1.0)
        # Degenerate reference is fine when the distributions coincide.
        assert d2(0.0, 0.0) == 0.0
        assert d2(1.0, 1.0) == 0.0


class TestI2:
    def test_frozen_values(self):
        assert i2(0.75, 0.5) == pytest.approx(I2_075_05, rel=1e-12)
        assert i2(2.0 / 3.0, 1.0 / 3.0) == pytest.approx(I2_23_13, rel=1e-12)

    def test_two_forms_agree_on_grid(self):
        # 100x100 interior grid, both parameterizations, 1e-12 relative.
        grid = np.linspace(0.005, 0.995, 100)
        for a in grid:
            for b in grid:
                if b * (1.0 - a) / (1.0 - b) > 1.0:
                    continue
                x, y = i2(a, b), i2_divergence_form(a, b)
                assert x == pytest.approx(y, rel=1e-9, abs=1e-12)

    @given(st.floats(min_value=0.01, max_value=0.99),
           st.floats(min_value=0.01, max_value=0.99))
    def test_two_forms_agree_property(self, a, b):
        if b * (1.0 - a) / (1.0 - b) > 1.0:
            return
        assert i2(a, b) == pytest.approx(i2_divergence_form(a, b),
                                         rel=1e-9, abs=1e-12)

    def test_mixture_domain_error(self):
        # b(1-a)/(1-b) = 0.9*0.9/0.1 = 8.1 > 1: undefined.
        with pytest.raises(ValueError, match="exceeds 1"):
            i2(0.1, 0.9)

    def test_argument_domain(self):
        with pytest.raises(ValueError):
            i2(0.0, 0.5)
        with pytest.raises(ValueError):
            i2(0.5, 1.0)


class TestChiSquareTailBound:
    def test_small_deviation_regime(self):
        assert chi_square_tail_bound(8, 1.0) == pytest.approx(math.exp(-1.0))
        assert chi_square_tail_bound(32, 0.5) == pytest.approx(math.exp(-1.0))

    def test_large_deviation_regime(self):
        assert chi_square_tail_bound(16, 2.0) == pytest.approx(math.exp(-4.0))

    def test_zero_deviation(self):
        assert chi_square_tail_bound(100, 0.0) == 1.0

    def test_continuous_at_switch(self):
        left = chi_square_tail_bound(40, 1.0 - 1e-12)
        right = chi_square_tail_bound(40, 1.0 + 1e-12)
        assert left == pytest.approx(right, rel=1e-9)

    @given(st.integers(min_value=1, max_value=4096),
           st.floats(min_value=0.0, max_value=10.0))
    def test_valid_probability(self, n, c):
        # Underflow to exactly 0.0 is acceptable for huge exponents.
        assert 0.0 <= chi_square_tail_bound(n, c) <= 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            chi_square_tail_bound(0, 1.0)
        with pytest.raises(ValueError):
            chi_square_tail_bound(8, -0.5)


class TestGaussianPosterior:
    def test_equal_variances(self):
        mean, var = gaussian_posterior(1.0, 1.0, 2.0)
        assert mean == pytest.approx(1.0)
        assert var == pytest.approx(0.5)

    def test_zero_observation(self):
        mean, var = gaussian_posterior(3.0, 1.0, 0.0)
        assert mean == 0.0
        assert var == pytest.approx(0.75)

    @given(st.floats(min_value=1e-3, max_value=1e3),
           st.floats(min_value=1e-3, max_value=1e3),
           st.floats(min_value=-10.0, max_value=10.0))
    def test_variance_contraction(self, rho, a, z):
        _, var = gaussian_posterior(rho, a, z)
        assert var < min(rho, a) + 1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            gaussian_posterior(-1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            gaussian_posterior(0.0, 0.0, 0.0)


class TestQuantizationSlack:
    def test_single_coordinate(self):
        assert quantization_slack(1, [0.5], 1.0) == pytest.approx(1.0)

    def test_two_coordinates(self):
        assert quantization_slack(2, [0.5, 0.5], 2.0) == pytest.approx(
            math.sqrt(2.0) / 2.0)

    def test_monotone_in_c(self):
        slacks = [quantization_slack(3, [1.0, 2.0, 0.5], c)
                  for c in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(slacks, slacks[1:]))

    def test_domain(self):
        with pytest.raises(ValueError, match="length"):
            quantization_slack(2, [1.0], 1.0)
        with pytest.raises(ValueError):
            quantization_slack(1, [1.0], 0.0)
        with pytest.raises(ValueError):
            quantization_slack(1, [0.0], 1.0)


class TestGaussianCdf:
    def test_against_scipy(self):
        xs = np.linspace(-8.0, 8.0, 2001)
        ours = np.array([gaussian_cdf(float(x)) for x in xs])
        ref = norm.cdf(xs)
        assert np.max(np.abs(ours - ref)) <= 1e-12

    def test_symmetry(self):
        assert gaussian_cdf(0.0) == 0.5
        for x in (0.5, 1.7, 3.0):
            assert gaussian_cdf(x) + gaussian_cdf(-x) == pytest.approx(1.0,
                                                                       abs=1e-15)
