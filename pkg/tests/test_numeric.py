import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellfield.numeric import (ConvergenceError, DomainError, MatrixError, QuadratureSpec, RangeError,
                               adaptive_integrate, cosine_integral, erf_complex, erf_complex_scaled,
                               gaussian_mc_expectation, sample_gaussian, shell_indices, truncated_double_sum)


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.5, 1.0, 3.7, 25.0, 1e4])
def test_cosine_integral_matches_mpmath(x):
    assert cosine_integral(x) == pytest.approx(float(mp.ci(x)), rel=1e-13, abs=1e-16)


def test_cosine_integral_small_argument_log_behaviour():
    x = 1e-10
    assert cosine_integral(x) == pytest.approx(0.5772156649015329 + math.log(x), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_cosine_integral_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        cosine_integral(x)


@pytest.mark.parametrize("z", [0.1 + 0.2j, 1 + 1j, -2 + 0.5j, 3 - 4j, 0.001j, 5 + 20j, -0.3 - 0.1j])
def test_erf_complex_matches_mpmath(z):
    ref = complex(mp.erf(mp.mpc(z.real, z.imag)))
    assert abs(erf_complex(z) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_erf_complex_real_axis_and_overflow_guard():
    assert erf_complex(0.7).real == pytest.approx(math.erf(0.7), abs=1e-15)
    with pytest.raises(RangeError):
        erf_complex(1 + 30j)


@pytest.mark.parametrize("x,y", [(0.3, 0.2), (4.0, 3.0), (-4.0, 3.0), (-0.2, -5.0), (20.0, 25.0), (-8.0, 40.0)])
def test_scaled_erf_matches_mpmath(x, y):
    with mp.workdps(40):
        ref = complex(mp.exp(-mp.mpf(y) ** 2) * mp.erf(mp.mpc(x, y)))
    got = complex(erf_complex_scaled(x, y))
    assert abs(got - ref) <= 1e-12 * max(abs(ref), 1e-300) + 1e-300


@given(st.floats(-6, 6), st.floats(-6, 6))
def test_scaled_erf_is_odd(x, y):
    a = complex(erf_complex_scaled(x, y))
    b = complex(erf_complex_scaled(-x, -y))
    assert abs(a + b) <= 1e-13 * max(1.0, abs(a))


def test_adaptive_integrate_polynomial_and_smooth():
    assert adaptive_integrate(lambda x: x ** 5, 0, 2) == pytest.approx(64 / 6, rel=1e-14)
    assert adaptive_integrate(np.exp, -1, 1) == pytest.approx(math.e - 1 / math.e, rel=1e-14)


def test_adaptive_integrate_infinite_and_reversed():
    val = adaptive_integrate(lambda x: np.exp(-x * x), 0, math.inf)
    assert val == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-10)
    assert adaptive_integrate(np.sin, math.pi, 0) == pytest.approx(-2.0, rel=1e-12)


def test_adaptive_integrate_endpoint_singularity():
    val = adaptive_integrate(lambda x: 1 / np.sqrt(x), 0, 1, QuadratureSpec(rel_tol=1e-9))
    assert val == pytest.approx(2.0, rel=1e-8)


def test_adaptive_integrate_breakpoints_help_kinks():
    f = lambda x: np.abs(x - 0.3)
    val, err = adaptive_integrate(f, 0, 1, points=[0.3], full_output=True)
    assert val == pytest.approx(0.045 + 0.245, rel=1e-14)
    assert err < 1e-12


def test_adaptive_integrate_reports_nonconvergence():
    with pytest.raises(ConvergenceError) as info:
        adaptive_integrate(lambda x: np.sin(1 / x), 1e-6, 1, QuadratureSpec(rel_tol=1e-14, max_subdivisions=20))
    assert math.isfinite(info.value.estimate)


def test_adaptive_integrate_stops_at_rounding_level():
    # exact value is zero, so a purely relative target could never be met
    val, err = adaptive_integrate(np.cos, 0, 200 * math.pi, full_output=True)
    assert abs(val) < 1e-10
    assert err < 1e-10


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)


def test_shell_indices_cover_square_exactly_once():
    seen = set()
    for order in range(6):
        n, m = shell_indices(order)
        pairs = set(zip(n.tolist(), m.tolist()))
        assert len(pairs) == len(n)
        assert all(max(abs(a), abs(b)) == order for a, b in pairs)
        seen |= pairs
    assert len(seen) == 11 * 11


def test_truncated_double_sum_gaussian_theta():
    # sum over Z^2 of exp(-(n^2 + m^2)/2) equals theta_3(0, e^-1/2)^2
    ref = float(mp.jtheta(3, 0, mp.exp(-0.5))) ** 2
    res = truncated_double_sum(lambda n, m: np.exp(-(n * n + m * m) / 2.0), 1e-14, full_output=True)
    assert res.value == pytest.approx(ref, rel=1e-14)
    assert res.last_shell < 1e-14
    scalar = truncated_double_sum(lambda n, m: math.exp(-(n * n + m * m) / 2.0), 1e-14, vectorized=False)
    assert scalar == pytest.approx(ref, rel=1e-14)


def test_truncated_double_sum_min_order_and_failure():
    res = truncated_double_sum(lambda n, m: np.where((n == 3) & (m == 0), 1.0, 0.0), 1e-12, min_order=4,
                               full_output=True)
    assert res.value == 1.0 and res.order == 4
    with pytest.raises(ConvergenceError) as info:
        truncated_double_sum(lambda n, m: np.ones(n.shape), 1e-10, max_order=5)
    assert info.value.estimate == 121


def test_sampling_is_reproducible_and_has_right_covariance(mink_gamma):
    a = sample_gaussian(mink_gamma, 200_000, seed=7)
    b = sample_gaussian(mink_gamma, 200_000, seed=7)
    assert np.array_equal(a, b)
    cov = np.cov(a.T)
    assert np.allclose(cov, mink_gamma.full(), atol=0.02)


def test_sampling_rejects_bad_matrices():
    with pytest.raises(MatrixError):
        sample_gaussian(np.array([[1.0, 2.0], [2.0, 1.0]]), 10, 0)
    with pytest.raises(MatrixError):
        sample_gaussian(np.array([[1.0, 0.5], [0.0, 1.0]]), 10, 0)


def test_mc_expectation_recovers_second_moment(mink_gamma):
    mean, err = gaussian_mc_expectation(mink_gamma, lambda q: q[:, 0] * q[:, 2] / (2 * math.pi) ** 2, 400_000, 3)
    assert abs(mean - mink_gamma.g13) < 4 * err
    with pytest.raises(ValueError):
        gaussian_mc_expectation(mink_gamma, lambda q: q[:, 0], 10)
