import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellfield.numeric import QuadratureSpec
from bellfield.window import (DivergenceError, IntegralParams, WindowSpec, fourier_transform, integral_K, integral_L,
                              integrand_terms, shape_F, shape_G, window_fourier, window_fourier_quadrature,
                              window_value)

# frozen reference: mpmath, 30 digits: direct quadrature of z^mu W~^2 [sinc] up to 40 pi plus a
# contour-rotated tail for each exponential term of the exact transform.
MOMENTS = [
    # (mu, alpha, beta, delta, value)
    (1, 0.0, 0.0, 0.1, 2.0250547090132121),
    (3, 0.0, 0.0, 0.1, 13.077367292966563),
    (1, 3.0, 0.0, 0.1, 0.11744433769386288),
    (3, 3.0, 0.0, 0.1, -0.035556749138063426),
    (-1, 0.0, 1e-4, 0.1, 9.6387411529499086),
    (-1, 3.0, 1e-4, 0.1, 8.5093187689375795),
    (1, 0.0, 1e-4, 0.1, 2.0250547040132121),
    (1, 3.0, 1e-4, 0.1, 0.11744433269386292),
    (1, 2.02, 1e-4, 0.01, 0.28022157557991092),
    (3, 2.02, 1e-4, 0.01, -0.40989812473483602),
    (-1, 2.02, 1e-4, 0.01, 8.8779931634714672),
    (-1, 0.0, 1e-4, 0.01, 9.6849631730075143),
    (3, 0.0, 1e-4, 0.01, 25.598040260519349),
    (1, 0.0, 1e-4, 0.01, 2.2273961110768179),
    (3, 10.0, 1e-2, 1.0, -0.00021453552858038829),
    (1, 2.0002, 0.0, 1e-4, 0.28638336737130656),
    (3, 2.0002, 0.0, 1e-4, -0.45925088784516321),
    (1, 0.0, 0.0, 1e-4, 2.2497749719320985),
    (3, 0.0, 0.0, 1e-4, 46.806556778200451),
]


def _moment(mu, alpha, beta, delta, method="auto"):
    p = IntegralParams(mu, alpha, beta, delta)
    return integral_L(p, method) if alpha else integral_K(p, method)


@pytest.mark.parametrize("mu,alpha,beta,delta,ref", MOMENTS)
def test_moments_match_independent_oracle(mu, alpha, beta, delta, ref):
    assert _moment(mu, alpha, beta, delta) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("mu,alpha,beta,delta,ref", MOMENTS[:15:2])
def test_quadrature_route_matches_oracle(mu, alpha, beta, delta, ref):
    assert _moment(mu, alpha, beta, delta, "quadrature") == pytest.approx(ref, rel=1e-10)


def test_shape_constants():
    assert shape_G(0.0) == 1.0
    assert shape_F(0.0) == 1.0
    w = WindowSpec(0.1)
    assert w.F == pytest.approx(2.1 * 2.21 / 4)
    assert w.G == pytest.approx(8 * (0.001 + 0.05 + 1 + 10) / (5 * 2.1 ** 2 * 2.21 ** 2))
    assert w.support == pytest.approx(1.1)


def test_window_normalised_to_unit_integral():
    w = WindowSpec(0.3)
    r = np.linspace(0, w.support, 200001)
    total = np.trapezoid(4 * math.pi * r * r * window_value(r, w), r)
    assert total == pytest.approx(1.0, rel=1e-8)


def test_window_shape_and_domain():
    w = WindowSpec(0.5)
    assert window_value(0.2, w) == w.plateau
    assert window_value(1.25, w) == pytest.approx(w.plateau / 2)
    assert window_value(2.0, w) == 0.0
    with pytest.raises(ValueError):
        window_value(-0.1, w)
    with pytest.raises(ValueError):
        WindowSpec(0.0)


@pytest.mark.parametrize("z,ref", [(0.3, 0.990060643167307), (2.0, 0.62154383753178996),
                                   (17.0, -0.0049797545207732299)])
def test_fourier_transform_frozen_values(z, ref):
    # frozen reference: mpmath quadrature of the defining radial sine transform, delta = 0.1
    assert fourier_transform(z, 0.1) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("z", [0.0, 1e-6, 0.2, 0.45, 0.6, 3.0, 9.5, 11.0, 40.0])
@pytest.mark.parametrize("delta", [0.01, 0.1, 1.0])
def test_fourier_transform_matches_definition(z, delta):
    w = WindowSpec(delta)
    ref = window_fourier_quadrature(z, w, QuadratureSpec(rel_tol=1e-13))
    assert window_fourier(z, w) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_fourier_transform_top_hat_limit():
    z = np.array([0.1, 1.0, 5.0])
    ref = 3 * (np.sin(z) - z * np.cos(z)) / z ** 3
    assert np.allclose(fourier_transform(z, 0.0), ref, rtol=1e-14)
    assert fourier_transform(0.0, 0.0) == 1.0
    assert fourier_transform(2.0, 1e-9) == pytest.approx(fourier_transform(2.0, 0.0), rel=1e-8)


@given(st.floats(1e-3, 3.0), st.floats(0.0, 50.0))
def test_fourier_transform_bounded(delta, z):
    assert abs(fourier_transform(z, delta)) <= 1.0 + 1e-12


@pytest.mark.parametrize("delta", [1e-3, 0.05, 0.4, 2.0])
def test_fourier_transform_continuous_across_regimes(delta):
    # series / Gauss-Legendre / closed form switch at (1+delta) z = 1/2 and delta z = 1
    for edge in (0.5 / (1 + delta), 1 / delta):
        lo, hi = fourier_transform(np.array([edge * (1 - 1e-12), edge * (1 + 1e-12)]), delta)
        assert abs(hi - lo) < 5e-12


def test_fourier_transform_rejects_negative():
    with pytest.raises(ValueError):
        fourier_transform(-1.0, 0.1)


@given(st.floats(0.5, 60.0), st.sampled_from([1, 3, -1]), st.sampled_from([0.0, 2.5, 7.0]),
       st.sampled_from([0.01, 0.3, 2.0]))
def test_trig_decomposition_reproduces_integrand(z, mu, alpha, delta):
    terms = integrand_terms(mu, alpha, delta)
    total = 0.0
    for co, n, kind, w in terms:
        total += float(co) * z ** (-n) * (math.cos(float(w) * z) if kind == "c" else math.sin(float(w) * z))
    direct = z ** mu * fourier_transform(z, delta) ** 2 * (math.sin(alpha * z) / (alpha * z) if alpha else 1)
    # the term sum cancels heavily at small z
    assert total == pytest.approx(direct, rel=1e-6, abs=1e-9 * max(1.0, z ** mu))


def test_touching_patch_constants_at_small_delta():
    # closed-form delta -> 0 values at touching patches
    d = 1e-4
    a = 2 * (1 + d)
    assert abs(integral_K(IntegralParams(1, 0.0, 0.0, d)) - 9 / 4) < 1e-3
    assert abs(integral_L(IntegralParams(1, a, 0.0, d)) - 3 * (13 - 16 * math.log(2)) / 20) < 1e-3


def test_K3_grows_logarithmically_as_delta_shrinks():
    k = [integral_K(IntegralParams(3, 0.0, 0.0, d)) for d in (1e-2, 1e-3, 1e-4)]
    steps = np.diff(k)
    assert np.all(steps > 0)
    assert steps[1] == pytest.approx(steps[0], rel=0.05)


def test_divergent_parameters_raise():
    with pytest.raises(DivergenceError):
        integral_K(IntegralParams(-1, 0.0, 0.0, 0.1))
    with pytest.raises(DivergenceError):
        integral_L(IntegralParams(-1, 3.0, 0.0, 0.1))
    with pytest.raises(DivergenceError):
        integral_K(IntegralParams(3, 0.0, 1e-3, 0.0))


def test_integral_params_validation():
    with pytest.raises(ValueError):
        IntegralParams(2)
    with pytest.raises(ValueError):
        IntegralParams(1, beta=1.0)
    with pytest.raises(ValueError):
        IntegralParams(1, alpha=-1.0)
    with pytest.raises(ValueError):
        integral_L(IntegralParams(1, 0.0, 0.0, 0.1))
    with pytest.raises(ValueError):
        integral_K(IntegralParams(1), method="simpson")


def test_top_hat_moments_converge_for_mu_one():
    # delta = 0 is allowed where the integral converges
    v = integral_K(IntegralParams(1, 0.0, 0.0, 0.0))
    assert v == pytest.approx(9 / 4, rel=1e-12)


def test_beta_cut_removes_low_wavenumbers():
    full = integral_K(IntegralParams(1, 0.0, 0.0, 0.1))
    cut = integral_K(IntegralParams(1, 0.0, 1e-2, 0.1))
    # W~ ~ 1 near zero, so the removed piece is beta^2 / 2
    assert full - cut == pytest.approx(0.5e-4, rel=1e-3)


def test_analytic_result_is_memoised():
    p = IntegralParams(3, 4.0, 1e-3, 0.2)
    a = integral_L(p)
    b = integral_L(p)
    assert a == b
