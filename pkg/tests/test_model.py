import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellfield.model import (ConditioningError, CovarianceMatrix, SceneParams, UnphysicalStateError, alpha_min,
                             build_covariance, desitter_spectra, minkowski_spectra, precision_blocks, purity,
                             reduced_a)
from bellfield.numeric import MatrixError
from bellfield.window import DivergenceError, shape_G

# frozen reference: independent mpmath moments (see test_window), delta = 0.1
K1_0, K3_0, L1_0, L3_0 = 2.0250547090132121, 13.077367292966563, 0.11744433769386288, -0.035556749138063426
KM1_B, K1_B, LM1_B, L1_B = 9.6387411529499086, 2.0250547040132121, 8.5093187689375795, 0.11744433269386292


def _scale():
    return 3 * math.pi * shape_G(0.1)


def test_minkowski_covariance_from_moments(mink_gamma):
    s = _scale()
    ref = (K1_0 / s, 0.0, K3_0 / s, L1_0 / s, 0.0, L3_0 / s)
    for got, want in zip(mink_gamma.as_tuple(), ref):
        assert got == pytest.approx(want, rel=1e-12, abs=0)


def test_desitter_covariance_from_moments(ds_gamma):
    s = _scale()
    # the K3 and L3 integrands vanish like z^3 at the cutoff, so beta=1e-4 leaves them unchanged
    ref = ((KM1_B + K1_B) / s, -K1_B / s, K3_0 / s, (LM1_B + L1_B) / s, -L1_B / s, L3_0 / s)
    for got, want in zip(ds_gamma.as_tuple(), ref):
        assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("scene", [SceneParams.minkowski(3.0, 0.1), SceneParams.minkowski(4.5, 1.0, 1e-3),
                                   SceneParams.desitter(1.0, 3.0, 1e-4, 0.1), SceneParams.desitter(50.0, 2.1, 1e-3, 0.05)])
def test_spectra_route_agrees_with_moments(scene):
    a = build_covariance(scene)
    b = build_covariance(scene, "spectra")
    d = np.sqrt(np.diag(a.full()))
    assert np.max(np.abs(a.full() - b.full()) / np.outer(d, d)) < 1e-9


def test_spectra_polynomials():
    m = minkowski_spectra()
    assert m.p_phiphi(2.0) == pytest.approx(4 / (4 * math.pi ** 2))
    assert m.p_phipi(2.0) == 0.0
    assert m.p_pipi(2.0) == pytest.approx(16 / (4 * math.pi ** 2))
    d = desitter_spectra(3.0)
    assert d.p_phiphi(2.0) == pytest.approx((4 + 9) / (4 * math.pi ** 2))
    assert d.p_phipi(2.0) == pytest.approx(-3 * 4 / (4 * math.pi ** 2))
    with pytest.raises(ValueError):
        desitter_spectra(0.0)


def test_purity_and_uncertainty(mink_gamma, ds_gamma):
    for g in (mink_gamma, ds_gamma):
        assert g.is_positive_definite()
        assert g.det() >= 1 / 16 - 1e-9
        p = purity(g)
        assert 0 < p <= 1
        assert p == pytest.approx(1 / (4 * math.sqrt(np.linalg.det(g.full()))), rel=1e-12)


def test_purity_rejects_unphysical_states():
    with pytest.raises(UnphysicalStateError):
        purity(CovarianceMatrix(0.1, 0.0, 0.1, 0.0, 0.0, 0.0))
    with pytest.raises(MatrixError):
        purity(CovarianceMatrix(1.0, 0.0, 1.0, 2.0, 0.0, 0.0))


def test_block_determinant_matches_numpy(ds_gamma):
    assert ds_gamma.det() == pytest.approx(np.linalg.det(ds_gamma.full()), rel=1e-12)


def test_reduced_a_is_inverse_field_marginal(mink_gamma, ds_gamma):
    for g in (mink_gamma, ds_gamma):
        a = reduced_a(g)
        marg = np.array([[g.g11, g.g13], [g.g13, g.g11]])
        assert np.allclose(a.matrix(), np.linalg.inv(marg), rtol=1e-11, atol=0)
        assert a.det() > 0


def test_schur_determinant_identity(ds_gamma):
    b = precision_blocks(ds_gamma)
    prod = ds_gamma.det() * np.linalg.det(b.pipi) * np.linalg.det(b.a)
    assert prod == pytest.approx(1.0, abs=1e-10)


def test_patch_exchange_symmetry(ds_gamma):
    full = ds_gamma.full()
    swap = [2, 3, 0, 1]
    assert np.array_equal(full[np.ix_(swap, swap)], full)


def test_ill_conditioned_covariance_is_refused():
    g = CovarianceMatrix(1e9, 0.0, 1.0, 1e9 * (1 - 1e-12), 0.0, 0.0)
    with pytest.raises(ConditioningError):
        precision_blocks(g)


def test_small_HR_reduces_to_flat_space():
    beta, delta, alpha = 1e-4, 1e-2, 3.0
    ds = build_covariance(SceneParams.desitter(1e-6, alpha, beta, delta)).full()
    flat = build_covariance(SceneParams.minkowski(alpha, delta, beta)).full()
    d = np.sqrt(np.diag(flat))
    assert np.max(np.abs(ds - flat) / np.outer(d, d)) < 1e-6


def test_scene_validation():
    assert alpha_min(0.1) == pytest.approx(2.2)
    with pytest.raises(ValueError):
        SceneParams.minkowski(2.0, 0.1)
    with pytest.raises(ValueError):
        SceneParams.desitter(0.0, 3.0, 1e-4, 0.1)
    with pytest.raises(ValueError):
        SceneParams("flat", 3.0, SceneParams.minkowski(3.0, 0.1).window)
    with pytest.raises(ValueError):
        SceneParams.minkowski(3.0, 0.1, beta=1.5)
    with pytest.raises(ValueError):
        build_covariance(SceneParams.minkowski(3.0, 0.1), method="guess")


def test_infrared_divergence_without_cutoff():
    with pytest.raises(DivergenceError):
        build_covariance(SceneParams.desitter(1.0, 3.0, 0.0, 0.1))


@given(alpha_extra=st.floats(0.0, 50.0), delta=st.floats(0.005, 3.0), log_beta=st.floats(-6, -1),
       log_hr=st.floats(-3, 3))
def test_desitter_state_is_physical(alpha_extra, delta, log_beta, log_hr):
    s = SceneParams.desitter(10 ** log_hr, alpha_min(delta) + alpha_extra, 10 ** log_beta, delta)
    g = build_covariance(s)
    assert g.is_positive_definite()
    assert g.det() >= 1 / 16 - 1e-9
    assert 0 < purity(g) <= 1
    assert abs(g.g13) < g.g11


@given(alpha_extra=st.floats(0.0, 200.0), delta=st.floats(0.001, 10.0))
def test_minkowski_state_is_physical(alpha_extra, delta):
    g = build_covariance(SceneParams.minkowski(alpha_min(delta) + alpha_extra, delta))
    assert g.det() >= 1 / 16 - 1e-9
    assert g.g12 == 0.0 and g.g14 == 0.0
