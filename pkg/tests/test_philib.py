import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import j1

from htevec.errors import DomainError, UnsupportedKernelError
from htevec.philib import (
    PhiModel,
    bessel_j1,
    g_eval,
    g_transform_residual,
    jinc,
    kernel_identity_residual,
    kernel_tau_tilde,
    phi_eval,
)

ER = PhiModel.erdos_renyi(2.0)
LEVY1 = PhiModel.levy(1.0, 1.0)
GAUSS = PhiModel.gaussian(1.0)
MIXED = PhiModel.exploding(((0.5, 0.0), (1.0, 2.0), (0.3, 0.5)))


def test_phi_erdos_renyi_at_pi():
    assert abs(phi_eval(ER, np.pi) - (-4.0)) < 1e-14


def test_phi_levy_at_minus_i():
    assert abs(phi_eval(LEVY1, -1j) - (-1.0)) < 1e-14


@pytest.mark.parametrize("model", [ER, LEVY1, GAUSS, MIXED, PhiModel.levy(1.5, 1.3)])
def test_phi_vanishes_at_origin(model):
    if model.is_levy:
        assert abs(phi_eval(model, -1e-300j)) < 1e-100
    else:
        assert phi_eval(model, 0.0) == 0


@given(st.floats(-50, 50), st.floats(-50, 0))
@settings(max_examples=200, deadline=None)
def test_phi_has_nonpositive_real_part(x, y):
    lam = complex(x, y)
    for model in (ER, GAUSS, MIXED):
        assert phi_eval(model, lam).real <= 1e-12
    if lam != 0 and not (y == 0 and x > 0):
        assert phi_eval(PhiModel.levy(1.5, 1.3), lam).real <= 1e-12


def test_phi_rejects_upper_half_plane():
    with pytest.raises(DomainError):
        phi_eval(ER, 1 + 1j)


def test_g_gaussian_is_constant():
    y = np.logspace(-4, 3, 50)
    np.testing.assert_allclose(g_eval(PhiModel.gaussian(1.7), y), -1.7**2, rtol=0, atol=1e-15)


def test_g_erdos_renyi_limit_at_zero():
    assert abs(g_eval(ER, 1e-12) + 2.0) < 1e-10


def test_mu_density_closed_form():
    kern = kernel_tau_tilde(ER)
    assert abs(kern.mu_density(1.0) - (-2.0 * j1(2.0))) < 1e-13


@pytest.mark.parametrize("lam", [-2j, 1 - 1j, -3 - 0.5j])
@pytest.mark.parametrize("model", [ER, GAUSS, MIXED, PhiModel.levy(1.5, 1.3), LEVY1])
def test_g_reproduces_phi(model, lam):
    assert g_transform_residual(model, lam) < 1e-6


@pytest.mark.parametrize("x, y", [(2j, 3j), (1 + 1j, 2j), (-0.5 + 1.5j, 0.7 + 1j)])
@pytest.mark.parametrize("model", [ER, MIXED])
def test_kernel_identity(model, x, y):
    assert kernel_identity_residual(model, x, y) < 1e-4


def test_levy_kernel_unsupported():
    with pytest.raises(UnsupportedKernelError):
        kernel_tau_tilde(PhiModel.levy(1.5))


def test_kernel_density_symmetric():
    kern = kernel_tau_tilde(MIXED)
    v = np.linspace(0.01, 20, 37)
    d = kern.density(v[:, None], v[None, :])
    np.testing.assert_allclose(d, d.T, rtol=0, atol=1e-15)


def test_bessel_and_jinc_match_scipy():
    x = np.concatenate([np.linspace(0, 30, 301), np.logspace(1.5, 4, 50)])
    np.testing.assert_allclose(bessel_j1(x), j1(x), rtol=0, atol=1e-12)
    s = x[x > 0]
    np.testing.assert_allclose(jinc(s), 2 * j1(s) / s, rtol=0, atol=1e-12)
    assert jinc(0.0) == 1.0


def test_growth_bounds_hold():
    y = np.logspace(-6, 3, 500)
    for model in (ER, GAUSS, MIXED):
        assert np.all(np.abs(model.g(y)) <= model.K)
    lv = PhiModel.levy(1.5, 1.3)
    assert np.all(np.abs(lv.g(y)) <= lv.K * y**lv.gamma)


def test_from_spec_levy_uses_closed_form():
    from htevec.ensembles import EnsembleSpec, Kind, levy_sigma_closed_form

    m = PhiModel.from_spec(EnsembleSpec(Kind.LEVY, alpha=1.5))
    assert m.sigma == pytest.approx(levy_sigma_closed_form(1.5))
    m2 = PhiModel.from_spec(EnsembleSpec(Kind.LEVY, alpha=1.5), levy_sigma=2.0)
    assert m2.sigma == 2.0
