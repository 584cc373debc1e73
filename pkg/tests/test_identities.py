import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htevec.errors import DomainError, ParameterError
from htevec.identities import LOG_RADIUS, prod_exp_gap, resolvent_bound, schur_trace_delta


def _sym(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    return (a + a.T) / 2


def test_schur_zero_matrix():
    lhs, rhs = schur_trace_delta(np.zeros((2, 2)), np.eye(2), 1, 1j)
    assert lhs == pytest.approx(-1j, abs=1e-15)
    assert rhs == pytest.approx(-1j, abs=1e-15)


def test_schur_random_matrix():
    a = _sym(10, 0)
    P = np.diag(np.random.default_rng(1).uniform(-1, 1, 10))
    lhs, rhs = schur_trace_delta(a, P, 3, 1 + 2j)
    assert abs(lhs - rhs) < 1e-10


def test_resolvent_difference_bound():
    a = _sym(50, 2) / np.sqrt(50)
    P = np.diag((np.arange(50) < 20).astype(float))
    for k in (0, 17, 49):
        lhs, _ = schur_trace_delta(a, P, k, 0.5j)
        assert abs(lhs) <= 10.0
    assert resolvent_bound(P, 0.5j) == 10.0


@given(st.integers(3, 12), st.integers(0, 10_000), st.floats(-3, 3), st.floats(0.05, 3))
@settings(max_examples=50, deadline=None)
def test_schur_identity_property(n, seed, x, y):
    a = _sym(n, seed)
    P = np.diag(np.random.default_rng(seed + 1).integers(0, 2, n).astype(float))
    k = seed % n
    lhs, rhs = schur_trace_delta(a, P, k, complex(x, y))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_schur_validates_arguments():
    with pytest.raises(DomainError):
        schur_trace_delta(np.eye(2), np.eye(2), 0, 1.0)
    with pytest.raises(ParameterError):
        schur_trace_delta(np.eye(2), np.eye(2), 2, 1j)


def test_prod_exp_zero_vector():
    gap, bound, ok = prod_exp_gap(np.zeros(10), 10)
    assert (gap, bound) == (0.0, 0.0) and ok


def test_prod_exp_constant_vector():
    gap, bound, ok = prod_exp_gap(np.ones(100), 100)
    assert ok
    assert gap == pytest.approx(abs(1.01**100 - np.e), rel=1e-12)
    assert gap <= np.exp(1.01) / 100
    assert bound == pytest.approx(np.exp(1.01) / 100, rel=1e-12)


def test_prod_exp_outside_disc_not_applicable():
    _, _, ok = prod_exp_gap(np.array([0.9 * 10]), 10)
    assert not ok


@given(st.integers(1, 60), st.integers(0, 10_000), st.floats(0.01, 0.999))
@settings(max_examples=100, deadline=None)
def test_prod_exp_bound_holds(n, seed, frac):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    u *= frac * LOG_RADIUS * n / np.max(np.abs(u))
    gap, bound, ok = prod_exp_gap(u, n)
    assert ok and gap <= bound * (1 + 1e-12)


def test_log_radius_is_sharp():
    r = LOG_RADIUS
    th = np.linspace(0, 2 * np.pi, 2001)
    for rad, expect in ((r * 0.999, True), (r * 1.01, False)):
        z = rad * np.exp(1j * th)
        holds = bool(np.all(np.abs(np.log1p(z) - z) <= np.abs(z) ** 2))
        assert holds is expect
