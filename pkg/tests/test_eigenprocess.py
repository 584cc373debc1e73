import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from htevec.eigenprocess import (
    SpectralDecomposition,
    bivariate_process,
    cumulative_overlaps,
    decompose,
    detect_atoms,
    eigenvalue_process,
    empirical_cdf,
    floor_count,
    increment,
    quadrature_identity_check,
    resolvent_stat,
    resolvent_stat_trace,
    vector_spectral_measure,
)
from htevec.ensembles import EnsembleSpec, Kind, sample_matrix
from htevec.errors import DomainError, NumericError, ParameterError

LEVY = EnsembleSpec(Kind.LEVY, alpha=1.5, seed=3)


def _sym(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    return (a + a.T) / 2


def test_identity_matrix_gets_haar_basis():
    dec = decompose(np.eye(3), rng=np.random.default_rng(0))
    assert dec.clusters == 1
    dec.check()
    assert not np.allclose(dec.overlaps, np.eye(3))
    # Haar overlaps average to 1/n
    mean = np.mean([decompose(np.eye(3), rng=np.random.default_rng(k)).overlaps for k in range(400)], axis=0)
    np.testing.assert_allclose(mean, 1 / 3, atol=0.05)


def test_distinct_diagonal_gives_identity_overlaps():
    dec = decompose(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(dec.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(dec.overlaps, np.eye(3), atol=1e-15)
    assert dec.clusters == 0


def test_reconstruction_of_diagonal_moments():
    a = _sym(40, 1)
    dec = decompose(a)
    # sum_j w_ij lam_j^k = (A^k)_ii
    for k in (1, 2, 3):
        np.testing.assert_allclose(dec.overlaps @ dec.eigenvalues**k,
                                   np.diag(np.linalg.matrix_power(a, k)), atol=1e-8)


@given(arrays(np.float64, (7, 7), elements=st.floats(-5, 5)))
@settings(max_examples=60, deadline=None)
def test_overlaps_doubly_stochastic(x):
    a = (x + x.T) / 2
    dec = decompose(a)
    assert dec.check(1e-10) <= 1e-10
    assert np.all(np.diff(dec.eigenvalues) >= 0)


def test_decompose_rejects_asymmetric_and_nonsquare():
    with pytest.raises(ParameterError):
        decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ParameterError):
        decompose(np.zeros((2, 3)))


def test_check_flags_non_stochastic():
    with pytest.raises(NumericError):
        SpectralDecomposition.from_overlaps(np.full((3, 3), 0.5)).check()


def test_bivariate_boundaries_vanish_exactly():
    dec = decompose(sample_matrix(LEVY, 17))
    g = np.linspace(0, 1, 6)
    v = bivariate_process(dec, g, g).values
    assert np.all(v[0] == 0) and np.all(v[-1] == 0)
    assert np.all(v[:, 0] == 0) and np.all(v[:, -1] == 0)


def test_bivariate_identity_two_by_two():
    dec = SpectralDecomposition.from_overlaps(np.eye(2))
    assert bivariate_process(dec, [0.5], [0.5]).value(0.5, 0.5) == pytest.approx(0.35355339059327373, abs=1e-15)


def test_bivariate_matches_brute_force():
    dec = decompose(_sym(13, 2))
    n = dec.n
    g = np.linspace(0, 1, 5)
    v = bivariate_process(dec, g, g).values
    for i, s in enumerate(g):
        for j, t in enumerate(g):
            a, b = int(np.floor(n * s)), int(np.floor(n * t))
            direct = sum(dec.overlaps[p, q] - 1 / n for p in range(a) for q in range(b)) / np.sqrt(n)
            assert abs(v[i, j] - direct) < 1e-12


def test_floor_count_robust_to_representation():
    assert floor_count(100, 0.29) == 29
    assert floor_count(10, 0.3) == 3


def test_eigenvalue_process_outside_spectrum_is_zero():
    dec = decompose(_sym(9, 3))
    s = np.linspace(0, 1, 4)
    lam = [dec.eigenvalues[0] - 1, dec.eigenvalues[-1], dec.eigenvalues[-1] + 5]
    v = eigenvalue_process(dec, s, lam).values
    assert np.all(v == 0)


def test_eigenvalue_process_is_bivariate_at_empirical_cdf():
    dec = decompose(sample_matrix(EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=8), 30))
    s = np.linspace(0, 1, 7)
    lam = np.linspace(-3, 3, 25)
    c = eigenvalue_process(dec, s, lam).values
    b = bivariate_process(dec, s, empirical_cdf(dec, lam)).values
    assert np.max(np.abs(c - b)) < 1e-12


def test_resolvent_stat_vanishes_at_ends():
    dec = decompose(_sym(11, 4))
    for s in (0.0, 1.0):
        assert resolvent_stat(dec, s, 1 + 2j).value == 0


def test_resolvent_stat_conjugate_symmetry():
    dec = decompose(_sym(11, 5))
    z = 0.3 + 1.1j
    assert resolvent_stat(dec, 0.4, z.conjugate()).value == pytest.approx(
        resolvent_stat(dec, 0.4, z).value.conjugate(), abs=1e-14)


def test_resolvent_trace_and_eigen_forms_agree():
    a = _sym(30, 6)
    dec = decompose(a)
    for s, z in [(0.3, 1j), (0.5, -1 + 0.5j), (0.9, 2 - 3j)]:
        assert abs(resolvent_stat(dec, s, z).value - resolvent_stat_trace(a, s, z)) < 1e-9


def test_resolvent_stat_rejects_real_z():
    with pytest.raises(DomainError):
        resolvent_stat(decompose(np.eye(2)), 0.5, 1.0)


def test_quadrature_identity_small_diagonal():
    dec = decompose(np.diag([-1.0, 1.0]))
    assert quadrature_identity_check(dec, 0.5, 2j) < 1e-12
    assert quadrature_identity_check(dec, 0.0, 2j) == 0


def test_quadrature_identity_levy():
    dec = decompose(sample_matrix(LEVY, 50))
    for s, z in [(0.5, 1j), (0.2, -0.5 + 0.3j), (0.77, 3 + 1j)]:
        assert quadrature_identity_check(dec, s, z) < 1e-9


def test_increment_and_cumulative_consistent():
    dec = decompose(_sym(10, 7))
    g = np.linspace(0, 1, 6)
    surf = bivariate_process(dec, g, g)
    cw = cumulative_overlaps(dec)
    d = increment(surf, 0.2, 0.6, 0.4, 1.0)
    direct = (cw[6, 10] - cw[2, 10] - cw[6, 4] + cw[2, 4]) / np.sqrt(10)
    assert d == pytest.approx(direct, abs=1e-14)


def test_vector_spectral_measure_is_probability():
    dec = decompose(_sym(8, 8))
    lam, w = vector_spectral_measure(dec, 3)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(lam, dec.eigenvalues)


def test_detect_atoms():
    ev = np.concatenate([np.zeros(300), np.full(40, 1.0), np.linspace(-2, 2, 660)])
    locs, mass = detect_atoms(ev, min_mass=0.01)
    np.testing.assert_allclose(locs, [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(mass, [0.3, 0.04], atol=2e-3)
