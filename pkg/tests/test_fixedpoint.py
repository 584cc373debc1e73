import numpy as np
import pytest
from scipy.integrate import trapezoid

from htevec.errors import DomainError, ParameterError, SolverError
from htevec.fixedpoint import (
    DomainPair,
    SolverConfig,
    block_weights,
    eval_L_pair,
    eval_L_u,
    kappa,
    limit_cov,
    limit_cov_kappa,
    solve_rho_pair,
    solve_rho_s,
    solve_rho_z,
    stieltjes_mu_phi,
)
from htevec.philib import PhiModel
from htevec.population import PopulationSampler

ER = PhiModel.erdos_renyi(2.0)
ZERO = PhiModel.zero()
LEVY = PhiModel.levy(1.5, 1.2254167024651779)


def semicircle(z):
    r = np.sqrt(z * z - 4 + 0j)
    if (r / z).real < 0:
        r = -r
    return (z - r) / 2


# univariate ------------------------------------------------------------------

def test_zero_kernel_gives_zero_solution():
    rho = solve_rho_z(ZERO, 1 + 1j)
    assert np.all(rho.values == 0)
    assert stieltjes_mu_phi(rho) == pytest.approx(1 / (1 + 1j), abs=1e-12)


def test_gaussian_semicircle_value():
    g = stieltjes_mu_phi(solve_rho_z(PhiModel.gaussian(1.0), 2j))
    assert abs(g - (-0.41421356237309503j)) < 1e-6


@pytest.mark.parametrize("z", [0.5 + 0.3j, -1.5 + 1j, 3 - 0.4j])
def test_gaussian_semicircle_off_axis(z):
    assert abs(stieltjes_mu_phi(solve_rho_z(PhiModel.gaussian(1.0), z)) - semicircle(z)) < 1e-6


def test_erdos_renyi_solution_admissible():
    rho = solve_rho_z(ER, 3j)
    assert rho.residual < 1e-9
    assert np.max(rho.values.real) <= 1e-12
    # independent residual through the Nystrom extension
    assert np.max(np.abs(rho.values - rho.nystrom(rho.t))) < 1e-9


def test_erdos_renyi_frozen_values():
    # cross-checked against population dynamics (pool 20000): -0.3761i, -0.2836i
    assert abs(stieltjes_mu_phi(solve_rho_z(ER, 2j)) - (-0.3766893193j)) < 1e-9
    assert abs(stieltjes_mu_phi(solve_rho_z(ER, 3j)) - (-0.2837403214j)) < 1e-9


@pytest.mark.parametrize("model", [ER, LEVY])
def test_solver_agrees_with_population_dynamics(model):
    ps = PopulationSampler(model, pool=20000, sweeps=30, seed=1)
    for z in (2j, 1 + 1j):
        assert abs(stieltjes_mu_phi(solve_rho_z(model, z)) - ps.stieltjes(z)) < 3e-3


def test_stieltjes_conjugate_symmetry():
    z = 0.7 + 0.9j
    a = stieltjes_mu_phi(solve_rho_z(ER, z))
    b = stieltjes_mu_phi(solve_rho_z(ER, z.conjugate()))
    assert abs(b - a.conjugate()) < 1e-10


def test_stieltjes_rejects_other_point():
    with pytest.raises(DomainError):
        stieltjes_mu_phi(solve_rho_z(ER, 2j), 3j)


def test_mass_near_axis():
    """Horizontal sweep at eta = 0.05 carries the mass of the smoothed measure."""
    cfg = SolverConfig(trunc_eps=1e-8)
    E = np.unique(np.concatenate([np.linspace(-4, -2, 11), np.linspace(-2, 2, 81), np.linspace(2, 4, 11)]))
    dens, prev = [], None
    for e in E:
        prev = solve_rho_z(ER, e + 0.05j, cfg, initial=prev)
        dens.append(-stieltjes_mu_phi(prev).imag / np.pi)
    assert min(dens) >= 0
    inner = trapezoid(dens, E)
    # the density is nonnegative, so the mass over [-12, 12] lies in [inner, 1]
    assert 0.98 <= inner <= 1.0 + 1e-3


def test_rho_s_reduces_to_rho_z():
    a = solve_rho_s(ER, DomainPair(2 + 1j, 0j, 0.3))
    b = solve_rho_z(ER, 2 + 1j)
    np.testing.assert_array_equal(a.t, b.t)
    assert np.max(np.abs(a.values - b.values)) < 1e-8


def test_rho_s_residual():
    r = solve_rho_s(ER, DomainPair(3j, 0.1j, 0.5))
    assert r.residual < 1e-9
    assert np.max(np.abs(r.values - r.nystrom(r.t))) < 1e-9


def test_domain_pair_validation():
    with pytest.raises(DomainError):
        DomainPair(1j, 10j, 0.5)
    with pytest.raises(ParameterError):
        DomainPair(1j, 0j, 1.0)
    assert DomainPair(1j, 0.1j, 0.5).conj().z == -1j


def test_solver_config_validation():
    with pytest.raises(ParameterError):
        SolverConfig(damping=0)
    with pytest.raises(ParameterError):
        SolverConfig(method="magic")
    assert SolverConfig().with_(nodes=320).nodes == 320


def test_oversized_rule_raises():
    # far from the support and close to the axis the oscillation needs ~1e4 nodes
    with pytest.raises(SolverError):
        solve_rho_z(PhiModel.gaussian(1.0), 30 + 0.05j, SolverConfig(continuation="never"))
    with pytest.raises(ParameterError):
        SolverConfig(max_nodes=100)


@pytest.mark.parametrize("u, s", [(0.2, 0.5), (0.7, 0.5), (0.3, 0.3)])
def test_L_u_zero_kernel(u, s):
    z = 1 + 2j
    expected = ((1.0 if u <= s else 0.0) - s) / z
    assert abs(eval_L_u(ZERO, u, s, z) - expected) < 1e-8


def test_L_u_conjugation():
    z = 0.4 + 2j
    a = eval_L_u(ER, 0.3, 0.5, z)
    b = eval_L_u(ER, 0.3, 0.5, z.conjugate())
    assert abs(b - a.conjugate()) < 1e-12


def test_L_u_step_halving():
    _, d = eval_L_u(ER, 0.3, 0.5, 2j, return_diag=True)
    assert abs(d["D_h"] - d["D_h2"]) < 1e-6


def test_L_u_implicit_matches_fd():
    a = eval_L_u(ER, 0.3, 0.5, 2j)
    b = eval_L_u(ER, 0.3, 0.5, 2j, SolverConfig(derivative="implicit"))
    assert abs(a - b) < 1e-6


# bivariate -------------------------------------------------------------------

def test_block_weights():
    assert block_weights(0.7, 0.25, 0.5) == (0.25, 0.25, pytest.approx(0.2))
    assert block_weights(1.0, 0.25, 0.5, "product") == (0.25, 0.25, 0.5)
    with pytest.raises(ParameterError):
        block_weights(0.5, 0.6, 0.5)


def test_pair_separates_at_u_zero():
    sol = solve_rho_pair(ER, 0.0, (0.5, 3j, 0j), (0.25, -2j, 0j))
    assert np.max(np.abs(sol.D)) < 1e-12


def test_pair_swap_symmetry():
    a = solve_rho_pair(ER, 0.6, (0.25, 2j, 0j), (0.5, 3j, 0j))
    b = solve_rho_pair(ER, 0.6, (0.5, 3j, 0j), (0.25, 2j, 0j)).transpose()
    assert np.max(np.abs(a.values - b.values)) < 1e-8


def test_pair_residual():
    sol = solve_rho_pair(ER, 0.5, (0.5, 3j, 0j), (0.5, -3j, 0j))
    assert sol.residual < 1e-8
    assert np.max(sol.values.real) <= 1e-10


def test_L_pair_zero_kernel_factorizes():
    args = (0.4, 0.5, 1 + 2j, 0.25, -1j)
    prod = eval_L_u(ZERO, 0.4, 0.5, 1 + 2j) * eval_L_u(ZERO, 0.4, 0.25, -1j)
    assert abs(eval_L_pair(ZERO, *args) - prod) < 1e-10


def test_L_pair_symmetry():
    a = eval_L_pair(ER, 0.4, 0.5, 2j, 0.25, -3j)
    b = eval_L_pair(ER, 0.4, 0.25, -3j, 0.5, 2j)
    assert abs(a - b) < 1e-7


def test_L_pair_step_halving():
    cfg = SolverConfig()
    a = eval_L_pair(ER, 0.4, 0.5, 2j, 0.5, -2j, cfg)
    b = eval_L_pair(ER, 0.4, 0.5, 2j, 0.5, -2j, cfg.with_(fd_step=cfg.fd_step / 2))
    assert abs(a - b) < 1e-5


# covariance ------------------------------------------------------------------

def test_limit_cov_frozen_and_routes_agree():
    v = limit_cov(ER, 0.5, 2j, 0.5, -2j)
    k = limit_cov_kappa(ER, 0.5, 2j, 0.5, -2j)
    assert abs(k - 0.0012440028) < 1e-9
    assert abs(v - k) < 1e-6


def test_limit_cov_variance_real_nonnegative():
    for s, z in [(0.5, 2j), (0.25, 1 + 2j)]:
        v = limit_cov_kappa(ER, s, z, s, z.conjugate())
        assert abs(v.imag) < 1e-10 and v.real >= -1e-6


def test_limit_cov_conjugation():
    a = limit_cov(ER, 0.5, 1 + 2j, 0.25, 3j)
    b = limit_cov(ER, 0.5, 1 - 2j, 0.25, -3j)
    assert abs(b - a.conjugate()) < 1e-6


def test_kappa_agrees_with_population_dynamics():
    ps = PopulationSampler(ER, pool=20000, sweeps=30, seed=2)
    k = kappa(ER, 2j, -2j)
    assert abs(k - 0.004976011) < 1e-8
    assert abs(ps.kappa(2j, -2j) - k) < 0.05 * abs(k)


def test_limit_cov_rejects_boundary_s():
    with pytest.raises(ParameterError):
        limit_cov(ER, 0.0, 2j, 0.5, 2j)
    assert limit_cov_kappa(ER, 0.0, 2j, 0.5, 2j) == 0
