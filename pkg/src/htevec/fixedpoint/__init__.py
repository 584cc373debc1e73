"""Limit fixed-point equations and the limit covariance of ``X``."""

from .bivariate import PairSolution, block_weights, coupled_L_pair, eval_L_pair, kappa, solve_rho_pair
from .covariance import limit_cov, limit_cov_kappa, u_nodes
from .grid import DomainPair, RhoGrid, SolverConfig, decay_rate, make_rule
from .univariate import eval_L_u, solve_rho_s, solve_rho_z, stieltjes_mu_phi

__all__ = [
    "DomainPair",
    "PairSolution",
    "RhoGrid",
    "SolverConfig",
    "block_weights",
    "coupled_L_pair",
    "decay_rate",
    "eval_L_pair",
    "eval_L_u",
    "kappa",
    "limit_cov",
    "limit_cov_kappa",
    "make_rule",
    "solve_rho_pair",
    "solve_rho_s",
    "solve_rho_z",
    "stieltjes_mu_phi",
    "u_nodes",
]
