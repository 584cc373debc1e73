"""
Limit covariance of the resolvent process
=========================================

The limit of ``Cov(X^n(s, z), X^n(s2, z2))`` comes from a fixed-point
equation on the half-line.  Here it is solved for the Erdos-Renyi ensemble
and compared with a moderate simulation.
"""

import numpy as np

from htevec.ensembles import EnsembleSpec, Kind
from htevec.fixedpoint import kappa, limit_cov, limit_cov_kappa, solve_rho_z, stieltjes_mu_phi
from htevec.montecarlo import estimate_cov
from htevec.philib import PhiModel

model = PhiModel.erdos_renyi(2.0)

# the Stieltjes transform of the limiting spectral measure
for z in (2j, 1 + 1j, 0.5 + 0.2j):
    rho = solve_rho_z(model, z)
    print(f"G({z}) = {stieltjes_mu_phi(rho):.6f}  ({rho.size} nodes, residual {rho.residual:.1e})")

# two routes to the same covariance
s, z = 0.5, 2j
print("u-integral route:", limit_cov(model, s, z, s, z.conjugate()))
print("kappa route:     ", limit_cov_kappa(model, s, z, s, z.conjugate()))
print("kappa(2i, -2i) = ", kappa(model, z, z.conjugate()))

# a small simulation for comparison (larger n and R tighten the agreement)
spec = EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=4)
est = estimate_cov(spec, 400, 200, [(s, z), (s, z.conjugate())], "X")
c, se = est.cov[0, 1], est.cov_se[0, 1]
print(f"Monte Carlo n=400: {c.real:.5f} +- {se.real:.5f}")
print("z-score:", np.abs(c.real - limit_cov_kappa(model, s, z, s, z.conjugate()).real) / se.real)
