"""
Spectral distribution and the eigenvalue-indexed process
========================================================

The limiting spectral CDF is recovered from the Stieltjes transform along
vertical rays, with extrapolation in the distance to the real axis.  The
same inversion turns the resolvent covariance into the covariance of
``C(s, lambda)``.
"""

import numpy as np

from htevec.ensembles import EnsembleSpec, Kind
from htevec.fixedpoint import SolverConfig
from htevec.inversion import EtaSchedule, cov_C_from_H, e_phi_set, spectral_cdf
from htevec.montecarlo import map_replicates
from htevec.philib import PhiModel
from htevec.population import PopulationSampler, population_kappa_handle

model = PhiModel.erdos_renyi(2.0)
# grid points keep a distance >= 0.2 from the atoms at 0, +-1 and +-sqrt(2);
# next to an atom the extrapolation to the axis is unreliable
lam = np.array([-2.0, -1.2, -0.6, -0.2, 0.2, 0.6, 1.2, 2.0])
res = spectral_cdf(model, lam, cfg=SolverConfig(trunc_eps=1e-8))

spec = EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=8)
ev = np.sort(np.concatenate(map_replicates(lambda d: d.eigenvalues, spec, 1000, 5)))
emp = np.searchsorted(ev, lam, side="right") / ev.size
for l, f, e in zip(lam, res.values, emp):
    print(f"F({l:+.1f}) = {f:.4f}   empirical {e:.4f}")

# the increment across 0 contains the atom; it leaves a gap in the range of F
print(e_phi_set(lam, res.values, jump_threshold=0.2))

# Var C(0.5, 0.5) from population dynamics for the resolvent covariance
handle = population_kappa_handle(PopulationSampler(model, pool=5000, sweeps=20, seed=1))
v = cov_C_from_H(handle, 0.5, 0.5, 0.5, 0.5, EtaSchedule((0.4, 0.2, 0.1)), ray_q=4)
print("limit Var C(0.5, 0.5) =", round(v, 5))
