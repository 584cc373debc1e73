"""Batch verification of the exact finite-n identities on random instances."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .eigenprocess import (
    bivariate_process,
    decompose,
    eigenvalue_process,
    empirical_cdf,
    quadrature_identity_check,
    resolvent_stat,
    resolvent_stat_trace,
)
from .ensembles import EnsembleSpec, Kind, replicate_rng, sample_matrix
from .errors import ParameterError
from .identities import prod_exp_gap, resolvent_bound, schur_trace_delta

__all__ = ["IdentityRecord", "TOLERANCES", "verify_identities"]

TOLERANCES = {
    "c_equals_b_of_fn": 1e-12,
    "quadrature": 1e-9,
    "trace_form": 1e-10,
    "schur": 1e-10,
    "resolvent_bound": 0.0,
    "prod_exp": 0.0,
}

_ENSEMBLES = (
    EnsembleSpec(Kind.LEVY, alpha=1.5),
    EnsembleSpec(Kind.ERDOS_RENYI, p=2.0),
    EnsembleSpec(Kind.GAUSSIAN),
    EnsembleSpec(Kind.EXPLODING_MOMENTS, m_atoms=((0.5, 0.0), (1.0, 2.0))),
)


@dataclass(frozen=True)
class IdentityRecord:
    """Outcome of one check on one instance.

    ``residual`` is the quantity compared with ``tolerance``; for the two
    bounds it is ``value - bound`` (nonpositive when the bound holds).
    """

    check: str
    instance: int
    ensemble: str
    n: int
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _instance_checks(i, spec, n, rng):
    out = []
    a = sample_matrix(spec, n, i)
    dec = decompose(a, rng=replicate_rng(spec.seed, n, i, stream=1))
    name = spec.kind.value
    s_grid = np.linspace(0, 1, 7)
    lam = np.sort(rng.normal(0, 2, size=9))
    # direct double sum, independent of the cumulative-sum implementation
    c = np.array([[np.sum(((np.arange(n) < np.floor(n * s + 1e-9))[:, None]
                           & (dec.eigenvalues <= l)[None, :]) * (dec.overlaps - 1.0 / n)) / np.sqrt(n)
                   for l in lam] for s in s_grid])
    b = bivariate_process(dec, s_grid, np.clip(empirical_cdf(dec, lam), 0, 1)).values
    out.append(IdentityRecord("c_equals_b_of_fn", i, name, n, float(np.max(np.abs(c - b))),
                              TOLERANCES["c_equals_b_of_fn"]))
    s = float(rng.uniform(0.05, 0.95))
    z = complex(rng.normal(0, 1.5), rng.choice([-1, 1]) * rng.uniform(0.2, 2.0))
    out.append(IdentityRecord("quadrature", i, name, n, quadrature_identity_check(dec, s, z),
                              TOLERANCES["quadrature"]))
    x_eig = resolvent_stat(dec, s, z).value
    x_tr = resolvent_stat_trace(a, s, z)
    out.append(IdentityRecord("trace_form", i, name, n, abs(x_eig - x_tr) / max(1.0, abs(x_tr)),
                              TOLERANCES["trace_form"]))
    k = int(rng.integers(0, n))
    P = np.diag((np.arange(n) < max(1, int(s * n))).astype(float))
    lhs, rhs = schur_trace_delta(a, P, k, z, check_bound=False)
    out.append(IdentityRecord("schur", i, name, n, abs(lhs - rhs) / max(1.0, abs(rhs)),
                              TOLERANCES["schur"]))
    out.append(IdentityRecord("resolvent_bound", i, name, n, abs(lhs) - resolvent_bound(P, z),
                              TOLERANCES["resolvent_bound"]))
    u = rng.normal(0, 1, size=n) + 1j * rng.normal(0, 1, size=n)
    u *= rng.uniform(0.05, 0.6) * n / np.max(np.abs(u))
    gap, bound, ok = prod_exp_gap(u, n, check=False)
    out.append(IdentityRecord("prod_exp", i, name, n, gap - bound * (1 + 1e-12) if ok else -1.0,
                              TOLERANCES["prod_exp"]))
    return out


def verify_identities(instances: int = 120, n_max: int = 50, seed: int = 0) -> list[IdentityRecord]:
    """Run every exact identity and bound on ``instances`` random matrices.

    Instances cycle through Lévy, Erdős–Rényi, Gaussian and exploding-moments
    ensembles with ``n`` drawn uniformly from ``[4, n_max]``.
    """
    if instances < 1 or n_max < 4:
        raise ParameterError("need instances >= 1 and n_max >= 4")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(instances):
        base = _ENSEMBLES[i % len(_ENSEMBLES)]
        spec = EnsembleSpec.from_dict({**base.to_dict(), "seed": seed})
        n = int(rng.integers(4, n_max + 1))
        records.extend(_instance_checks(i, spec, n, rng))
    return records
