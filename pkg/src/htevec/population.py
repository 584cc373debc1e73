"""Population dynamics for the diagonal resolvent entry of the limit tree.

In the limit a diagonal resolvent entry satisfies the distributional
recursion

    G(z) = 1 / (z - sum_k xi_k G_k(z)),

with ``G_k`` independent copies and ``(xi_k)`` the Poisson process of squared
entries of one row: intensity ``(alpha/2) c x^(-alpha/2 - 1) dx`` with
``c = sigma / Gamma(1 - alpha/2)`` for the Lévy family, and ``Poisson(w / x)``
points at ``x`` for every atom ``(w, x)`` of the exploding-moments measure
(the atom at 0 contributes the drift ``w E[G]``).

A pool of samples is refreshed for a fixed number of sweeps.  All random
draws are independent of ``z``, so the pool is a function of the seed and of
the tree only; evaluating at a new set of points replays the same trees and
returns jointly distributed samples.  Sample covariances of the final pool
estimate ``kappa(z, z') = lim Cov(G_11(z), G_11(z'))``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as _gamma_fn

from .errors import ParameterError
from .philib import PhiModel

__all__ = ["PopulationSampler", "population_kappa_handle"]


class PopulationSampler:
    """Joint samples of ``G_root(z)`` over a set of points.

    Parameters
    ----------
    model : PhiModel
    pool : int
        Pool size ``P``.
    sweeps : int
        Number of full pool replacements.
    children : int
        Number of largest Lévy points kept explicitly; the rest enter
        through their conditional mean.
    seed : int
    chunk : int
        Rows processed at once (memory bound).
    """

    def __init__(self, model: PhiModel, pool: int = 20000, sweeps: int = 30, children: int = 48,
                 seed: int = 0, chunk: int = 1024):
        if pool < 100 or sweeps < 1 or children < 1:
            raise ParameterError("pool >= 100, sweeps >= 1 and children >= 1 required")
        self.model = model
        self.pool = int(pool)
        self.sweeps = int(sweeps)
        self.children = int(children)
        self.seed = int(seed)
        self.chunk = int(chunk)
        self._cache: dict[complex, np.ndarray] = {}
        if model.is_levy:
            self._c = model.sigma / _gamma_fn(1 - model.alpha / 2)
        else:
            self._pos = [(w, x) for w, x in model.m_atoms if x > 0 and w > 0]
            self._drift = sum(w for w, x in model.m_atoms if x == 0)

    def _draw(self, rng, m):
        """Child weights ``(m, K)``, child indices and tail weights ``(m,)``."""
        P = self.pool
        if self.model.is_levy:
            a = self.model.alpha
            K = self.children
            gam = np.cumsum(rng.standard_exponential((m, K)), axis=1)
            xi = (gam / self._c) ** (-2.0 / a)
            tail = self._c * a / (2 - a) * xi[:, -1] ** (1 - a / 2)
            return xi, rng.integers(0, P, size=(m, K)), tail
        ws, idx = [], []
        for w, x in self._pos:
            cnt = rng.poisson(w / x, size=m)
            kmax = max(int(cnt.max()), 1)
            wt = np.where(np.arange(kmax)[None, :] < cnt[:, None], x, 0.0)
            ws.append(wt)
            idx.append(rng.integers(0, P, size=(m, kmax)))
        if not ws:
            return np.zeros((m, 1)), np.zeros((m, 1), int), np.full(m, float(self._drift))
        return np.hstack(ws), np.hstack(idx), np.full(m, float(self._drift))

    def _run(self, z: np.ndarray) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, 0x706F70])))
        P = self.pool
        G = np.tile(1.0 / z, (P, 1))
        for _ in range(self.sweeps):
            mean = G.mean(axis=0)
            new = np.empty_like(G)
            for lo in range(0, P, self.chunk):
                hi = min(lo + self.chunk, P)
                xi, idx, tail = self._draw(rng, hi - lo)
                S = np.einsum("mk,mkj->mj", xi, G[idx])
                new[lo:hi] = 1.0 / (z[None, :] - S - tail[:, None] * mean[None, :])
            G = new
        return G

    def prepare(self, z_list) -> None:
        """Compute and cache samples at all points not yet cached (upper half-plane)."""
        keys = {complex(z.real, abs(z.imag)) for z in map(complex, z_list)}
        todo = [k for k in keys if k not in self._cache]
        if not todo:
            return
        if any(k.imag == 0 for k in todo):
            raise ParameterError("points must be off the real axis")
        # replay all cached points together with the new ones so that every
        # column comes from the same trees
        allz = sorted(set(self._cache) | set(todo), key=lambda c: (c.real, c.imag))
        G = self._run(np.array(allz))
        self._cache = {z: G[:, j] for j, z in enumerate(allz)}

    def samples(self, z: complex) -> np.ndarray:
        z = complex(z)
        key = complex(z.real, abs(z.imag))
        if key not in self._cache:
            self.prepare([key])
        col = self._cache[key]
        return col if z.imag > 0 else np.conj(col)

    def stieltjes(self, z: complex) -> complex:
        """Mean of the pool, an estimate of ``G_{mu_Phi}(z)``."""
        return complex(self.samples(z).mean())

    def kappa(self, z1: complex, z2: complex) -> complex:
        """Sample ``Cov(G(z1), G(z2))`` (no conjugation)."""
        a, b = self.samples(z1), self.samples(z2)
        return complex(np.mean((a - a.mean()) * (b - b.mean())))


def population_kappa_handle(sampler: PopulationSampler):
    """Covariance handle ``(s, z, s2, z2) -> (min(s, s2) - s s2) kappa(z, z2)``.

    The handle exposes ``prepare`` so that batch consumers can request all
    points at once.
    """

    def handle(s, z, s2, z2):
        return (min(s, s2) - s * s2) * sampler.kappa(z, z2)

    handle.prepare = sampler.prepare
    return handle
