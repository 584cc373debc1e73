"""Symmetric heavy-tailed random matrix ensembles.

Every ensemble is described by an immutable :class:`EnsembleSpec`.  Matrices
are drawn from counter-based random streams keyed by ``(seed, n,
replicate_index)``, so a replicate can be regenerated in isolation and the
draws do not depend on the order in which replicates are produced.

Entry laws (``n`` is the matrix size):

* ``levy``: symmetric Pareto variable with ``P(|x| >= u) = min(1, u**-alpha)``
  divided by ``n**(1/alpha)`` and multiplied by ``sigma``.
* ``erdos_renyi``: ``Bernoulli(p/n) - p/n``.
* ``exploding_moments``: for every atom ``(w, x)`` with ``x > 0`` the value
  ``+-sqrt(x)`` with total probability ``w / (x n)``, zero otherwise; an atom
  at ``x = 0`` adds an independent ``N(0, w/n)`` component.  With this choice
  ``n E[a^(2k)] = sum_x w x^(k-1)``.
* ``gaussian``: ``N(0, sigma**2 / n)``.
* ``permutation``: the permutation matrix of a uniform random permutation,
  used directly as an overlap matrix.

Diagonal entries follow the same law as the off-diagonal ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import gamma as _gamma_fn

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "Kind",
    "EnsembleSpec",
    "replicate_rng",
    "pareto_magnitudes",
    "sample_entries",
    "sample_matrix",
    "estimate_char_exponent",
    "levy_sigma_closed_form",
    "calibrate_levy_sigma",
]

_SEED_LIMIT = 2**64


class Kind(str, enum.Enum):
    """Matrix law families."""

    LEVY = "levy"
    EXPLODING_MOMENTS = "exploding_moments"
    ERDOS_RENYI = "erdos_renyi"
    GAUSSIAN = "gaussian"
    PERMUTATION = "permutation"


@dataclass(frozen=True)
class EnsembleSpec:
    """Immutable description of a symmetric random matrix law.

    Parameters
    ----------
    kind : Kind or str
        Ensemble family.
    alpha : float, optional
        Tail index in ``(0, 2)``, Lévy only.
    sigma : float
        Scale for the Lévy and Gaussian families.
    p : float, optional
        Mean degree of the Erdős–Rényi family.
    m_atoms : tuple of (weight, location)
        Atomic measure ``m`` of the exploding-moments family.
    seed : int
        Master seed in ``[0, 2**64)``.
    """

    kind: Kind
    alpha: float | None = None
    sigma: float = 1.0
    p: float | None = None
    m_atoms: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError as exc:
            raise ParameterError(f"unknown ensemble kind {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        atoms = tuple((float(w), float(x)) for w, x in self.m_atoms)
        object.__setattr__(self, "m_atoms", atoms)
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < _SEED_LIMIT:
            raise ParameterError("seed must be an integer in [0, 2**64)")
        object.__setattr__(self, "seed", int(self.seed))
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if kind is Kind.LEVY:
            if self.alpha is None or not 0 < self.alpha < 2:
                raise ParameterError("Levy ensemble needs alpha in (0, 2)")
        elif kind is Kind.ERDOS_RENYI:
            if self.p is None or not self.p > 0:
                raise ParameterError("Erdos-Renyi ensemble needs p > 0")
        elif kind is Kind.EXPLODING_MOMENTS:
            if not atoms:
                raise ParameterError("exploding-moments ensemble needs m_atoms")
            if any(w < 0 or x < 0 for w, x in atoms):
                raise ParameterError("atom weights and locations must be >= 0")
            if sum(w for w, _ in atoms) <= 0:
                raise ParameterError("m_atoms must have positive total weight")

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        """Atomic measure ``m`` in the exploding-moments sense, if any."""
        if self.kind is Kind.EXPLODING_MOMENTS:
            return self.m_atoms
        if self.kind is Kind.ERDOS_RENYI:
            return ((float(self.p), 1.0),)
        if self.kind is Kind.GAUSSIAN:
            return ((self.sigma**2, 0.0),)
        return ()

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "seed": self.seed, "sigma": self.sigma}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.p is not None:
            d["p"] = self.p
        if self.m_atoms:
            d["m_atoms"] = [list(a) for a in self.m_atoms]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        d = dict(d)
        d["m_atoms"] = tuple(tuple(a) for a in d.get("m_atoms", ()))
        return cls(**d)


def replicate_rng(seed: int, n: int, replicate_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one replicate.

    The key ``(seed, n, replicate_index, stream)`` is hashed by
    :class:`numpy.random.SeedSequence` into a Philox key, so streams for
    different replicates are independent and can be created in any order.
    """
    if replicate_index < 0 or stream < 0:
        raise ParameterError("replicate_index and stream must be >= 0")
    ss = np.random.SeedSequence([int(seed), int(n), int(replicate_index), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def pareto_magnitudes(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draw ``|x|`` with ``P(|x| >= u) = min(1, u**-alpha)``."""
    u = 1.0 - rng.random(size)  # in (0, 1]
    return u ** (-1.0 / alpha)


def sample_entries(spec: EnsembleSpec, n: int, size, rng: np.random.Generator) -> np.ndarray:
    """Draw i.i.d. matrix entries of the size-``n`` law of ``spec``."""
    kind = spec.kind
    if kind is Kind.LEVY:
        mag = pareto_magnitudes(spec.alpha, size, rng)
        sign = rng.integers(0, 2, size) * 2 - 1
        return spec.sigma * sign * mag / n ** (1.0 / spec.alpha)
    if kind is Kind.ERDOS_RENYI:
        q = spec.p / n
        if q > 1:
            raise ParameterError(f"p/n = {q} exceeds 1")
        return (rng.random(size) < q).astype(float) - q
    if kind is Kind.GAUSSIAN:
        return rng.normal(0.0, spec.sigma / np.sqrt(n), size)
    if kind is Kind.EXPLODING_MOMENTS:
        out = np.zeros(size)
        spikes = [(w, x) for w, x in spec.m_atoms if x > 0 and w > 0]
        w0 = sum(w for w, x in spec.m_atoms if x == 0)
        if w0 > 0:
            out += rng.normal(0.0, np.sqrt(w0 / n), size)
        if spikes:
            probs = np.array([w / (x * n) for w, x in spikes])
            if probs.sum() > 1:
                raise ParameterError(
                    f"n = {n} too small for the atomic measure (spike mass {probs.sum():.3g} > 1)"
                )
            edges = np.cumsum(probs)
            which = np.searchsorted(edges, rng.random(size), side="right")
            vals = np.append(np.sqrt([x for _, x in spikes]), 0.0)
            sign = rng.integers(0, 2, size) * 2 - 1
            out += sign * vals[which]
        return out
    raise ParameterError(f"no entry law for kind {kind.value}")


def sample_matrix(spec: EnsembleSpec, n: int, replicate_index: int = 0) -> np.ndarray:
    """Draw one exactly symmetric ``n x n`` matrix.

    Parameters
    ----------
    spec : EnsembleSpec
    n : int
        Matrix size, at least 2.
    replicate_index : int
        Index of the replicate; selects an independent random stream.

    Returns
    -------
    numpy.ndarray
        ``(n, n)`` float array with ``a[i, j] == a[j, i]`` bit for bit.  For
        the permutation family this is a 0/1 permutation matrix (not
        symmetric in general).
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ParameterError("n must be an integer >= 2")
    rng = replicate_rng(spec.seed, n, replicate_index)
    if spec.kind is Kind.PERMUTATION:
        perm = rng.permutation(n)
        out = np.zeros((n, n))
        out[np.arange(n), perm] = 1.0
        return out
    iu = np.triu_indices(n)
    vals = sample_entries(spec, n, iu[0].size, rng)
    a = np.empty((n, n))
    a[iu] = vals
    a[iu[1], iu[0]] = vals
    return a


def _check_lower(lambdas) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    if np.any(lam.imag > 0):
        raise DomainError("lambda must lie in the closed lower half-plane")
    return lam


def estimate_char_exponent(
    spec: EnsembleSpec,
    n: int,
    n_samples: int,
    lambda_grid,
    replicate_index: int = 0,
    chunk: int = 200_000,
):
    """Monte Carlo estimate of ``n (E[exp(-i lambda a^2)] - 1)``.

    Parameters
    ----------
    spec : EnsembleSpec
    n : int
        Matrix size defining the entry law.
    n_samples : int
        Number of i.i.d. entries, at least 1000.
    lambda_grid : array_like of complex
        Points with ``Im lambda <= 0``.
    replicate_index : int
        Selects the random stream.

    Returns
    -------
    values : ndarray of complex
    stderr : ndarray of complex
        Standard errors of the real and imaginary parts, packed as
        ``se_re + 1j * se_im``.
    """
    lam = _check_lower(lambda_grid)
    if n_samples < 1000:
        raise ParameterError("n_samples must be >= 1000")
    if spec.kind is Kind.PERMUTATION:
        raise ParameterError("the permutation baseline has no entry law")
    rng = replicate_rng(spec.seed, n, replicate_index, stream=7)
    s1 = np.zeros(lam.size, complex)
    s2r = np.zeros(lam.size)
    s2i = np.zeros(lam.size)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        a2 = sample_entries(spec, n, m, rng) ** 2
        e = np.expm1(-1j * np.outer(lam, a2)) * n
        s1 += e.sum(axis=1)
        s2r += (e.real**2).sum(axis=1)
        s2i += (e.imag**2).sum(axis=1)
        done += m
    mean = s1 / n_samples
    var_r = np.maximum(s2r / n_samples - mean.real**2, 0.0)
    var_i = np.maximum(s2i / n_samples - mean.imag**2, 0.0)
    se = np.sqrt(var_r / n_samples) + 1j * np.sqrt(var_i / n_samples)
    return mean, se


def levy_sigma_closed_form(alpha: float, sigma: float = 1.0) -> float:
    """Limit constant of ``Phi(lambda) = -c (i lambda)^(alpha/2)`` for the Pareto law.

    For entries ``sigma * x / n^(1/alpha)`` with ``P(|x| >= u) = u^-alpha``
    one finds ``c = Gamma(1 - alpha/2) sigma^alpha``.
    """
    return _gamma_fn(1.0 - alpha / 2.0) * sigma**alpha


def calibrate_levy_sigma(spec: EnsembleSpec, n: int = 10_000, n_samples: int = 1_000_000,
                         lambda_ref: complex = -1j):
    """Estimate the Lévy constant ``c`` from simulated entries.

    Returns the estimate of ``c = -Phi(lambda_ref) / (i lambda_ref)^(alpha/2)``
    and its standard error.  Used to cross-check :func:`levy_sigma_closed_form`.
    """
    if spec.kind is not Kind.LEVY:
        raise ParameterError("calibration applies to the Levy family only")
    val, se = estimate_char_exponent(spec, n, n_samples, [lambda_ref])
    scale = (1j * lambda_ref) ** (spec.alpha / 2)
    est = -val[0] / scale
    return est.real, abs(se[0]) / abs(scale)
