"""Empirical eigenvector processes of a symmetric matrix.

With ``A = U diag(lambda) U*`` and overlaps ``w_ij = |u_ij|^2`` (row ``i`` is
a coordinate, column ``j`` an eigenvector), the processes are

    B_{s,t}   = n^(-1/2) sum_{i <= ns, j <= nt} (w_ij - 1/n)
    C_{s,lam} = B_{s, F_n(lam)}
    X(s, z)   = n^(-1/2) sum_{i <= ns} sum_j (w_ij - 1/n) / (z - lambda_j)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from .errors import DomainError, NumericError, ParameterError

__all__ = [
    "SpectralDecomposition",
    "ProcessSurface",
    "ResolventStat",
    "decompose",
    "bivariate_process",
    "eigenvalue_process",
    "empirical_cdf",
    "resolvent_stat",
    "resolvent_stat_trace",
    "quadrature_identity_check",
    "increment",
    "vector_spectral_measure",
    "floor_count",
    "cumulative_overlaps",
    "detect_atoms",
]


def floor_count(n: int, s) -> np.ndarray:
    """``floor(n s)`` robust to representation error (e.g. ``n * 0.29``)."""
    s = np.asarray(s, dtype=float)
    return np.floor(n * s + 1e-9).astype(int)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the doubly stochastic overlap matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
    overlaps : ndarray, shape (n, n)
        ``overlaps[i, j] = |u_ij|^2``.
    clusters : int
        Number of degenerate eigenvalue clusters that were re-randomized.
    """

    eigenvalues: np.ndarray
    overlaps: np.ndarray
    clusters: int = 0

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @classmethod
    def from_overlaps(cls, overlaps, eigenvalues=None) -> "SpectralDecomposition":
        """Wrap a doubly stochastic matrix (e.g. a permutation matrix).

        Without eigenvalues, the labels ``(j + 1) / n`` are used so that
        ``F_n`` is the uniform grid.
        """
        w = np.asarray(overlaps, dtype=float)
        n = w.shape[0]
        if eigenvalues is None:
            eigenvalues = np.arange(1, n + 1) / n
        return cls(np.asarray(eigenvalues, dtype=float), w)

    def check(self, tol: float = 1e-10) -> float:
        """Largest deviation of row and column sums from 1."""
        w = self.overlaps
        dev = max(np.max(np.abs(w.sum(axis=0) - 1)), np.max(np.abs(w.sum(axis=1) - 1)))
        if dev > tol or w.min() < 0 or w.max() > 1 + tol:
            raise NumericError(f"overlap matrix not doubly stochastic (deviation {dev:.2e})")
        return float(dev)


@dataclass(frozen=True)
class ProcessSurface:
    """Values of ``B`` (``axis='t'``) or ``C`` (``axis='lambda'``) on a grid."""

    s_grid: np.ndarray
    second_grid: np.ndarray
    values: np.ndarray
    axis: str = "t"

    def value(self, s, x) -> float:
        i = int(np.flatnonzero(np.isclose(self.s_grid, s))[0])
        j = int(np.flatnonzero(np.isclose(self.second_grid, x))[0])
        return float(self.values[i, j])

    def long_format(self):
        """Rows ``(s, t_or_lambda, value)`` in grid order."""
        S, X = np.meshgrid(self.s_grid, self.second_grid, indexing="ij")
        return np.column_stack([S.ravel(), X.ravel(), self.values.ravel()])


@dataclass(frozen=True)
class ResolventStat:
    s: float
    z: complex
    value: complex


def decompose(matrix, degeneracy_tol: float = 1e-10, rng=None) -> SpectralDecomposition:
    """Full symmetric eigendecomposition with exchangeable eigenbases.

    Parameters
    ----------
    matrix : ndarray
        Symmetric real matrix.
    degeneracy_tol : float
        Relative gap (times ``||A||_2``) below which neighbouring eigenvalues
        are treated as one cluster; each cluster basis is rotated by a Haar
        orthogonal matrix drawn from ``rng``.
    rng : numpy.random.Generator, optional
        Source for the rotations (a fixed default stream if omitted).
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("matrix must be square")
    if not np.array_equal(a, a.T):
        raise ParameterError("matrix must be exactly symmetric")
    try:
        lam, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        norm = np.linalg.norm(a, "fro")
        raise NumericError(f"eigensolver failed (Frobenius norm {norm:.3e})") from exc
    if rng is None:
        rng = np.random.default_rng(0)
    scale = max(np.max(np.abs(lam)), 1e-300)
    gaps = np.diff(lam) < degeneracy_tol * scale
    clusters = 0
    if gaps.any():
        start = 0
        n = lam.size
        for k in range(1, n + 1):
            if k == n or not gaps[k - 1]:
                if k - start > 1:
                    rot = ortho_group.rvs(k - start, random_state=rng)
                    u[:, start:k] = u[:, start:k] @ rot
                    clusters += 1
                start = k
    return SpectralDecomposition(lam, u * u, clusters)


def _check_unit_grid(grid, name):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) < 0) or g[0] < 0 or g[-1] > 1:
        raise ParameterError(f"{name} must be an ascending grid inside [0, 1]")
    return g


def cumulative_overlaps(dec: SpectralDecomposition) -> np.ndarray:
    """``S[a, b] = sum_{i < a, j < b} (w_ij - 1/n)`` with a zero border.

    Row and column ``n`` vanish for a doubly stochastic matrix and are set
    to exactly zero, removing rounding residue on the boundary.
    """
    n = dec.n
    cw = np.zeros((n + 1, n + 1))
    cw[1:n, 1:n] = np.cumsum(np.cumsum(dec.overlaps[:-1, :-1] - 1.0 / n, axis=0), axis=1)
    return cw


def bivariate_process(dec: SpectralDecomposition, s_grid, t_grid) -> ProcessSurface:
    """``B^n_{s,t}`` on a grid."""
    s = _check_unit_grid(s_grid, "s_grid")
    t = _check_unit_grid(t_grid, "t_grid")
    n = dec.n
    cw = cumulative_overlaps(dec)
    vals = cw[np.ix_(floor_count(n, s), floor_count(n, t))] / np.sqrt(n)
    return ProcessSurface(s, t, vals, "t")


def empirical_cdf(dec: SpectralDecomposition, lam) -> np.ndarray | float:
    """``F_n(lam) = #{j : lambda_j <= lam} / n``."""
    out = np.searchsorted(dec.eigenvalues, np.asarray(lam, dtype=float), side="right") / dec.n
    return out if np.ndim(out) else float(out)


def eigenvalue_process(dec: SpectralDecomposition, s_grid, lambda_grid) -> ProcessSurface:
    """``C^n_{s,lam}`` on a grid; equals ``B^n_{s, F_n(lam)}`` exactly."""
    s = _check_unit_grid(s_grid, "s_grid")
    lam = np.asarray(lambda_grid, dtype=float)
    if np.any(np.diff(lam) < 0):
        raise ParameterError("lambda_grid must be ascending")
    n = dec.n
    cw = cumulative_overlaps(dec)
    cols = np.searchsorted(dec.eigenvalues, lam, side="right")
    vals = cw[np.ix_(floor_count(n, s), cols)] / np.sqrt(n)
    return ProcessSurface(s, lam, vals, "lambda")


def _check_z(z):
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must have nonzero imaginary part")
    return z


def resolvent_stat(dec: SpectralDecomposition, s: float, z: complex) -> ResolventStat:
    """``X^n(s, z)`` from the eigen representation."""
    z = _check_z(z)
    if not 0 <= s <= 1:
        raise ParameterError("s must lie in [0, 1]")
    n = dec.n
    k = int(floor_count(n, s))
    col = dec.overlaps[:k].sum(axis=0) - k / n
    val = np.sum(col / (z - dec.eigenvalues)) / np.sqrt(n)
    if k in (0, n):
        val = 0j
    return ResolventStat(float(s), z, complex(val))


def resolvent_stat_trace(matrix, s: float, z: complex) -> complex:
    """``X^n(s, z) = n^(-1/2) (Tr(P_s G) - s_n Tr G)`` by direct inversion."""
    z = _check_z(z)
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    g = np.linalg.inv(z * np.eye(n) - a)
    k = int(floor_count(n, s))
    d = np.diag(g)
    return complex((d[:k].sum() - k / n * d.sum()) / np.sqrt(n))


def quadrature_identity_check(dec: SpectralDecomposition, s: float, z: complex,
                              grid_resolution: int | None = None) -> float:
    """Residual ``|int C^n_{s,lam} / (z - lam)^2 dlam + X^n(s, z)|``.

    The step function ``C^n_{s,.}`` is integrated exactly between
    consecutive eigenvalues, so ``grid_resolution`` has no effect and is
    accepted for interface compatibility only.
    """
    z = _check_z(z)
    n = dec.n
    k = int(floor_count(n, s))
    if k in (0, n):
        return 0.0
    c = np.cumsum(dec.overlaps[:k].sum(axis=0) - k / n) / np.sqrt(n)
    lam = dec.eigenvalues
    # on [lam_j, lam_{j+1}) the value is c_j; int dlam/(z-lam)^2 = 1/(z-b) - 1/(z-a)
    steps = 1.0 / (z - lam[1:]) - 1.0 / (z - lam[:-1])
    lhs = np.sum(c[:-1] * steps)
    return float(abs(lhs + resolvent_stat(dec, s, z).value))


def increment(surface: ProcessSurface, s, s2, t, t2) -> float:
    """Rectangle increment of a process surface."""
    v = surface.value
    return v(s2, t2) - v(s, t2) - v(s2, t) + v(s, t)


def vector_spectral_measure(dec: SpectralDecomposition, i: int):
    """Atoms ``(lambda_j, w_ij)`` of the spectral measure of ``e_i``."""
    if not 0 <= i < dec.n:
        raise ParameterError("row index out of range")
    return dec.eigenvalues.copy(), dec.overlaps[i].copy()


def detect_atoms(eigenvalues, min_mass: float = 0.002, tol: float = 1e-7):
    """Atoms of a pooled empirical spectrum.

    Eigenvalues within ``tol`` of each other are merged; clusters holding at
    least a fraction ``min_mass`` of all eigenvalues are reported.

    Returns
    -------
    locations, masses : ndarray
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float).ravel())
    if ev.size == 0:
        raise ParameterError("no eigenvalues given")
    breaks = np.flatnonzero(np.diff(ev) > tol) + 1
    starts = np.concatenate([[0], breaks])
    counts = np.diff(np.concatenate([starts, [ev.size]]))
    keep = counts >= max(2, min_mass * ev.size)
    locs = np.array([ev[a:a + c].mean() for a, c in zip(starts[keep], counts[keep])])
    return locs, counts[keep] / ev.size
