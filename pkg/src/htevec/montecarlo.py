"""Replicated simulation of the overlap processes.

Replicate ``r`` of an experiment at size ``n`` is fully determined by
``(spec, n, r)``; replicates may be computed in any order or in parallel and
are always reduced in index order, so results do not depend on the number of
workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .eigenprocess import SpectralDecomposition, cumulative_overlaps, decompose, floor_count
from .ensembles import EnsembleSpec, Kind, replicate_rng, sample_matrix
from .errors import ParameterError

__all__ = [
    "CovEstimate",
    "ScalingReport",
    "TightnessReport",
    "replicate_decomposition",
    "map_replicates",
    "process_samples",
    "jackknife_cov",
    "estimate_cov",
    "variance_exchangeable",
    "scaling_scan",
    "tightness_bound",
    "tightness_check",
    "gaussianity_diag",
    "default_workers",
]


def default_workers() -> int:
    """Worker count from ``HTEVEC_WORKERS`` (1 if unset)."""
    try:
        return max(1, int(os.environ.get("HTEVEC_WORKERS", "1")))
    except ValueError:
        return 1


def replicate_decomposition(spec: EnsembleSpec, n: int, r: int,
                            degeneracy_tol: float = 1e-10) -> SpectralDecomposition:
    """Decomposition of replicate ``r``; permutations bypass the eigensolver."""
    mat = sample_matrix(spec, n, r)
    if spec.kind is Kind.PERMUTATION:
        return SpectralDecomposition.from_overlaps(mat)
    return decompose(mat, degeneracy_tol, rng=replicate_rng(spec.seed, n, r, stream=1))


def _run_one(fn, spec, n, degeneracy_tol, r):
    return fn(replicate_decomposition(spec, n, r, degeneracy_tol))


def map_replicates(fn, spec: EnsembleSpec, n: int, R: int, workers: int | None = None,
                   degeneracy_tol: float = 1e-10, start: int = 0) -> list:
    """Apply ``fn(dec)`` to replicates ``start .. start+R-1`` in index order.

    ``fn`` must be picklable when ``workers > 1``.
    """
    workers = default_workers() if workers is None else workers
    job = partial(_run_one, fn, spec, n, degeneracy_tol)
    idx = range(start, start + R)
    if workers <= 1:
        return [job(r) for r in idx]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(job, idx, chunksize=max(1, R // (4 * workers))))


def _point_kind(points):
    pts = list(points)
    if not pts:
        raise ParameterError("empty point list")
    if any(len(p) != 2 for p in pts):
        raise ParameterError("points must be pairs")
    return pts


class _Evaluator:
    """Picklable evaluator of a process at a list of points."""

    def __init__(self, process: str, points):
        self.process = process
        self.points = _point_kind(points)
        if process not in ("B", "C", "X"):
            raise ParameterError(f"unknown process {process!r}")

    def __call__(self, dec: SpectralDecomposition) -> np.ndarray:
        n = dec.n
        pts = self.points
        s = np.array([p[0] for p in pts], dtype=float)
        rows = floor_count(n, s)
        if self.process == "X":
            z = np.array([p[1] for p in pts], dtype=complex)
            if np.any(z.imag == 0):
                raise ParameterError("X points need Im z != 0")
            cs = np.cumsum(dec.overlaps, axis=0)
            out = np.empty(len(pts), complex)
            for k, (r, zz) in enumerate(zip(rows, z)):
                if r in (0, n):
                    out[k] = 0.0
                    continue
                col = cs[r - 1] - r / n
                out[k] = np.sum(col / (zz - dec.eigenvalues)) / np.sqrt(n)
            return out
        x = np.array([p[1] for p in pts], dtype=float)
        if self.process == "B":
            cols = floor_count(n, x)
        else:
            cols = np.searchsorted(dec.eigenvalues, x, side="right")
        return cumulative_overlaps(dec)[rows, cols] / np.sqrt(n)


def process_samples(spec: EnsembleSpec, n: int, R: int, points, process: str = "B",
                    workers: int | None = None) -> np.ndarray:
    """``(R, P)`` array of process values at ``points`` over ``R`` replicates."""
    ev = _Evaluator(process, points)
    return np.array(map_replicates(ev, spec, n, R, workers))


def _jk_se(theta_loo: np.ndarray) -> np.ndarray:
    R = theta_loo.shape[0]
    d = theta_loo - theta_loo.mean(axis=0)
    if np.iscomplexobj(d):
        se_r = np.sqrt((R - 1) / R * np.sum(d.real**2, axis=0))
        se_i = np.sqrt((R - 1) / R * np.sum(d.imag**2, axis=0))
        return se_r + 1j * se_i
    return np.sqrt((R - 1) / R * np.sum(d**2, axis=0))


def jackknife_cov(samples: np.ndarray, conj: bool = False):
    """Sample covariance with leave-one-out jackknife standard errors.

    Parameters
    ----------
    samples : ndarray, shape (R, P)
    conj : bool
        If true, estimate ``E[x conj(y)] - E[x] conj(E[y])``, otherwise
        ``E[x y] - E[x] E[y]``.

    Returns
    -------
    cov, se : ndarray, shape (P, P)
        For complex input the standard errors of the real and imaginary parts
        are packed as ``se_re + 1j * se_im``.
    """
    x = np.asarray(samples)
    R = x.shape[0]
    if R < 3:
        raise ParameterError("need at least 3 replicates")
    y = np.conj(x) if conj else x
    s1x, s1y = x.sum(0), y.sum(0)
    s2 = x.T @ y
    cov = (s2 - np.outer(s1x, s1y) / R) / (R - 1)
    m = R - 1
    l1x = s1x[None] - x
    l1y = s1y[None] - y
    l2 = s2[None] - x[:, :, None] * y[:, None, :]
    loo = (l2 - l1x[:, :, None] * l1y[:, None, :] / m) / (m - 1)
    return cov, _jk_se(loo)


@dataclass
class CovEstimate:
    """Monte Carlo mean and covariance of a process at a list of points.

    For the resolvent process ``cov`` holds ``E[X Y] - E[X]E[Y]`` and
    ``cov_conj`` holds ``E[X conj(Y)] - E[X]conj(E[Y])``.
    """

    points: list
    process: str
    n: int
    R: int
    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    cov_conj: np.ndarray | None = None
    cov_conj_se: np.ndarray | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, samples, points, process, n, keep_samples=False):
        x = np.asarray(samples)
        R = x.shape[0]
        mean = x.mean(0)
        mean_se = _jk_se((x.sum(0)[None] - x) / (R - 1))
        cov, se = jackknife_cov(x)
        cc = cse = None
        if process == "X":
            cc, cse = jackknife_cov(x, conj=True)
        return cls(list(points), process, n, R, mean, mean_se, cov, se, cc, cse,
                   x if keep_samples else None)


def estimate_cov(spec: EnsembleSpec, n: int, R: int, points, process: str = "B",
                 workers: int | None = None, keep_samples: bool = False) -> CovEstimate:
    """Replicated estimate of the mean and covariance of ``B``, ``C`` or ``X``.

    Parameters
    ----------
    spec : EnsembleSpec
    n : int
    R : int
        Number of replicates, at least 30.
    points : list of pairs
        ``(s, t)`` for ``B``, ``(s, lambda)`` for ``C``, ``(s, z)`` for ``X``.
    process : {'B', 'C', 'X'}
    """
    if R < 30:
        raise ParameterError("R must be >= 30")
    x = process_samples(spec, n, R, points, process, workers)
    return CovEstimate.from_samples(x, points, process, n, keep_samples)


class _RowSums:
    def __init__(self, lam):
        self.lam = lam

    def __call__(self, dec):
        cols = np.searchsorted(dec.eigenvalues, self.lam, side="right")
        return dec.overlaps[:, :cols].sum(axis=1) - cols / dec.n


def variance_exchangeable(decs, s: float, lam: float):
    """``Var(C^n_{s,lam})`` through the exchangeable-rows identity.

    With ``X_i = sum_{lambda_j <= lam} (w_ij - 1/n)`` one has
    ``E[C^2] = (s_n - s_n^2) E[X_1 (X_1 - X_2)]``; the right side is estimated
    from all rows and row pairs of every decomposition.

    Parameters
    ----------
    decs : iterable of SpectralDecomposition
    s, lam : float

    Returns
    -------
    estimate, stderr : float
    """
    vals = []
    n = None
    for dec in decs:
        n = dec.n
        x = _RowSums(lam)(dec)
        q = np.sum(x * x) / n
        # mean over ordered pairs i != j of x_i x_j
        cross = (np.sum(x) ** 2 - np.sum(x * x)) / (n * (n - 1))
        vals.append(q - cross)
    if n is None:
        raise ParameterError("no decompositions given")
    vals = np.array(vals)
    sn = floor_count(n, s) / n
    f = sn - sn * sn
    R = vals.size
    se = vals.std(ddof=1) / np.sqrt(R) if R > 1 else np.nan
    return float(f * vals.mean()), float(f * se)


@dataclass
class ScalingReport:
    n_list: list
    variances: np.ndarray
    stderr: np.ndarray
    slope: float
    slope_se: float
    ci: tuple

    def to_dict(self):
        return {
            "n_list": list(self.n_list),
            "variances": self.variances.tolist(),
            "stderr": self.stderr.tolist(),
            "slope": self.slope,
            "slope_se": self.slope_se,
            "ci95": list(self.ci),
        }


def scaling_scan(spec: EnsembleSpec, n_list, R: int, point, workers: int | None = None) -> ScalingReport:
    """Log-log slope of ``Var(B^n)`` at one point against ``n``.

    The slope is a weighted least-squares fit with weights from the
    delta-method errors of ``log Var``.
    """
    var, se = [], []
    for n in n_list:
        est = estimate_cov(spec, int(n), R, [tuple(point)], "B", workers)
        var.append(est.cov[0, 0])
        se.append(est.cov_se[0, 0])
    var, se = np.array(var), np.array(se)
    if np.any(var <= 0):
        raise ParameterError("nonpositive variance estimate; choose an interior point")
    x = np.log(np.asarray(n_list, dtype=float))
    y = np.log(var)
    w = (var / se) ** 2
    xm = np.sum(w * x) / w.sum()
    ym = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    slope_se = 1.0 / np.sqrt(sxx)
    return ScalingReport(list(n_list), var, se, float(slope), float(slope_se),
                         (float(slope - 1.96 * slope_se), float(slope + 1.96 * slope_se)))


def tightness_bound(n: int, ds: float, dt: float, full: bool = True) -> float:
    """Fourth-moment bound ``7/n + 6 ds^2 dt^2 (1 - ds)^2`` for an increment.

    With ``full=False`` the weaker bound without the ``(1 - ds)^2`` factor is
    returned.
    """
    b = 6.0 * ds * ds * dt * dt
    if full:
        b *= (1.0 - ds) ** 2
    return 7.0 / n + b


@dataclass
class TightnessReport:
    n: int
    R: int
    rectangles: list
    fourth_moment: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray
    ratio: np.ndarray

    @property
    def worst(self) -> float:
        return float(np.max(self.ratio))

    @property
    def passed(self) -> bool:
        return self.worst <= 1.0


class _Increments:
    def __init__(self, rects):
        self.rects = rects

    def __call__(self, dec):
        n = dec.n
        cw = cumulative_overlaps(dec)
        out = []
        for s0, s1, t0, t1 in self.rects:
            a0, a1 = floor_count(n, [s0, s1])
            b0, b1 = floor_count(n, [t0, t1])
            out.append((cw[a1, b1] - cw[a0, b1] - cw[a1, b0] + cw[a0, b0]) / np.sqrt(n))
        return np.array(out)


def tightness_check(spec: EnsembleSpec, n: int, R: int, grid, workers: int | None = None,
                    full_bound: bool = True) -> TightnessReport:
    """Compare fourth moments of rectangle increments of ``B^n`` with the bound.

    Every rectangle with corners on ``grid x grid`` is tested; the reported
    ratio is ``(estimate - 3 stderr) / bound`` and the check passes when the
    largest ratio is at most 1.
    """
    g = np.asarray(grid, dtype=float)
    rects = [(g[i], g[j], g[k], g[m]) for i in range(g.size) for j in range(i + 1, g.size)
             for k in range(g.size) for m in range(k + 1, g.size)]
    inc = np.array(map_replicates(_Increments(rects), spec, n, R, workers))
    f4 = inc**4
    est = f4.mean(0)
    se = f4.std(0, ddof=1) / np.sqrt(R)
    bound = np.array([tightness_bound(n, s1 - s0, t1 - t0, full_bound) for s0, s1, t0, t1 in rects])
    return TightnessReport(n, R, rects, est, se, bound, (est - 3 * se) / bound)


def gaussianity_diag(samples):
    """Skewness and excess-kurtosis z-scores (D'Agostino tests).

    Raises
    ------
    ParameterError
        For fewer than 20 samples or zero variance.
    """
    from scipy import stats

    x = np.asarray(samples, dtype=float)
    if x.size < 20:
        raise ParameterError("need at least 20 samples")
    if np.ptp(x) == 0:
        raise ParameterError("zero variance: statistics undefined")
    return float(stats.skewtest(x).statistic), float(stats.kurtosistest(x).statistic)
