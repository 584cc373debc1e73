"""Stieltjes–Cauchy inversion.

Two equivalent ways to integrate boundary values are used.  Along the line
``Im = eta``, ``f_eta(lam) = (1/pi) int_{-E}^{lam} Im K(E' + i eta) dE'``.
Deforming the contour onto the vertical ray above ``lam`` gives, for
``K = O(1/z^2)``,

    int_{-inf}^{lam} K(E + i eta) dE = -i int_eta^inf K(lam + i y) dy,

which needs only a few dozen evaluations per point and no window.  For the
CDF of a probability measure the ``1/z`` tail of ``G`` is removed with the
reference ``R(z) = 1/(z + i)`` whose contribution is explicit:

    F_eta(lam) = 1/2 + arctan(lam / (1 + eta)) / pi
                 + (1/pi) Re int_eta^inf (G - R)(lam + i y) dy.

All quantities are extrapolated linearly to ``eta = 0`` from the schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import isotonic_regression

from .errors import NumericError, ParameterError
from .fixedpoint import SolverConfig, solve_rho_z, stieltjes_mu_phi
from .quadrature import gauss_legendre

__all__ = [
    "EtaSchedule",
    "ray_rule",
    "extrapolate",
    "invert_cauchy_cdf",
    "CdfResult",
    "spectral_cdf",
    "e_phi_set",
    "cov_C_from_H",
    "AtomProximityWarning",
]


class AtomProximityWarning(UserWarning):
    """A requested point lies within grid tolerance of an atom."""


@dataclass(frozen=True)
class EtaSchedule:
    """Descending ``eta`` values and the polynomial order of the extrapolation."""

    etas: tuple = (0.2, 0.1, 0.05)
    order: int = 1

    def __post_init__(self):
        e = tuple(float(x) for x in self.etas)
        if not e or any(x <= 0 for x in e) or any(a <= b for a, b in zip(e[:-1], e[1:])):
            raise ParameterError("etas must be positive and strictly descending")
        if not 0 <= self.order < len(e):
            raise ParameterError("extrapolation order must be below the number of etas")
        object.__setattr__(self, "etas", e)


def extrapolate(etas, values, order: int = 1):
    """Least-squares polynomial in ``eta`` evaluated at 0, with fit residual."""
    etas = np.asarray(etas, dtype=float)
    values = np.asarray(values, dtype=float)
    if order == 0 or etas.size == 1:
        return float(values[-1]), 0.0
    coef = np.polyfit(etas, values, order)
    resid = float(np.max(np.abs(np.polyval(coef, etas) - values)))
    return float(coef[-1]), resid


def ray_rule(schedule: EtaSchedule, q: int = 6, top: float = 3.2, tail_q: int = 8):
    """Nodes on ``[eta_min, inf)`` with segment boundaries at every ``eta``.

    Returns
    -------
    y, w : ndarray
        Nodes and weights.
    masks : list of ndarray of bool
        ``masks[k]`` selects the nodes of ``[etas[k], inf)``.
    """
    etas = schedule.etas
    top = max(top, 4 * etas[0])
    x, wx = gauss_legendre(q)
    edges = [etas[0]]
    while edges[-1] * 2 < top:
        edges.append(edges[-1] * 2)
    edges.append(top)
    edges = list(etas[::-1][:-1]) + edges
    ys, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ys.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * wx)
    xt, wt = gauss_legendre(tail_q)
    v = 0.5 * (xt + 1)
    ys.append(top / v)
    ws.append(0.5 * wt * top / v**2)
    y, w = np.concatenate(ys), np.concatenate(ws)
    masks = [y >= e * (1 - 1e-12) for e in etas]
    return y, w, masks


def invert_cauchy_cdf(K, lam: float, schedule: EtaSchedule | None = None, E_window: float = 12.0,
                      return_diag: bool = False):
    """Recover ``f(lam)`` from ``K(z) = int f(x) / (z - x)^2 dx``.

    Computes ``(1/pi) int_{-E_window}^{lam} Im K(E + i eta) dE`` for each
    ``eta`` by adaptive quadrature and extrapolates to ``eta = 0``.
    """
    schedule = EtaSchedule() if schedule is None else schedule
    vals = []
    for eta in schedule.etas:
        pts = [p for p in (0.0,) if -E_window < p < lam]
        v, err, *info = integrate.quad(lambda e: complex(K(e + 1j * eta)).imag, -E_window, lam,
                                       limit=400, points=pts or None, full_output=1)
        if len(info) > 1 and "message" not in str(info[0]) and err > 1e-4:
            raise NumericError(f"quadrature failed at eta={eta}: error {err:.2e}")
        vals.append(v / np.pi)
    out, resid = extrapolate(schedule.etas, vals, schedule.order)
    if return_diag:
        return out, {"per_eta": vals, "fit_residual": resid}
    return out


@dataclass
class CdfResult:
    """Spectral CDF on a grid with per-``eta`` values and diagnostics."""

    lambdas: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    per_eta: np.ndarray
    etas: tuple
    max_adjustment: float
    fit_residual: np.ndarray = field(repr=False, default=None)

    def to_rows(self):
        return [(float(l), float(v), float(r)) for l, v, r in zip(self.lambdas, self.values, self.raw)]


def ray_stieltjes(model, lam: float, y, cfg: SolverConfig):
    """``G(lam + i y)`` at every ``y``, warm-starting downward along the ray."""
    G = np.empty(len(y), complex)
    prev = None
    for j in np.argsort(-np.asarray(y)):
        prev = solve_rho_z(model, lam + 1j * y[j], cfg, initial=prev)
        G[j] = stieltjes_mu_phi(prev)
    return G


def spectral_cdf(model, lambda_grid, schedule: EtaSchedule | None = None, cfg: SolverConfig | None = None,
                 ray_q: int = 6) -> CdfResult:
    """Limit spectral CDF ``F(lam)`` on a grid.

    Each ``F_eta`` is evaluated by the ray form (solving the fixed-point
    equation at every ray node, warm-started from the node above), then
    extrapolated to ``eta = 0``, clipped to ``[0, 1]`` and made monotone by
    isotonic regression.  ``max_adjustment`` reports the largest change made
    by clipping and the isotonic pass.
    """
    schedule = EtaSchedule() if schedule is None else schedule
    cfg = SolverConfig() if cfg is None else cfg
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.ndim != 1 or np.any(np.diff(lam) <= 0):
        raise ParameterError("lambda_grid must be strictly ascending")
    y, w, masks = ray_rule(schedule, q=ray_q)
    per = np.empty((lam.size, len(schedule.etas)))
    for i, l in enumerate(lam):
        G = ray_stieltjes(model, l, y, cfg)
        f = (G - 1.0 / (l + 1j * y + 1j)) * w
        for k, (eta, m) in enumerate(zip(schedule.etas, masks)):
            per[i, k] = 0.5 + np.arctan(l / (1 + eta)) / np.pi + np.sum(f[m]).real / np.pi
    raw = np.empty(lam.size)
    resid = np.empty(lam.size)
    for i in range(lam.size):
        raw[i], resid[i] = extrapolate(schedule.etas, per[i], schedule.order)
    clipped = np.clip(raw, 0.0, 1.0)
    mono = isotonic_regression(clipped).x
    adj = float(np.max(np.abs(mono - raw))) if lam.size else 0.0
    return CdfResult(lam, mono, raw, per, schedule.etas, adj, resid)


def e_phi_set(lambda_grid, F_values, jump_threshold: float = 0.01):
    """Closed range of ``F`` together with ``{0, 1}``, as disjoint intervals.

    Increments of ``F`` between consecutive grid points larger than
    ``jump_threshold`` are treated as atoms and leave a gap.

    Returns
    -------
    dict
        ``intervals``: list of ``(lo, hi)``; ``jumps``: list of
        ``(lam_left, lam_right, size)``.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    F = np.asarray(F_values, dtype=float)
    if lam.shape != F.shape or lam.ndim != 1:
        raise ParameterError("grid and values must be 1-d arrays of equal length")
    jumps = []
    intervals = []
    lo = 0.0
    Fe = np.concatenate([[0.0], F, [1.0]])
    le = np.concatenate([[-np.inf], lam, [np.inf]])
    for k in range(Fe.size - 1):
        d = Fe[k + 1] - Fe[k]
        if d > jump_threshold:
            if k > 0 and k < Fe.size - 2:
                jumps.append((float(le[k]), float(le[k + 1]), float(d)))
            intervals.append((lo, float(Fe[k])))
            lo = float(Fe[k + 1])
    intervals.append((lo, 1.0))
    # drop the degenerate pieces produced by leading/trailing jumps
    merged = [iv for iv in intervals if iv[1] > iv[0] or iv in ((0.0, 0.0), (1.0, 1.0))]
    return {"intervals": merged, "jumps": jumps}


def _shift_from_atoms(lam, atoms, tol):
    if atoms is None:
        return lam
    for a in np.atleast_1d(atoms):
        if abs(lam - a) < tol:
            warnings.warn(f"lambda={lam} within {tol} of atom {a}; evaluating at {a + 2 * tol}",
                          AtomProximityWarning, stacklevel=3)
            return a + 2 * tol
    return lam


def cov_C_from_H(cov_handle, s: float, lam: float, s2: float, lam2: float,
                 schedule: EtaSchedule | None = None, E_window: float = 12.0, method: str = "ray",
                 ray_q: int = 5, atoms=None, atom_tol: float = 0.02, return_diag: bool = False):
    """Covariance of ``C_{s,lam}`` and ``C_{s2,lam2}`` from the covariance of ``H``.

    Parameters
    ----------
    cov_handle : callable
        ``cov_handle(s, z, s2, z2)`` returns ``lim E[X(s, z) X(s2, z2)]``
        for ``z, z2`` in either half-plane.
    method : {'ray', 'horizontal'}
        ``ray`` integrates ``(1 / (2 pi^2)) Re[C(z, z2) + C(z, conj z2)]``
        over ``[eta, inf)^2`` above the two points; ``horizontal`` integrates
        ``E[Im H Im H2] = -(1/2) Re[C(z, z2) - C(z, conj z2)]`` over
        ``[-E_window, lam] x [-E_window, lam2]`` at height ``eta``.
    atoms : array_like, optional
        Atom locations; points within ``atom_tol`` are moved to the right of
        the atom with an :class:`AtomProximityWarning`.
    """
    schedule = EtaSchedule() if schedule is None else schedule
    if min(s, s2) <= 0 or max(s, s2) >= 1:
        return (0.0, {}) if return_diag else 0.0
    lam = _shift_from_atoms(lam, atoms, atom_tol)
    lam2 = _shift_from_atoms(lam2, atoms, atom_tol)
    vals = []
    if method == "ray":
        y, w, masks = ray_rule(schedule, q=ray_q)
        if hasattr(cov_handle, "prepare"):
            cov_handle.prepare(np.concatenate([lam + 1j * y, lam2 + 1j * y]))
        K = np.empty((y.size, y.size))
        for i in range(y.size):
            for j in range(y.size):
                a = cov_handle(s, lam + 1j * y[i], s2, lam2 + 1j * y[j])
                b = cov_handle(s, lam + 1j * y[i], s2, lam2 - 1j * y[j])
                K[i, j] = (a + b).real
        for m in masks:
            vals.append(float(w[m] @ K[np.ix_(m, m)] @ w[m]) / (2 * np.pi**2))
    elif method == "horizontal":
        for eta in schedule.etas:
            npan = int(np.ceil((E_window + max(lam, lam2)) / (eta / 2)))
            x, wx = gauss_legendre(8)

            def rule(hi):
                edges = np.linspace(-E_window, hi, max(2, int(np.ceil(npan * (hi + E_window)
                                                                     / (E_window + max(lam, lam2))))) + 1)
                a, b = edges[:-1, None], edges[1:, None]
                return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * wx).ravel()

            e1, w1 = rule(lam)
            e2, w2 = rule(lam2)
            acc = 0.0
            for i in range(e1.size):
                z = e1[i] + 1j * eta
                row = np.array([-0.5 * (cov_handle(s, z, s2, e + 1j * eta)
                                        - cov_handle(s, z, s2, e - 1j * eta)).real for e in e2])
                acc += w1[i] * np.sum(w2 * row)
            vals.append(acc / np.pi**2)
    else:
        raise ParameterError("method must be 'ray' or 'horizontal'")
    out, resid = extrapolate(schedule.etas, vals, schedule.order)
    if return_diag:
        return out, {"per_eta": vals, "fit_residual": resid, "lambda": lam, "lambda2": lam2}
    return out
