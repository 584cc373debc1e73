"""Limit covariance ``C(s, z; s', z') = lim E[X^n(s, z) X^n(s', z')]``."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..quadrature import gauss_legendre
from .bivariate import _PairSetup, kappa
from .grid import SolverConfig
from .univariate import DEFAULT_CONFIG

__all__ = ["limit_cov", "limit_cov_kappa", "u_nodes"]


def u_nodes(s: float, s2: float, per_interval: int):
    """Gauss–Legendre nodes on ``[0, 1]`` cut at ``s`` and ``s2``."""
    cuts = sorted({0.0, float(s), float(s2), 1.0})
    x, w = gauss_legendre(per_interval)
    us, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        us.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(us), np.concatenate(ws)


def limit_cov(model, s: float, z: complex, s2: float, z2: complex, cfg: SolverConfig | None = None,
              return_diag: bool = False):
    """``C(s, z; s2, z2) = int_0^1 (L_u(s, z; s2, z2) - L_u(z, s) L_u(z2, s2)) du``.

    The integrand changes form at ``u = s`` and ``u = s2``; the ``u``
    integral uses ``cfg.u_nodes`` Gauss–Legendre nodes on each piece.

    Parameters
    ----------
    model : PhiModel
        Exploding-moments type model.
    s, s2 : float
        In ``(0, 1)``.
    z, z2 : complex
        Off the real axis, either half-plane.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    if not (0 < s < 1 and 0 < s2 < 1):
        raise ParameterError("s and s2 must lie in (0, 1)")
    setup = _PairSetup(model, s, z, s2, z2, cfg)
    us, ws = u_nodes(s, s2, cfg.u_nodes)
    vals = np.array([setup.coupled(u)[0] for u in us])
    out = complex(np.sum(ws * vals))
    if return_diag:
        return out, {"u": us.tolist(), "integrand": vals.tolist()}
    return out


def limit_cov_kappa(model, s: float, z: complex, s2: float, z2: complex,
                    cfg: SolverConfig | None = None) -> complex:
    """``(min(s, s2) - s s2) kappa(z, z2)``, equal to :func:`limit_cov`.

    Exchangeability of the rows turns the covariance of partial traces into
    the covariance of a single diagonal resolvent entry, which needs one
    bivariate solve instead of a ``u`` integral.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    f = min(s, s2) - s * s2
    if f == 0:
        return 0j
    return complex(f * kappa(model, z, z2, cfg))
