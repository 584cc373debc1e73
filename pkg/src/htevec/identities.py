"""Linear-algebra and analysis identities used as test oracles.

* :func:`schur_trace_delta`: effect on ``Tr(P G)`` of removing one
  row/column of ``A``, via the Schur complement, together with the bound
  ``|Tr(P G) - Tr(P^(k) G^(k))| <= 5 ||P||_inf / |Im z|``.
* :func:`prod_exp_gap`: distance between ``prod(1 + u_i/n)`` and
  ``exp(mean(u))``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericError, ParameterError

__all__ = ["schur_trace_delta", "resolvent_bound", "prod_exp_gap", "log_radius", "LOG_RADIUS"]


def resolvent_bound(P, z: complex) -> float:
    """``5 ||P||_inf / |Im z|``."""
    return 5.0 * float(np.max(np.abs(np.diag(P)))) / abs(complex(z).imag)


def schur_trace_delta(A, P, k: int, z: complex, check_bound: bool = True):
    """Compare ``Tr(PG) - Tr(P^(k) G^(k))`` with its Schur-complement form.

    Parameters
    ----------
    A : ndarray, shape (n, n)
        Real symmetric matrix.
    P : ndarray, shape (n, n)
        Real diagonal matrix.
    k : int
        Zero-based index of the removed row and column.
    z : complex
        Spectral parameter with ``Im z != 0``.
    check_bound : bool
        Raise :class:`NumericError` if ``|lhs|`` exceeds
        :func:`resolvent_bound`.

    Returns
    -------
    lhs, rhs : complex
        ``lhs`` by direct inversion, ``rhs`` equal to
        ``(P_kk + a^T G^(k) P^(k) G^(k) a) / (z - A_kk - a^T G^(k) a)`` where
        ``a`` is column ``k`` of ``A`` without its ``k``-th entry.
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must have nonzero imaginary part")
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    n = A.shape[0]
    if not 0 <= k < n:
        raise ParameterError("k out of range")
    keep = np.arange(n) != k
    G = np.linalg.inv(z * np.eye(n) - A)
    Ak = A[np.ix_(keep, keep)]
    Pk = P[np.ix_(keep, keep)]
    Gk = np.linalg.inv(z * np.eye(n - 1) - Ak)
    lhs = np.trace(P @ G) - np.trace(Pk @ Gk)
    a = A[keep, k]
    Ga = Gk @ a
    rhs = (P[k, k] + Ga @ Pk @ Ga) / (z - A[k, k] - a @ Ga)
    if check_bound and abs(lhs) > resolvent_bound(P, z):
        raise NumericError(f"resolvent-difference bound violated: {abs(lhs):.3e}")
    return complex(lhs), complex(rhs)


def _log_ratio_max(r: float, n_theta: int = 721) -> float:
    th = np.linspace(0.0, 2 * np.pi, n_theta)
    z = r * np.exp(1j * th)
    return float(np.max(np.abs(np.log1p(z) - z)) / r**2)


def log_radius() -> float:
    """Largest ``R`` with ``|log(1+z) - z| <= |z|^2`` on the disc ``|z| <= R``."""
    return brentq(lambda r: _log_ratio_max(r) - 1.0, 0.1, 0.95, xtol=1e-12)


LOG_RADIUS = log_radius()


def prod_exp_gap(u, n: int, check: bool = True):
    """Gap between ``prod(1 + u_i/n)`` and ``exp(sum(u_i)/n)``.

    Returns
    -------
    gap : float
        ``|prod(1 + u_i/n) - exp(S)|`` with ``S = sum(u_i)/n``.
    bound : float
        ``(M^2/n) exp(|S| + M^2/n)`` with ``M = max |u_i|``.
    applicable : bool
        Whether ``M/n <= R`` (see :data:`LOG_RADIUS`).
    """
    u = np.asarray(u, dtype=complex)
    if n <= 0:
        raise ParameterError("n must be positive")
    if u.size == 0:
        return 0.0, 0.0, True
    S = u.sum() / n
    M = float(np.max(np.abs(u)))
    gap = float(abs(np.prod(1.0 + u / n) - np.exp(S)))
    bound = M * M / n * np.exp(abs(S) + M * M / n)
    applicable = M / n <= LOG_RADIUS
    if check and applicable and gap > bound * (1 + 1e-12):
        raise NumericError(f"product-exponential bound violated: {gap:.3e} > {bound:.3e}")
    return gap, float(bound), bool(applicable)
