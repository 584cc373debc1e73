"""Univariate fixed-point equations and the one-point functional ``L_u``.

For ``(z, z~)`` in the domain attached to ``s`` and ``sg = sgn Im z`` the
function ``rho = rho_{z, z~, s}`` solves

    rho(t) = t int_0^inf g(t y) k(y) exp(rho(y)) dy,
    k(y)   = (s exp(i y sg z~) + 1 - s) exp(i y sg (z - s z~)),

which reduces at ``z~ = 0`` to the equation of ``rho_z`` with
``k(y) = exp(i y sg z)``.  The equation is discretized by a Nyström method
on a composite rule: with nodes ``y_j`` and weights ``W_j`` the unknowns are
``rho_i = rho(y_i)`` and ``M_ij = y_i W_j g(y_i y_j)`` does not depend on
``z``.

The Stieltjes transform of the limit spectral measure follows from
``1/z = -i sg int_0^inf exp(i sg t z) dt`` applied to ``1/(z - A)_11``
together with ``E[exp(-i sg t G_11)] -> exp(rho_z(t))``:

    G(z) = -i sg int_0^inf exp(i sg t z + rho_z(t)) dt.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from ..errors import DomainError, SolverError
from ..philib import PhiModel, g_eval
from ..quadrature import HalfLineRule
from .grid import DomainPair, RhoGrid, SolverConfig, decay_rate, make_rule

__all__ = [
    "solve_rho_z",
    "solve_rho_s",
    "stieltjes_mu_phi",
    "eval_L_u",
    "kernel_matrix",
    "fixed_point",
]

log = logging.getLogger(__name__)

_EXP_CAP = 60.0
DEFAULT_CONFIG = SolverConfig()


@lru_cache(maxsize=6)
def _kernel_matrix_cached(model: PhiModel, key: tuple) -> np.ndarray:
    y = np.frombuffer(key[0])
    w = np.frombuffer(key[1])
    if model.is_levy:
        c, ga = model.C_alpha.real, model.gamma
        m = c * np.outer(y ** (1 + ga), w * y**ga)
    else:
        m = y[:, None] * g_eval(model, np.outer(y, y)) * w[None, :]
    m.setflags(write=False)
    return m


def kernel_matrix(model: PhiModel, rule: HalfLineRule) -> np.ndarray:
    """``M_ij = y_i W_j g(y_i y_j)`` on the nodes of ``rule``."""
    return _kernel_matrix_cached(model, (rule.y.tobytes(), rule.w.tobytes()))


def _kvec(y, z, zt, s, sg):
    if zt == 0:
        return np.exp(1j * sg * y * z)
    return (s * np.exp(1j * sg * y * zt) + 1 - s) * np.exp(1j * sg * y * (z - s * zt))


def _residual(M, k, rho):
    with np.errstate(over="ignore", invalid="ignore"):
        r = rho - M @ (k * np.exp(np.minimum(rho.real, _EXP_CAP) + 1j * rho.imag))
    return r, float(np.max(np.abs(r))) if np.all(np.isfinite(r)) else np.inf


def fixed_point(M: np.ndarray, k: np.ndarray, rho0: np.ndarray, cfg: SolverConfig):
    """Solve ``rho = M (k exp(rho))``.

    Returns
    -------
    rho : ndarray
    residual : float
    iterations : int
    method : str
        Method that produced the final iterate.

    Raises
    ------
    SolverError
        If the residual does not drop below ``cfg.tol``.
    """
    rho = np.array(rho0, dtype=complex)
    F, res = _residual(M, k, rho)
    it = 0
    method = cfg.method
    if method in ("newton", "hybrid"):
        n = rho.size
        eye = np.eye(n)
        while res > cfg.tol and it < cfg.max_iter:
            it += 1
            e = k * np.exp(rho)
            try:
                step = np.linalg.solve(eye - M * e[None, :], -F)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            accepted = False
            while lam > 1e-6:
                trial = rho + lam * step
                if np.max(trial.real) < _EXP_CAP:
                    Ft, rt = _residual(M, k, trial)
                    if rt < (1 - 1e-4 * lam) * res:
                        rho, F, res = trial, Ft, rt
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                break
        if res <= cfg.tol:
            return rho, res, it, "newton"
        if method == "newton":
            raise SolverError(f"Newton iteration stalled at residual {res:.3e}", res, it)
        method = "picard"
        rho = np.array(rho0, dtype=complex)
        F, res = _residual(M, k, rho)
    th = cfg.damping
    pit = 0
    while res > cfg.tol and pit < cfg.max_iter:
        pit += 1
        rho = rho - th * F
        F, res = _residual(M, k, rho)
        if not np.isfinite(res):
            break
    if res > cfg.tol:
        raise SolverError(f"fixed-point iteration did not converge (residual {res:.3e})", res, it + pit)
    return rho, res, it + pit, "picard"


def _transfer(initial, rule: HalfLineRule):
    if initial is None:
        return np.zeros(rule.size, complex)
    if isinstance(initial, RhoGrid):
        if initial.t.size == rule.size and np.array_equal(initial.t, rule.y):
            return initial.values.copy()
        return initial.nystrom(rule.y)
    return np.asarray(initial, dtype=complex)


def _solve_on_rule(model, z, zt, s, cfg, rule, initial=None):
    M = kernel_matrix(model, rule)
    k = _kvec(rule.y, z, zt, s, 1.0)
    rho, res, it, meth = fixed_point(M, k, _transfer(initial, rule), cfg)
    src = rule.w * k * np.exp(rho)
    for arr in (rho, src):
        arr.setflags(write=False)
    return RhoGrid(model, z, zt, s, rule.y, rule.w, rho, src, rule.T, res, it, meth)


def _valid(grid: RhoGrid) -> bool:
    # branch test on t <= T/2 only: near T the integrand carries the factor
    # exp(-delta t) <= sqrt(trunc_eps) and rho there is quadrature noise
    head = grid.values[grid.t <= 0.5 * grid.T]
    return bool(np.all(np.isfinite(grid.values)) and np.max(head.real, initial=0.0) <= 1e-8)


def _solve_upper(model, z, zt, s, cfg, initial=None, rule=None):
    """Solve with ``Im z > 0``, using continuation in ``Im z`` when needed."""
    if rule is None:
        rule = make_rule(model, z, zt, s, cfg)
    mode = cfg.continuation
    if mode != "always":
        try:
            out = _solve_on_rule(model, z, zt, s, cfg, rule, initial)
            if _valid(out) or mode == "never":
                return out
            log.debug("direct solve at z=%s left the admissible branch", z)
        except SolverError:
            if mode == "never":
                raise
    # continuation: raise Im z (and hence the decay), then walk back down
    eta = z.imag
    shifts = []
    c = max(cfg.continuation_start, eta)
    while c > eta * (1 + 1e-12):
        shifts.append(c - eta)
        c *= cfg.continuation_ratio
    shifts.append(0.0)
    prev = None
    steps = 0
    for d in shifts:
        zc = z + 1j * d
        r = rule if d == 0 else make_rule(model, zc, zt, s, cfg)
        prev = _solve_on_rule(model, zc, zt, s, cfg, r, prev)
        steps += 1
    if not _valid(prev):
        raise SolverError(f"solution at z={z} violates Re(rho) <= 0", prev.residual, prev.iterations)
    prev.continuation_steps = steps
    return prev


def _conj_grid(g: RhoGrid) -> RhoGrid:
    v = g.values.conj()
    src = g.source.conj()
    return RhoGrid(g.model, g.z.conjugate(), g.ztilde.conjugate(), g.s, g.t, g.w, v, src, g.T,
                   g.residual, g.iterations, g.method, g.continuation_steps)


@lru_cache(maxsize=512)
def _solve_cached(model, z, zt, s, cfg):
    return _solve_upper(model, z, zt, s, cfg)


def solve_rho_s(model: PhiModel, pair: DomainPair, cfg: SolverConfig | None = None,
                initial: RhoGrid | None = None, rule: HalfLineRule | None = None) -> RhoGrid:
    """Solve for ``rho_{z, z~, s}``.

    Parameters
    ----------
    model : PhiModel
    pair : DomainPair
        ``(z, z~, s)``; for ``Im z < 0`` the conjugate problem is solved and
        the solution conjugated.
    cfg : SolverConfig, optional
    initial : RhoGrid, optional
        Starting point (e.g. a solution at a nearby point).
    rule : HalfLineRule, optional
        Force the quadrature rule (used to keep several solves on one grid).
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    flip = pair.sign < 0
    p = pair.conj() if flip else pair
    if initial is not None and flip:
        initial = _conj_grid(initial)
    if initial is None and rule is None:
        out = _solve_cached(model, p.z, p.ztilde, p.s, cfg)
    else:
        out = _solve_upper(model, p.z, p.ztilde, p.s, cfg, initial, rule)
    return _conj_grid(out) if flip else out


def solve_rho_z(model: PhiModel, z: complex, cfg: SolverConfig | None = None,
                initial: RhoGrid | None = None, rule: HalfLineRule | None = None) -> RhoGrid:
    """Solve ``rho_z(t) = t int g(t y) exp(i y sg z + rho_z(y)) dy``.

    Examples
    --------
    >>> from htevec.philib import PhiModel
    >>> rho = solve_rho_z(PhiModel.gaussian(1.0), 2j)
    >>> round(abs(stieltjes_mu_phi(rho)), 6)
    0.414214
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must have nonzero imaginary part")
    return solve_rho_s(model, DomainPair(z, 0j, 0.5), cfg, initial, rule)


def stieltjes_mu_phi(rho: RhoGrid, z: complex | None = None) -> complex:
    """``G(z) = -i sg int_0^inf exp(i sg t z + rho_z(t)) dt`` on the grid of ``rho``."""
    z = rho.z if z is None else complex(z)
    if z != rho.z:
        raise DomainError("rho was solved at a different z")
    sg = 1.0 if z.imag > 0 else -1.0
    f = np.exp(1j * sg * rho.t * z + rho.values)
    val = -1j * sg * np.sum(rho.w * f)
    if not np.isfinite(val):
        raise DomainError("divergent quadrature")
    return complex(val)


def _indicator(u, s):
    return (1.0 if u <= s else 0.0) - s


def eval_L_u(model: PhiModel, u: float, s: float, z: complex, cfg: SolverConfig | None = None,
             return_diag: bool = False):
    """One-point functional ``L_u(z, s)``.

    ``L_u = -int_0^inf (1/t) d/dz~ [exp(i sg t (z + z~ c)) exp(rho_{z,z~,s}(t))]``
    at ``z~ = 0`` with ``c = 1{u <= s} - s``.  With ``cfg.derivative == 'fd'``
    the derivative is a central difference with steps ``h`` and ``h/2``
    combined by one Richardson step; otherwise the derivative of ``rho`` is
    obtained from the linearized equation.

    Returns
    -------
    complex, or (complex, dict) with ``return_diag``
        The diagnostics hold the two finite-difference estimates.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must have nonzero imaginary part")
    if z.imag < 0:
        out = eval_L_u(model, u, s, z.conjugate(), cfg, return_diag)
        return (out[0].conjugate(), out[1]) if return_diag else out.conjugate()
    c = _indicator(u, s)
    base = solve_rho_s(model, DomainPair(z, 0j, s), cfg)
    t, w = base.t, base.w
    if cfg.derivative == "implicit":
        M = kernel_matrix(model, _rule_of(base))
        k0 = np.exp(1j * t * z)
        # d k / d z~ at z~ = 0: i t s k0 from the first factor, -i t s k0 from the second
        dk = 1j * t * s * k0 - 1j * t * s * k0
        e = k0 * np.exp(base.values)
        drho = np.linalg.solve(np.eye(t.size) - M * e[None, :], M @ (dk * np.exp(base.values)))
        deriv = (1j * t * c + drho) * np.exp(1j * t * z + base.values)
        val = -np.sum(w * deriv / t)
        return (complex(val), {"drho_max": float(np.max(np.abs(drho)))}) if return_diag else complex(val)
    rule = _rule_of(base)
    h = cfg.fd_step * max(1.0, abs(z))

    def diff(step):
        rp = solve_rho_s(model, DomainPair(z, step, s), cfg, base, rule)
        rm = solve_rho_s(model, DomainPair(z, -step, s), cfg, base, rule)
        xp = 1j * t * (z + step * c) + rp.values
        xm = 1j * t * (z - step * c) + rm.values
        d = np.exp(xm) * np.expm1(xp - xm) / (2 * step)
        return -np.sum(w * d / t)

    d1, d2 = diff(h), diff(h / 2)
    val = complex((4 * d2 - d1) / 3)
    if return_diag:
        return val, {"h": h, "D_h": complex(d1), "D_h2": complex(d2)}
    return val


def _rule_of(g: RhoGrid) -> HalfLineRule:
    return HalfLineRule(g.t, g.w, g.T, g.model.gamma if g.model.is_levy else 0.0, 0)
