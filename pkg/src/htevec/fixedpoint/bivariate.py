"""Bivariate fixed-point equation and the two-point functional.

For ``s1 <= s2`` the solution of the two-point equation splits as

    rho_u(t1, t2) = rho_1(t1) + rho_2(t2) + D(t1, t2),

where ``rho_r = rho_{z_r, z~_r, s_r}`` solves the univariate equation (the
two boundary lines ``delta_0 x mu`` and ``mu x delta_0`` of the kernel
combine with the univariate correction terms into exactly these functions)
and ``D`` collects the ``tau`` part of the kernel:

    D(t1, t2) = sum_b omega_b t1 t2 iint tau(t1 y1, t2 y2)
                E_1b(y1) E_2b(y2) exp(rho_1(y1) + rho_2(y2) + D(y1, y2)) dy1 dy2,
    E_rb(y)   = exp(i sg_r y (z_r + z~_r (1{b <= r} - s_r))).

Since ``tau`` is a finite sum of products ``w x jinc(2 sqrt(x v)) jinc(2 sqrt(x v'))``
the discretized right side is a sum of matrix products ``A1 (.) A2^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from ..errors import ParameterError, SolverError, UnsupportedKernelError
from ..philib import PhiModel, jinc, kernel_tau_tilde
from ..quadrature import HalfLineRule
from .grid import DomainPair, SolverConfig, make_rule
from .univariate import DEFAULT_CONFIG, eval_L_u, solve_rho_s, solve_rho_z

__all__ = [
    "block_weights",
    "PairSolution",
    "solve_rho_pair",
    "eval_L_pair",
    "coupled_L_pair",
    "kappa",
]


def block_weights(u: float, s1: float, s2: float, scheme: str = "nested"):
    """Weights of the row blocks ``[0, s1]``, ``(s1, s2]``, ``(s2, 1]``.

    ``nested`` gives the mass of ``[0, u]`` inside each block, i.e. the rows
    whose entries are shared by the two resolvents; these weights make
    ``rho_u(t1, 0) = rho_1(t1)`` hold.  ``product`` gives ``u`` times the
    block lengths.
    """
    if s1 > s2:
        raise ParameterError("block weights need s1 <= s2")
    if scheme == "nested":
        return (min(u, s1), max(min(u, s2) - s1, 0.0), max(u - s2, 0.0))
    if scheme == "product":
        return (u * s1, u * (s2 - s1), u * (1.0 - s2))
    raise ParameterError(f"unknown block weight scheme {scheme!r}")


def _factor_matrices(model: PhiModel, rule: HalfLineRule):
    """Per-atom matrices ``t_i W_j sqrt(x) jinc(2 sqrt(x t_i y_j))``."""
    out = []
    for w, x in model.m_atoms:
        if x > 0 and w > 0:
            a = rule.y[:, None] * rule.w[None, :] * np.sqrt(x) * jinc(2 * np.sqrt(x * np.outer(rule.y, rule.y)))
            out.append((w, a))
    return out


def _apply(factors1, factors2, X):
    out = np.zeros_like(X)
    for (w, a1), (_, a2) in zip(factors1, factors2):
        out += w * (a1 @ X @ a2.T)
    return out


def _solve_D(f1, f2, wgt, D0, cfg: SolverConfig):
    """Newton–GMRES for ``D = sum_a w_a A1 (wgt * exp(D)) A2^T``."""
    D = D0.copy()
    shape = D.shape
    res = np.inf
    for it in range(cfg.max_iter):
        eD = np.exp(D)
        F = D - _apply(f1, f2, wgt * eD)
        res = float(np.max(np.abs(F)))
        if res <= cfg.tol:
            return D, res, it
        jw = wgt * eD

        def mv(v, jw=jw):
            V = v.reshape(shape)
            return (V - _apply(f1, f2, jw * V)).ravel()

        op = LinearOperator((D.size, D.size), matvec=mv, dtype=complex)
        step, info = gmres(op, -F.ravel(), rtol=1e-3 * min(1.0, res), atol=0.1 * cfg.tol, restart=60,
                           maxiter=20)
        if info < 0 or not np.all(np.isfinite(step)):
            break
        D = D + step.reshape(shape)
    raise SolverError(f"bivariate solve did not converge (residual {res:.3e})", res, cfg.max_iter)


def _solve_linear(f1, f2, jw, rhs, cfg):
    shape = rhs.shape

    def mv(v):
        V = v.reshape(shape)
        return (V - _apply(f1, f2, jw * V)).ravel()

    op = LinearOperator((rhs.size, rhs.size), matvec=mv, dtype=complex)
    x, info = gmres(op, rhs.ravel(), rtol=1e-12, atol=0.1 * cfg.tol, restart=80, maxiter=50)
    if info != 0:
        raise SolverError("linearized bivariate solve did not converge")
    return x.reshape(shape)


@dataclass
class PairSolution:
    """Solution ``rho_u = rho_1 + rho_2 + D`` on a tensor grid."""

    u: float
    t1: np.ndarray
    w1: np.ndarray
    t2: np.ndarray
    w2: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    D: np.ndarray
    residual: float
    iterations: int

    @property
    def values(self) -> np.ndarray:
        return self.rho1[:, None] + self.rho2[None, :] + self.D

    def transpose(self) -> "PairSolution":
        return PairSolution(self.u, self.t2, self.w2, self.t1, self.w1, self.rho2, self.rho1,
                            self.D.T.copy(), self.residual, self.iterations)


class _Side:
    """Grid, univariate solutions and kernel factors of one coordinate."""

    def __init__(self, model, s, z, cfg):
        self.s = s
        self.z = complex(z)
        self.sg = 1.0 if self.z.imag > 0 else -1.0
        self.cfg = cfg
        self.model = model
        self.rule = make_rule(model, self.z, 0j, s, cfg, nodes=cfg.pair_nodes)
        self.factors = _factor_matrices(model, self.rule)
        self.fine = solve_rho_s(model, DomainPair(self.z, 0j, s), cfg)
        self._rho = {}

    @property
    def t(self):
        return self.rule.y

    def rho(self, zt: complex = 0j):
        """``rho_{z, z~, s}`` on the pair nodes."""
        key = complex(zt)
        if key not in self._rho:
            if key == 0:
                fine = self.fine
            else:
                fine = solve_rho_s(self.model, DomainPair(self.z, key, self.s), self.cfg, self.fine,
                                   _rule_from(self.fine))
            self._rho[key] = fine.nystrom(self.t)
        return self._rho[key]

    def e(self, zt, c):
        return np.exp(1j * self.sg * self.t * (self.z + zt * c) + self.rho(zt))


def _rule_from(g):
    return HalfLineRule(g.t, g.w, g.T, g.model.gamma if g.model.is_levy else 0.0, 0)


def _indicators(beta_le_r, s):
    return (1.0 if beta_le_r else 0.0) - s


class _PairSetup:
    def __init__(self, model, s1, z1, s2, z2, cfg):
        if model.is_levy:
            raise UnsupportedKernelError("the bivariate equation is not available for the Levy family")
        kernel_tau_tilde(model)
        if not (0 < s1 < 1 and 0 < s2 < 1):
            raise ParameterError("s1 and s2 must lie in (0, 1)")
        self.model = model
        self.cfg = cfg
        self.swap = s1 > s2
        if self.swap:
            s1, z1, s2, z2 = s2, z2, s1, z1
        self.s1, self.s2 = s1, s2
        self.a = _Side(model, s1, z1, cfg)
        self.b = _Side(model, s2, z2, cfg)
        self._D = {}

    def weight(self, u, zt1, zt2):
        """``sum_b omega_b e_1b e_2b^T`` (side 1 index ``b <= 1``, side 2 ``b <= 2``)."""
        om = block_weights(u, self.s1, self.s2, self.cfg.block_weights)
        out = np.zeros((self.a.t.size, self.b.t.size), complex)
        for beta, w in enumerate(om, start=1):
            if w == 0:
                continue
            e1 = self.a.e(zt1, _indicators(beta <= 1, self.s1))
            e2 = self.b.e(zt2, _indicators(beta <= 2, self.s2))
            out += w * np.outer(e1, e2)
        return out

    def D(self, u, zt1=0j, zt2=0j):
        key = (u, complex(zt1), complex(zt2))
        if key not in self._D:
            if not self.a.factors:
                self._D[key] = (np.zeros((self.a.t.size, self.b.t.size), complex), 0.0, 0)
            else:
                base = self._D.get((u, 0j, 0j))
                D0 = base[0] if base is not None else np.zeros((self.a.t.size, self.b.t.size), complex)
                self._D[key] = _solve_D(self.a.factors, self.b.factors, self.weight(u, zt1, zt2), D0, self.cfg)
        return self._D[key]

    def c(self, u):
        return _indicators(u <= self.s1, self.s1), _indicators(u <= self.s2, self.s2)

    def coupled(self, u):
        """``L_u(s1, z1; s2, z2) - L_u(z1, s1) L_u(z2, s2)``."""
        if u <= 0 or not self.a.factors:
            return 0j, {}
        t1, t2 = self.a.t, self.b.t
        W = np.outer(self.a.rule.w / t1, self.b.rule.w / t2)
        c1, c2 = self.c(u)
        sg1, sg2 = self.a.sg, self.b.sg
        if self.cfg.derivative == "implicit":
            return self._coupled_implicit(u, W, c1, c2), {}
        h1 = self.cfg.fd_step * max(1.0, abs(self.a.z))
        h2 = self.cfg.fd_step * max(1.0, abs(self.b.z))

        def mixed(f):
            acc = 0j
            for a_ in (1, -1):
                for b_ in (1, -1):
                    zt1, zt2 = a_ * f * h1, b_ * f * h2
                    x1 = 1j * sg1 * t1 * (self.a.z + zt1 * c1) + self.a.rho(zt1)
                    x2 = 1j * sg2 * t2 * (self.b.z + zt2 * c2) + self.b.rho(zt2)
                    dm = np.expm1(self.D(u, zt1, zt2)[0])
                    acc += a_ * b_ * np.sum(W * np.exp(x1)[:, None] * np.exp(x2)[None, :] * dm)
            return acc / (4 * f * f * h1 * h2)

        m1, m2 = mixed(1.0), mixed(0.5)
        return (4 * m2 - m1) / 3, {"M_h": m1, "M_h2": m2}

    def _coupled_implicit(self, u, W, c1, c2):
        a, b = self.a, self.b
        D, _, _ = self.D(u)
        eD = np.exp(D)
        om = block_weights(u, self.s1, self.s2, self.cfg.block_weights)
        y1, y2 = a.t, b.t
        e1 = a.e(0j, 0.0)
        e2 = b.e(0j, 0.0)
        wgt = np.zeros_like(D)
        S1 = np.zeros_like(D)
        S2 = np.zeros_like(D)
        S12 = np.zeros_like(D)
        for beta, w in enumerate(om, start=1):
            if w == 0:
                continue
            d1 = 1j * a.sg * y1 * _indicators(beta <= 1, self.s1)
            d2 = 1j * b.sg * y2 * _indicators(beta <= 2, self.s2)
            wgt += w * np.outer(e1, e2)
            S1 += w * np.outer(d1 * e1, e2)
            S2 += w * np.outer(e1, d2 * e2)
            S12 += w * np.outer(d1 * e1, d2 * e2)
        f1, f2 = a.factors, b.factors
        jw = wgt * eD
        D1 = _solve_linear(f1, f2, jw, _apply(f1, f2, S1 * eD), self.cfg)
        D2 = _solve_linear(f1, f2, jw, _apply(f1, f2, S2 * eD), self.cfg)
        rhs = _apply(f1, f2, S12 * eD + S1 * eD * D2 + S2 * eD * D1 + jw * D1 * D2)
        D12 = _solve_linear(f1, f2, jw, rhs, self.cfg)
        x1 = (1j * a.sg * y1 * c1)[:, None]
        x2 = (1j * b.sg * y2 * c2)[None, :]
        base = np.exp(1j * a.sg * y1 * a.z + a.rho())[:, None] * np.exp(1j * b.sg * y2 * b.z + b.rho())[None, :]
        integrand = base * (x1 * x2 * np.expm1(D) + x1 * eD * D2 + x2 * eD * D1 + eD * (D1 * D2 + D12))
        return complex(np.sum(W * integrand))


def solve_rho_pair(model: PhiModel, u: float, first, second, cfg: SolverConfig | None = None) -> PairSolution:
    """Solve the bivariate equation on the tensor grid.

    Parameters
    ----------
    model : PhiModel
        Exploding-moments type model.
    u : float
        In ``[0, 1]``.
    first, second : tuple
        ``(s_r, z_r, z~_r)`` for the two coordinates.  If ``s1 > s2`` the
        problem is solved with the coordinates exchanged and the solution is
        transposed back.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    if not 0 <= u <= 1:
        raise ParameterError("u must lie in [0, 1]")
    (s1, z1, zt1), (s2, z2, zt2) = first, second
    setup = _PairSetup(model, s1, z1, s2, z2, cfg)
    if setup.swap:
        zt1, zt2 = zt2, zt1
    D, res, it = setup.D(u, zt1, zt2)
    sol = PairSolution(u, setup.a.t, setup.a.rule.w, setup.b.t, setup.b.rule.w,
                       setup.a.rho(zt1), setup.b.rho(zt2), D, res, it)
    return sol.transpose() if setup.swap else sol


def coupled_L_pair(model, u, s1, z1, s2, z2, cfg=None, setup=None):
    """``L_u(s1, z1; s2, z2) - L_u(z1, s1) L_u(z2, s2)``."""
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    setup = _PairSetup(model, s1, z1, s2, z2, cfg) if setup is None else setup
    return setup.coupled(u)[0]


def eval_L_pair(model: PhiModel, u: float, s1: float, z1: complex, s2: float, z2: complex,
                cfg: SolverConfig | None = None) -> complex:
    """Two-point functional ``L_u(s1, z1; s2, z2)``.

    The mixed derivative in ``(z~1, z~2)`` at the origin is taken either by
    four-point central differences with one Richardson step or from the
    linearized equations (``cfg.derivative``).  The part of the integrand
    that factorizes is integrated on the univariate grids, which gives
    ``L_u(z1, s1) L_u(z2, s2)``; the remainder involves ``exp(D) - 1`` and is
    integrated on the tensor grid.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    prod = eval_L_u(model, u, s1, z1, cfg) * eval_L_u(model, u, s2, z2, cfg)
    return complex(prod + coupled_L_pair(model, u, s1, z1, s2, z2, cfg))


def kappa(model: PhiModel, z1: complex, z2: complex, cfg: SolverConfig | None = None) -> complex:
    """Limit of ``Cov(G_11(z1), G_11(z2))`` for the resolvent of one matrix.

    With ``D`` the solution of the bivariate equation at ``u = 1`` and
    ``z~ = 0`` (all rows shared),

        kappa = -sg1 sg2 iint exp(i sg1 t1 z1 + i sg2 t2 z2 + rho_z1 + rho_z2) (exp(D) - 1).
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    setup = _PairSetup(model, 0.5, z1, 0.5, z2, cfg)
    a, b = setup.a, setup.b
    D, _, _ = setup.D(1.0)
    f = np.outer(a.rule.w * a.e(0j, 0.0), b.rule.w * b.e(0j, 0.0))
    return complex(-a.sg * b.sg * np.sum(f * np.expm1(D)))
