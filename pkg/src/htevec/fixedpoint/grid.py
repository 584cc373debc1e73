"""Configuration, domain checks and the grid-function container."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import DomainError, ParameterError, SolverError
from ..philib import PhiModel, g_eval
from ..quadrature import HalfLineRule, halfline_rule

__all__ = ["SolverConfig", "DomainPair", "RhoGrid", "make_rule", "decay_rate"]

_METHODS = ("hybrid", "newton", "picard")


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings of the fixed-point solvers.

    Attributes
    ----------
    nodes : int
        Size of the univariate grid on a unit-scale problem; every part of
        the composite rule is refined in proportion (doubling ``nodes``
        doubles the resolution).
    truncation : float, optional
        Fixed truncation ``T``; by default ``-log(trunc_eps) / delta``.
    trunc_eps : float
        Target size of ``exp(-delta T)``.
    damping : float
        Relaxation factor of the Picard iteration, in ``(0, 1]``.
    max_iter : int
    tol : float
        Sup-norm residual required at every node.
    method : {'hybrid', 'newton', 'picard'}
        ``hybrid`` runs Newton with backtracking and falls back to damped
        Picard iteration if Newton stalls.
    continuation : {'auto', 'always', 'never'}
        Continuation in ``Im z`` from ``continuation_start`` down to the
        target by the factor ``continuation_ratio``; ``auto`` uses it only
        when the direct solve fails or lands on an invalid branch.
    max_width : float
        Largest Gauss–Legendre panel width on ``[1, T]``.
    max_nodes : int
        Largest admissible univariate rule; the dense kernel matrix grows
        with its square, so larger rules raise :class:`SolverError`.  Near
        the axis the node count grows like ``|Re z| / Im z``.
    pair_nodes : int
        Grid size parameter of the bivariate solver.
    fd_step : float
        Relative step ``h`` of the finite differences in ``z~``.
    derivative : {'fd', 'implicit'}
        Finite differences of solved families, or derivatives from the
        linearized fixed-point equations.
    u_nodes : int
        Gauss–Legendre nodes per ``u`` subinterval in :func:`limit_cov`.
    block_weights : {'nested', 'product'}
        Weights of the three row blocks in the bivariate equation, see
        :func:`htevec.fixedpoint.bivariate.block_weights`.
    """

    nodes: int = 160
    truncation: float | None = None
    trunc_eps: float = 1e-12
    damping: float = 1.0
    max_iter: int = 200
    tol: float = 1e-9
    method: str = "hybrid"
    continuation: str = "auto"
    continuation_start: float = 8.0
    continuation_ratio: float = 0.5
    max_width: float = 4.0
    max_nodes: int = 4000
    pair_nodes: int = 48
    fd_step: float = 1e-4
    derivative: str = "fd"
    u_nodes: int = 6
    block_weights: str = "nested"

    def __post_init__(self):
        if self.nodes < 16 or self.pair_nodes < 8 or self.max_nodes < self.nodes:
            raise ParameterError("node counts too small")
        if not 0 < self.damping <= 1:
            raise ParameterError("damping must lie in (0, 1]")
        if not 0 < self.tol < 1e-6:
            raise ParameterError("tol must lie in (0, 1e-6)")
        if not 0 < self.trunc_eps < 1:
            raise ParameterError("trunc_eps must lie in (0, 1)")
        if self.truncation is not None and self.truncation <= 0:
            raise ParameterError("truncation must be positive")
        if self.method not in _METHODS:
            raise ParameterError(f"method must be one of {_METHODS}")
        if self.continuation not in ("auto", "always", "never"):
            raise ParameterError("continuation must be auto, always or never")
        if not 0 < self.continuation_ratio < 1 or self.continuation_start <= 0:
            raise ParameterError("bad continuation schedule")
        if self.derivative not in ("fd", "implicit"):
            raise ParameterError("derivative must be 'fd' or 'implicit'")
        if self.block_weights not in ("nested", "product"):
            raise ParameterError("block_weights must be 'nested' or 'product'")
        if self.max_iter < 1 or self.u_nodes < 1 or self.fd_step <= 0 or self.max_width <= 0:
            raise ParameterError("max_iter, u_nodes, fd_step and max_width must be positive")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DomainPair:
    """A point ``(z, z~)`` of the domain attached to ``s``.

    Both ``Im(z + (1 - s) z~)`` and ``Im(z - s z~)`` must have the sign of
    ``Im z``.
    """

    z: complex
    ztilde: complex = 0j
    s: float = 0.5

    def __post_init__(self):
        z, zt = complex(self.z), complex(self.ztilde)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "ztilde", zt)
        if z.imag == 0:
            raise DomainError("z must have nonzero imaginary part")
        if not 0 < self.s < 1:
            raise ParameterError("s must lie in (0, 1)")
        if decay_rate(z, zt, self.s) <= 0:
            raise DomainError(f"(z, z~) = ({z}, {zt}) is outside the domain for s = {self.s}")

    @property
    def sign(self) -> int:
        return 1 if self.z.imag > 0 else -1

    def conj(self) -> "DomainPair":
        return DomainPair(self.z.conjugate(), self.ztilde.conjugate(), self.s)


def decay_rate(z: complex, ztilde: complex = 0j, s: float = 0.5) -> float:
    """``min(sgn Im(z + (1-s) z~), sgn Im(z - s z~))`` with ``sgn = sgn Im z``."""
    sg = 1.0 if z.imag > 0 else -1.0
    return min(sg * (z + (1 - s) * ztilde).imag, sg * (z - s * ztilde).imag)


def _frequency(z: complex, ztilde: complex, s: float) -> float:
    return max(abs((z + (1 - s) * ztilde).real), abs((z - s * ztilde).real))


def make_rule(model: PhiModel, z: complex, ztilde: complex, s: float, cfg: SolverConfig,
              nodes: int | None = None, delta: float | None = None) -> HalfLineRule:
    """Quadrature rule adapted to the decay and oscillation at ``(z, z~)``."""
    delta = decay_rate(z, ztilde, s) if delta is None else delta
    T = cfg.truncation if cfg.truncation is not None else -np.log(cfg.trunc_eps) / delta
    freq = _frequency(z, ztilde, s)
    width = min(cfg.max_width, 12.0 / freq) if freq > 0 else cfg.max_width
    scale = (cfg.nodes if nodes is None else nodes) / 160.0
    rule = halfline_rule(T, gamma=model.gamma if model.is_levy else 0.0, scale=scale, width=width)
    if rule.size > cfg.max_nodes:
        raise SolverError(f"rule at z={z} needs {rule.size} nodes (max_nodes={cfg.max_nodes}); "
                          "raise trunc_eps or Im z, or increase max_nodes")
    return rule


@dataclass
class RhoGrid:
    """Solution of a univariate fixed-point equation on a grid.

    The solution extends to any ``t >= 0`` through the equation itself
    (:meth:`nystrom`), or through monotone cubic interpolation in ``log t``
    on the node range (:meth:`__call__`).

    Attributes
    ----------
    t : ndarray
        Positive nodes (ascending); the value at ``t = 0`` is 0.
    w : ndarray
        Quadrature weights of the nodes.
    values : ndarray of complex
    source : ndarray of complex
        ``w_j k(t_j) exp(rho_j)``: the discrete measure integrated against
        ``t g(t y)`` in the equation.
    """

    model: PhiModel
    z: complex
    ztilde: complex
    s: float
    t: np.ndarray
    w: np.ndarray
    values: np.ndarray
    source: np.ndarray
    T: float
    residual: float
    iterations: int
    method: str = ""
    continuation_steps: int = 0
    _pchip: tuple | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.t.size

    @property
    def t_full(self) -> np.ndarray:
        return np.concatenate([[0.0], self.t])

    @property
    def values_full(self) -> np.ndarray:
        return np.concatenate([[0j], self.values])

    def nystrom(self, t) -> np.ndarray:
        """Evaluate ``t int g(t y) k(y) exp(rho(y)) dy`` with the solved ``rho``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(t.shape, complex)
        pos = t > 0
        if pos.any():
            tp = t[pos]
            if self.model.is_levy:
                c = self.model.C_alpha.real
                ga = self.model.gamma
                out[pos] = c * tp ** (1 + ga) * np.sum(self.source * self.t**ga)
            else:
                gm = g_eval(self.model, np.outer(tp, self.t))
                out[pos] = tp * (gm @ self.source)
        return out

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self._pchip is None:
            lt = np.log(self.t)
            self._pchip = (PchipInterpolator(lt, self.values.real), PchipInterpolator(lt, self.values.imag))
        out = np.empty(t.shape, complex)
        inside = (t >= self.t[0]) & (t <= self.t[-1])
        if inside.any():
            lt = np.log(t[inside])
            out[inside] = self._pchip[0](lt) + 1j * self._pchip[1](lt)
        if (~inside).any():
            out[~inside] = self.nystrom(t[~inside])
        return out
