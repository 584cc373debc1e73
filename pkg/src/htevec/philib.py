"""Characteristic exponents ``Phi``, kernels ``g`` and bivariate kernels.

For the exploding-moments family with atomic measure ``m = sum w delta_x``

    Phi(lam) = sum w (exp(-i lam x) - 1) / x,      (x = 0 term: -i lam w)
    g(y)     = -sum w J1(2 sqrt(x y)) / sqrt(x y),  (integrand 1 at x y = 0)

and ``Phi(lam) = int_0^inf g(y) exp(i y / lam) dy`` for ``Im lam < 0``.
For the Lévy family ``Phi(lam) = -sigma (i lam)^(alpha/2)`` and
``g(y) = C y^(alpha/2 - 1)`` with the real constant
``C = -sigma / Gamma(alpha/2)``.

The Bessel function ``J1`` is evaluated by its power series below
:data:`J1_SWITCH` and by the Hankel asymptotic expansion above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, gamma as _gamma_fn

import numpy as np

from .ensembles import EnsembleSpec, Kind, levy_sigma_closed_form
from .errors import DomainError, ParameterError, UnsupportedKernelError
from .quadrature import halfline_rule

__all__ = [
    "J1_SWITCH",
    "bessel_j1",
    "jinc",
    "PhiModel",
    "KernelTauTilde",
    "phi_eval",
    "g_eval",
    "kernel_tau_tilde",
    "g_transform_residual",
    "kernel_identity_residual",
]

J1_SWITCH = 12.0
_SERIES_TERMS = 48
_HANKEL_TERMS = 24

# series coefficients of jinc(s) = 2 J1(s) / s in powers of -s^2/4
_SERIES = np.array([1.0 / (factorial(k) * factorial(k + 1)) for k in range(_SERIES_TERMS)])


def _hankel_coeffs(nu=1.0, terms=_HANKEL_TERMS):
    mu = 4.0 * nu * nu
    a = [1.0]
    for k in range(1, terms):
        a.append(a[-1] * (mu - (2 * k - 1) ** 2) / (8.0 * k))
    return np.array(a)


_HANKEL = _hankel_coeffs()


def _jinc_series(s):
    q = -0.25 * s * s
    out = np.zeros_like(s)
    for c in _SERIES[::-1]:
        out = out * q + c
    return out


def _j1_hankel(s):
    inv = 1.0 / s
    p = np.zeros_like(s)
    q = np.zeros_like(s)
    for k in range(_HANKEL_TERMS - 1, -1, -1):
        # Horner in 1/s with alternating signs on even/odd subsequences
        if k % 2 == 0:
            p = p * inv * inv + (-1) ** (k // 2) * _HANKEL[k]
        else:
            q = q * inv * inv + (-1) ** ((k - 1) // 2) * _HANKEL[k]
    q = q * inv
    chi = s - 0.75 * np.pi
    return np.sqrt(2.0 / (np.pi * s)) * (p * np.cos(chi) - q * np.sin(chi))


def jinc(s):
    """``2 J1(s) / s`` for real ``s``, equal to 1 at ``s = 0``."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    small = s < J1_SWITCH
    out[small] = _jinc_series(s[small])
    big = ~small
    out[big] = 2.0 * _j1_hankel(s[big]) / s[big]
    return out if out.ndim else out[()]


def bessel_j1(x):
    """Bessel function of the first kind of order one, real argument."""
    x = np.asarray(x, dtype=float)
    return 0.5 * x * jinc(x)


def _self_test():
    s = np.array([J1_SWITCH])
    gap = abs(_jinc_series(s)[0] - 2.0 * _j1_hankel(s)[0] / s[0])
    if gap > 1e-10:
        raise RuntimeError(f"J1 branches disagree at the switch point: {gap:.2e}")
    return gap


J1_SWITCH_GAP = _self_test()


@dataclass(frozen=True)
class PhiModel:
    """Closed-form ``Phi`` and ``g`` of an ensemble with growth bounds.

    Parameters
    ----------
    kind : Kind
    alpha : float, optional
        Lévy index.
    sigma : float
        For the Lévy family the constant of ``Phi = -sigma (i lam)^(alpha/2)``;
        for the Gaussian family the entry scale (``Phi = -i lam sigma^2``).
    p : float, optional
        Erdős–Rényi mean degree.
    m_atoms : tuple of (weight, location)
        Atomic measure ``m`` (exploding moments).  An empty tuple gives the
        degenerate model ``g = 0``.
    gamma, kappa, K : float
        Bounds ``|g(y)| <= K y^gamma`` on ``(0, 1]`` and ``K y^kappa`` on
        ``[1, inf)``.
    """

    kind: Kind
    alpha: float | None = None
    sigma: float = 1.0
    p: float | None = None
    m_atoms: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    C_alpha: complex = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    K: float = 0.0

    # constructors ---------------------------------------------------------
    @classmethod
    def levy(cls, alpha: float, sigma: float = 1.0) -> "PhiModel":
        if not 0 < alpha < 2:
            raise ParameterError("alpha must lie in (0, 2)")
        c = -sigma / _gamma_fn(alpha / 2.0)
        e = alpha / 2.0 - 1.0
        return cls(Kind.LEVY, alpha=alpha, sigma=sigma, C_alpha=complex(c),
                   gamma=e, kappa=e, K=abs(c) * 1.01)

    @classmethod
    def exploding(cls, atoms, kind: Kind = Kind.EXPLODING_MOMENTS, **extra) -> "PhiModel":
        atoms = tuple((float(w), float(x)) for w, x in atoms)
        if any(w < 0 or x < 0 for w, x in atoms):
            raise ParameterError("atom weights and locations must be >= 0")
        model = cls(kind, m_atoms=atoms, **extra)
        y = np.logspace(-6, 3, 2000)
        sweep = float(np.max(np.abs(model.g(y)))) if atoms else 0.0
        object.__setattr__(model, "K", max(1.01 * sweep, 1e-300))
        return model

    @classmethod
    def erdos_renyi(cls, p: float) -> "PhiModel":
        if not p > 0:
            raise ParameterError("p must be positive")
        return cls.exploding(((p, 1.0),), kind=Kind.ERDOS_RENYI, p=float(p))

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "PhiModel":
        return cls.exploding(((sigma**2, 0.0),), kind=Kind.GAUSSIAN, sigma=float(sigma))

    @classmethod
    def zero(cls) -> "PhiModel":
        """Degenerate model with ``Phi = 0`` and ``g = 0``."""
        return cls.exploding(())

    @classmethod
    def from_spec(cls, spec: EnsembleSpec, levy_sigma: float | None = None) -> "PhiModel":
        """Limit model of an ensemble.

        For the Lévy family the constant defaults to the closed form of
        :func:`htevec.ensembles.levy_sigma_closed_form`; a calibrated value
        may be passed instead.
        """
        if spec.kind is Kind.LEVY:
            c = levy_sigma_closed_form(spec.alpha, spec.sigma) if levy_sigma is None else levy_sigma
            return cls.levy(spec.alpha, c)
        if spec.kind is Kind.ERDOS_RENYI:
            return cls.erdos_renyi(spec.p)
        if spec.kind is Kind.GAUSSIAN:
            return cls.gaussian(spec.sigma)
        if spec.kind is Kind.EXPLODING_MOMENTS:
            return cls.exploding(spec.m_atoms)
        raise ParameterError("the permutation baseline has no characteristic exponent")

    # helpers ----------------------------------------------------------------
    @property
    def is_levy(self) -> bool:
        return self.kind is Kind.LEVY

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.m_atoms], dtype=float)

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for _, x in self.m_atoms], dtype=float)

    def phi(self, lam):
        return phi_eval(self, lam)

    def g(self, y):
        return g_eval(self, y)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "p": self.p,
            "m_atoms": [list(a) for a in self.m_atoms],
            "C_alpha": [self.C_alpha.real, self.C_alpha.imag],
            "gamma": self.gamma,
            "kappa": self.kappa,
            "K": self.K,
        }


def phi_eval(model: PhiModel, lam):
    """Evaluate ``Phi`` on the closed lower half-plane.

    Parameters
    ----------
    model : PhiModel
    lam : complex or array_like
        Points with ``Im lam <= 0``.

    Returns
    -------
    complex or ndarray
    """
    lam_a = np.asarray(lam, dtype=complex)
    if np.any(lam_a.imag > 0):
        raise DomainError("Phi is defined on Im(lambda) <= 0 only")
    if model.is_levy:
        w = 1j * lam_a
        if np.any((w.imag == 0) & (w.real < 0)):
            raise DomainError("i*lambda on the branch cut")
        out = -model.sigma * np.power(w, model.alpha / 2.0)
    else:
        out = np.zeros_like(lam_a)
        for wt, x in model.m_atoms:
            if x == 0:
                out = out - 1j * lam_a * wt
            else:
                out = out + wt * np.expm1(-1j * lam_a * x) / x
    return out if out.ndim else complex(out)


def g_eval(model: PhiModel, y):
    """Evaluate the kernel ``g`` at ``y > 0``."""
    y_a = np.asarray(y, dtype=float)
    if np.any(y_a <= 0):
        raise DomainError("g is defined for y > 0")
    if model.is_levy:
        out = model.C_alpha.real * y_a ** (model.alpha / 2.0 - 1.0)
    else:
        out = np.zeros_like(y_a)
        for wt, x in model.m_atoms:
            out = out - wt * jinc(2.0 * np.sqrt(x * y_a))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelTauTilde:
    """Bivariate kernel ``tau~ = tau + delta_0 x mu + mu x delta_0``.

    ``tau`` has density ``sum w x jinc(2 sqrt(v x)) jinc(2 sqrt(v' x))`` and is
    separable atom by atom; ``mu`` has density equal to ``g``.
    """

    model: PhiModel

    @property
    def atom_weights(self) -> np.ndarray:
        """Weights ``w x`` of the separable factors of ``tau``."""
        return self.model.weights * self.model.locations

    def factor(self, v, x):
        """Separable factor ``jinc(2 sqrt(v x))`` of one atom."""
        return jinc(2.0 * np.sqrt(x * np.asarray(v, dtype=float)))

    def density(self, v, vp):
        v = np.asarray(v, dtype=float)
        vp = np.asarray(vp, dtype=float)
        out = np.zeros(np.broadcast(v, vp).shape)
        for wt, x in self.model.m_atoms:
            if x > 0:
                out = out + wt * x * self.factor(v, x) * self.factor(vp, x)
        return out

    def mu_density(self, v):
        return g_eval(self.model, v)


def kernel_tau_tilde(model: PhiModel) -> KernelTauTilde:
    """Bivariate kernel of an exploding-moments type model.

    Raises
    ------
    UnsupportedKernelError
        For the Lévy family, whose kernel density is singular on the diagonal.
    """
    if model.is_levy:
        raise UnsupportedKernelError("Levy bivariate kernel is singular on v = v' and not supported")
    return KernelTauTilde(model)


def _transform_rule(model: PhiModel, decay: float, freq: float, tol_exp: float = 40.0):
    T = tol_exp / decay
    width = min(2.0, 6.0 / max(freq, 1e-12))
    r = halfline_rule(T, gamma=model.gamma if model.is_levy else 0.0, scale=2.0, width=width, q=20)
    return r.y, r.w


def g_transform_residual(model: PhiModel, lam: complex) -> float:
    """``|int_0^inf g(y) exp(i y / lam) dy - Phi(lam)|`` by quadrature."""
    if np.imag(lam) >= 0:
        raise DomainError("need Im(lambda) < 0")
    k = 1.0 / lam
    y, wy = _transform_rule(model, k.imag, abs(k.real) + np.sqrt(model.locations.max(initial=0.0)))
    total = np.sum(wy * g_eval(model, y) * np.exp(1j * k * y))
    return float(abs(total - phi_eval(model, lam)))


def kernel_identity_residual(model: PhiModel, x: complex, y: complex) -> float:
    """Residual of ``Phi(1/x + 1/y) = iint exp(i(x v + y v')) d tau~``.

    Both ``x`` and ``y`` must lie in the open upper half-plane so that the
    integrals converge; the double integral is computed by tensor quadrature
    of the kernel densities.
    """
    if np.imag(x) <= 0 or np.imag(y) <= 0:
        raise DomainError("x and y must have positive imaginary part")
    kern = kernel_tau_tilde(model)
    freq = np.sqrt(model.locations.max(initial=0.0)) + 1.0
    v1, w1 = _transform_rule(model, np.imag(x), abs(np.real(x)) + freq)
    v2, w2 = _transform_rule(model, np.imag(y), abs(np.real(y)) + freq)
    e1 = w1 * np.exp(1j * x * v1)
    e2 = w2 * np.exp(1j * y * v2)
    dens = kern.density(v1[:, None], v2[None, :])
    tau_part = e1 @ dens @ e2
    mu_part = np.sum(e1 * kern.mu_density(v1)) + np.sum(e2 * kern.mu_density(v2))
    return float(abs(tau_part + mu_part - phi_eval(model, 1.0 / x + 1.0 / y)))
