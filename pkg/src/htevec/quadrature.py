"""Composite Gauss rules on half-lines with an algebraic endpoint singularity.

The rule returned by :func:`halfline_rule` approximates ``int_0^T f(y) dy``
for integrands behaving like ``y**gamma`` at the origin.  It has three parts:

* a head panel ``[0, y0]`` of Gauss–Jacobi type absorbing ``y**gamma``;
* panels that are uniform in ``log y`` on ``[y0, min(1, T)]``;
* Gauss–Legendre panels of bounded width on ``[1, T]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["HalfLineRule", "halfline_rule", "gauss_legendre", "interval_rule"]

HEAD_Y0 = 1e-6


@lru_cache(maxsize=64)
def gauss_legendre(q: int):
    return np.polynomial.legendre.leggauss(q)


@lru_cache(maxsize=64)
def _jacobi(q: int, gamma: float):
    return roots_jacobi(q, 0.0, gamma)


def interval_rule(edges, q: int = 10):
    """Composite Gauss–Legendre rule with panel boundaries ``edges``."""
    x, w = gauss_legendre(q)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


@dataclass(frozen=True)
class HalfLineRule:
    """Nodes ``y`` (ascending, positive) and weights ``w`` on ``(0, T]``.

    ``sing`` holds the factor ``y**-gamma`` on head nodes (1 elsewhere): the
    integral of ``f`` is ``sum(w * f(y))`` when ``f`` is smooth away from
    zero and ``f(y) = y**gamma h(y)`` with smooth ``h`` near zero, provided
    ``w`` already includes ``sing``.
    """

    y: np.ndarray
    w: np.ndarray
    T: float
    gamma: float
    n_head: int

    @property
    def size(self) -> int:
        return self.y.size


def halfline_rule(T: float, gamma: float = 0.0, scale: float = 1.0, width: float = 4.0,
                  q: int = 10, y0: float = HEAD_Y0) -> HalfLineRule:
    """Build a composite rule on ``(0, T]``.

    Parameters
    ----------
    T : float
        Truncation point.
    gamma : float
        Exponent of the algebraic behaviour at 0, in ``(-1, 0]``.
    scale : float
        Refinement factor; 1 gives roughly 160 nodes on a unit-size problem.
        Every part of the rule is refined proportionally.
    width : float
        Maximal panel width; the logarithmic part ends at ``min(1, width)``
        and the linear panels after it never exceed ``width``.
    q : int
        Nodes per Gauss–Legendre panel.
    """
    n_head = max(4, int(round(8 * scale)))
    xj, wj = _jacobi(n_head, float(gamma))
    top = min(y0, T)
    y_head = 0.5 * top * (xj + 1.0)
    # weights of int f, where f = y^gamma h: w_jac (top/2)^(1+gamma) / y^gamma
    w_head = wj * (0.5 * top) ** (1.0 + gamma) / y_head**gamma
    ys, ws = [y_head], [w_head]
    split = min(1.0, width, T)
    if T > y0:
        npl = max(2, int(np.ceil(7 * scale * np.log(split / y0) / np.log(1.0 / y0))))
        u, wu = interval_rule(np.linspace(np.log(y0), np.log(split), npl + 1), q)
        ys.append(np.exp(u))
        ws.append(wu * np.exp(u))
    if T > split:
        # panels grow geometrically from the split point (its distance to the
        # y**gamma singularity) up to the width cap; all widths shrink with scale
        hmax = min(width, (T - split) / 8.0) / scale
        edges = [split]
        while edges[-1] < T:
            h = min(hmax, edges[-1] / scale)
            nxt = edges[-1] + h
            if T - nxt < 0.25 * h:
                nxt = T
            edges.append(nxt)
        y_lin, w_lin = interval_rule(np.array(edges), q)
        ys.append(y_lin)
        ws.append(w_lin)
    return HalfLineRule(np.concatenate(ys), np.concatenate(ws), float(T), float(gamma), n_head)
