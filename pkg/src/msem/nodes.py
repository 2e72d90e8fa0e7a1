"""One-dimensional node sets and quadrature on the reference interval [-1, 1].

Three families are provided:

* Gauss-Lobatto-Legendre (GLL): the ``N + 1`` roots of ``(1 - x**2) P_N'(x)``.
  They carry the primal 0-cells of a spectral element.
* Gauss-Legendre: the ``N`` roots of ``P_N``. They carry the interior dual 0-cells.
* extended Gauss: ``{-1} U gauss(N) U {+1}``, the dual grid including boundary points.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import numpy.typing as npt

__all__ = [
    "NodeKind",
    "NodeSet",
    "legendre",
    "nodeset",
    "gauss_quadrature",
]

_MAX_NEWTON = 100
_ROOT_TOL = 1e-15


class NodeKind(str, Enum):
    GAUSS_LOBATTO = "gauss_lobatto"
    GAUSS = "gauss"
    EXTENDED_GAUSS = "extended_gauss"


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Sorted nodes in [-1, 1] with their quadrature weights.

    For the extended-Gauss set the two endpoint weights are zero, so the weights
    still define the underlying Gauss rule.
    """

    kind: NodeKind
    order: int
    nodes: npt.NDArray[np.float64]
    weights: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, values: npt.ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


def legendre(n: int, x: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Legendre polynomial ``P_n`` and its derivative, by three-term recurrence.

    The derivative uses ``P'_{k+1} = P'_{k-1} + (2k + 1) P_k`` which stays well
    behaved at the endpoints.
    """
    if n < 0:
        raise ValueError(f"Legendre degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    dp_prev, dp = np.zeros_like(x), np.ones_like(x)
    if n == 0:
        return p_prev, dp_prev
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        dp_prev, dp = dp, dp_prev + (2 * k + 1) * p_prev
    return p, dp


def _newton(f, guesses: np.ndarray) -> np.ndarray:
    """Safeguarded Newton iteration: steps that leave (-1, 1) are halved."""
    x = guesses.copy()
    for _ in range(_MAX_NEWTON):
        value, slope = f(x)
        step = value / slope
        trial = x - step
        outside = np.abs(trial) >= 1.0
        while np.any(outside):
            step = np.where(outside, 0.5 * step, step)
            trial = x - step
            outside = np.abs(trial) >= 1.0
        x = trial
        if np.max(np.abs(step), initial=0.0) < _ROOT_TOL:
            return x
    raise RuntimeError("Newton iteration for quadrature nodes did not converge")


def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(n)
    guesses = -np.cos(np.pi * (2 * k + 1) / (2 * n))
    x = _newton(lambda t: legendre(n, t), guesses)
    x = 0.5 * (x - x[::-1])
    _, dp = legendre(n, x)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    return x, w


def _gauss_lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])

    def dp_and_ddp(t):
        p, dp = legendre(n, t)
        ddp = (2.0 * t * dp - n * (n + 1) * p) / (1.0 - t**2)
        return dp, ddp

    guesses = -np.cos(np.pi * np.arange(1, n) / n)
    interior = _newton(dp_and_ddp, guesses)
    x = np.concatenate(([-1.0], interior, [1.0]))
    x = 0.5 * (x - x[::-1])
    p, _ = legendre(n, x)
    w = 2.0 / (n * (n + 1) * p**2)
    return x, w


@lru_cache(maxsize=None)
def _cached(kind: NodeKind, n: int) -> NodeSet:
    if kind is NodeKind.GAUSS_LOBATTO:
        x, w = _gauss_lobatto(n)
    elif kind is NodeKind.GAUSS:
        x, w = _gauss(n)
    else:
        g, gw = _gauss(n)
        x = np.concatenate(([-1.0], g, [1.0]))
        w = np.concatenate(([0.0], gw, [0.0]))
    x.setflags(write=False)
    w.setflags(write=False)
    return NodeSet(kind, n, x, w)


def nodeset(kind: NodeKind | str, n: int) -> NodeSet:
    """Node set of the given kind and order ``n >= 1``."""
    kind = NodeKind(kind)
    if int(n) != n or n < 1:
        raise ValueError(f"node set order must be a positive integer, got {n}")
    return _cached(kind, int(n))


def gauss_quadrature(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights with ``n`` points on ``[a, b]``."""
    if n < 1:
        raise ValueError(f"quadrature order must be at least 1, got {n}")
    ns = nodeset(NodeKind.GAUSS, n)
    half = 0.5 * (b - a)
    return a + half * (ns.nodes + 1.0), half * ns.weights
