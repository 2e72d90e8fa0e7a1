"""Coordinate maps from the reference cube to physical elements.

A map carries its Jacobian explicitly; nothing here differentiates ``forward``
automatically. ``jacobian(xi)[m, i, k]`` is the partial derivative of the
i-th physical coordinate along the k-th reference coordinate at point m.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt
from scipy import integrate

from .basis import TensorBasis
from .mimetic import AnalyticForm, canonical_monomial, pointwise_form
from .topology import Cochain

__all__ = [
    "Mapping",
    "identity_map",
    "affine_map",
    "annulus_map",
    "perturbed_quadrilateral_map",
    "register_map",
    "named_map",
    "available_maps",
    "pullback",
    "pushforward",
    "pullback_commutes_d_check",
    "pulled_back_metric",
    "transformed_hodge",
    "reduce_physical",
]

ArrayMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Mapping:
    """Smooth orientation-preserving map with an analytic Jacobian."""

    dimension: int
    forward: ArrayMap
    jacobian: ArrayMap
    inverse: ArrayMap | None = None
    name: str = "custom"

    def __call__(self, xi: npt.ArrayLike) -> np.ndarray:
        return self.forward(np.atleast_2d(xi))

    def jacobian_at(self, xi: npt.ArrayLike) -> np.ndarray:
        return self.jacobian(np.atleast_2d(xi))

    def check_orientation(self, samples: int = 9) -> float:
        """Smallest Jacobian determinant on a uniform sample grid; raises if not positive."""
        axes = [np.linspace(-1, 1, samples)] * self.dimension
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        det = np.linalg.det(self.jacobian(pts))
        low = float(det.min())
        if low <= 0:
            raise ValueError(f"map {self.name!r} is not orientation preserving (min det J = {low:.3e})")
        return low


def identity_map(dimension: int) -> Mapping:
    eye = np.eye(dimension)
    return Mapping(
        dimension,
        lambda x: np.array(x, copy=True),
        lambda x: np.broadcast_to(eye, (x.shape[0], dimension, dimension)).astype(x.dtype),
        lambda x: np.array(x, copy=True),
        "identity",
    )


def affine_map(matrix: npt.ArrayLike, offset: npt.ArrayLike | None = None) -> Mapping:
    """``x = A xi + b``."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    n = A.shape[0]
    b = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    Ainv = np.linalg.inv(A)
    return Mapping(
        n,
        lambda x: x @ A.T + b,
        lambda x: np.broadcast_to(A, (x.shape[0], n, n)).astype(np.result_type(x, A)),
        lambda y: (y - b) @ Ainv.T,
        "affine",
    )


def annulus_map(r_inner: float = 1.0, r_outer: float = 2.0) -> Mapping:
    """``(xi, eta) -> (r cos theta, r sin theta)`` with r linear in xi and theta = pi (eta + 1)."""
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    dr = 0.5 * (r_outer - r_inner)

    def polar(x):
        return r_inner + dr * (x[:, 0] + 1.0), np.pi * (x[:, 1] + 1.0)

    def forward(x):
        r, t = polar(x)
        return np.stack((r * np.cos(t), r * np.sin(t)), axis=1)

    def jacobian(x):
        r, t = polar(x)
        c, s = np.cos(t), np.sin(t)
        return np.stack((np.stack((dr * c, -np.pi * r * s), axis=1), np.stack((dr * s, np.pi * r * c), axis=1)), axis=1)

    def inverse(y):
        r = np.hypot(y[:, 0], y[:, 1])
        t = np.mod(np.arctan2(y[:, 1], y[:, 0]), 2 * np.pi)
        return np.stack(((r - r_inner) / dr - 1.0, t / np.pi - 1.0), axis=1)

    return Mapping(2, forward, jacobian, inverse, f"annulus({r_inner:g},{r_outer:g})")


def perturbed_quadrilateral_map(amplitude: float = 0.1) -> Mapping:
    """Curvilinear square: ``x = xi + c sin(pi xi) sin(pi eta)``, likewise for y."""
    c = float(amplitude)

    def forward(x):
        bump = c * np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
        return np.stack((x[:, 0] + bump, x[:, 1] + bump), axis=1)

    def jacobian(x):
        dx = c * np.pi * np.cos(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
        dy = c * np.pi * np.sin(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
        return np.stack((np.stack((1 + dx, dy), axis=1), np.stack((dx, 1 + dy), axis=1)), axis=1)

    return Mapping(2, forward, jacobian, None, f"perturbed_quadrilateral({c:g})")


_REGISTRY: dict[str, Callable[..., Mapping]] = {
    "identity": identity_map,
    "affine": lambda dimension=1, scale=1.0: affine_map(float(scale) * np.eye(int(dimension))),
    "annulus": annulus_map,
    "perturbed_quadrilateral": perturbed_quadrilateral_map,
}


def register_map(name: str, factory: Callable[..., Mapping]) -> None:
    if name in _REGISTRY:
        raise ValueError(f"map {name!r} is already registered")
    _REGISTRY[name] = factory


def available_maps() -> list[str]:
    return sorted(_REGISTRY)


def named_map(name: str, **params) -> Mapping:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown map {name!r}; choose from {available_maps()}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# pullback and pushforward


def _minor(J: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    if not rows:
        return np.ones(J.shape[0], dtype=J.dtype)
    return np.linalg.det(J[:, list(rows)][:, :, list(cols)])


def _raw_values(form: AnalyticForm, points: np.ndarray) -> np.ndarray:
    """Component values without casting, so complex arguments pass through."""
    coords = [points[:, a] for a in range(form.dimension)]
    cols = [np.broadcast_to(np.asarray(f(*coords)), (points.shape[0],)) for f in form.components]
    return np.stack(cols, axis=1) if cols else np.zeros((points.shape[0], 0))


def _pullback_values(form: AnalyticForm, mapping: Mapping, xi: np.ndarray) -> np.ndarray:
    n, k = form.dimension, form.degree
    comps = list(combinations(range(n), k))
    values = _raw_values(form, mapping.forward(xi))
    J = mapping.jacobian(xi)
    out = np.zeros((xi.shape[0], len(comps)), dtype=np.result_type(values, J))
    for K_index, K in enumerate(comps):
        for I_index, I in enumerate(comps):
            out[:, K_index] += values[:, I_index] * _minor(J, I, K)
    return out


def pullback(form: AnalyticForm, mapping: Mapping) -> AnalyticForm:
    """Pullback of a physical form to reference coordinates via Jacobian minors.

    The derivative, when known, is pulled back as well.
    """
    if form.dimension != mapping.dimension:
        raise ValueError("form and map dimensions differ")
    pulled = pointwise_form(form.dimension, form.degree, lambda xi: _pullback_values(form, mapping, xi))
    derivative = pullback(form.derivative, mapping) if form.derivative is not None else None
    return AnalyticForm(pulled.dimension, pulled.degree, pulled.components, derivative, form.name)


def pushforward(form: AnalyticForm, mapping: Mapping) -> AnalyticForm:
    """Reference form expressed on the physical domain; needs the inverse map."""
    if mapping.inverse is None:
        raise ValueError(f"map {mapping.name!r} has no inverse")
    n, k = form.dimension, form.degree
    comps = list(combinations(range(n), k))

    def values(x):
        xi = mapping.inverse(x)
        ref = form.evaluate(xi)
        Jinv = np.linalg.inv(mapping.jacobian(xi))
        out = np.zeros((x.shape[0], len(comps)))
        for I_index, I in enumerate(comps):
            for K_index, K in enumerate(comps):
                out[:, I_index] += ref[:, K_index] * _minor(Jinv, K, I)
        return out

    return pointwise_form(n, k, values)


def _complex_step_derivative(func: Callable[[np.ndarray], np.ndarray], n: int, k: int, points: np.ndarray, step: float = 1e-30) -> np.ndarray:
    comps = list(combinations(range(n), k))
    targets = list(combinations(range(n), k + 1))
    out = np.zeros((points.shape[0], len(targets)))
    for a in range(n):
        shifted = points.astype(complex)
        shifted[:, a] += 1j * step
        partial = np.imag(func(shifted)) / step
        for c, S in enumerate(comps):
            if a in S:
                continue
            sign, T = canonical_monomial((a,) + S)
            out[:, targets.index(T)] += sign * partial[:, c]
    return out


def pullback_commutes_d_check(form: AnalyticForm, mapping: Mapping, samples: npt.ArrayLike, pulled_derivative: AnalyticForm | None = None) -> float:
    """Largest sampled difference between the pullback of ``da`` and ``d`` of the pullback.

    ``d`` of the pullback is taken from ``pulled_derivative`` when given, and
    otherwise by complex-step differentiation (form and map must accept
    complex arguments).
    """
    if form.derivative is None:
        raise ValueError("the form needs an analytic derivative")
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    lhs = np.real(_pullback_values(form.derivative, mapping, pts))
    if pulled_derivative is not None:
        rhs = pulled_derivative.evaluate(pts)
    else:
        rhs = _complex_step_derivative(lambda xi: _pullback_values(form, mapping, xi), form.dimension, form.degree, pts)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def pulled_back_metric(mapping: Mapping, target_metric: ArrayMap | None = None) -> ArrayMap:
    """Reference metric ``J^T G J``; G is the Euclidean identity by default."""

    def metric(xi: np.ndarray) -> np.ndarray:
        J = mapping.jacobian(np.atleast_2d(xi))
        det = np.linalg.det(J)
        if np.any(np.abs(det) < 1e-14):
            raise ValueError("singular Jacobian")
        if target_metric is None:
            return np.einsum("mik,mil->mkl", J, J)
        G = target_metric(mapping.forward(np.atleast_2d(xi)))
        return np.einsum("mik,mij,mjl->mkl", J, G, J)

    return metric


transformed_hodge = pulled_back_metric


# ---------------------------------------------------------------------------
# physical reduction


def reduce_physical(form: AnalyticForm, mapping: Mapping, basis: TensorBasis, epsabs: float = 1e-13, epsrel: float = 1e-13) -> Cochain:
    """Integrate a physical form over the images of the basis cells.

    Each image cell is parametrized by its reference cell and integrated with
    nested adaptive Gauss-Kronrod quadrature, independently of the Gauss rules
    used by :func:`msem.mimetic.reduce`. All cells of one component are
    integrated together as a vector-valued integral.
    """
    n, k = basis.dimension, basis.degree
    if form.dimension != n or form.degree != k:
        raise ValueError("form and basis do not match")
    comps = list(combinations(range(n), k))
    out = np.empty(basis.size)
    for c, comp in enumerate(comps):
        shape = basis.component_shape(comp)
        index = np.array(list(np.ndindex(*shape))).reshape(-1, n)
        base = np.empty((index.shape[0], n))
        width = np.zeros((index.shape[0], n))
        for a, ax in enumerate(basis.axes):
            if a in comp:
                bounds = ax.edge_bounds[index[:, a]]
                base[:, a], width[:, a] = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
            else:
                base[:, a] = ax.node_coordinates[index[:, a]]
        scale = np.prod(width[:, list(comp)], axis=1) if k else np.ones(index.shape[0])

        def integrand(t, comp=comp, base=base, width=width, scale=scale):
            xi = base.copy()
            for a, value in zip(comp, t):
                xi[:, a] += value * width[:, a]
            J = mapping.jacobian(xi)
            vals = form.evaluate(mapping.forward(xi))
            return scale * sum(vals[:, i] * _minor(J, I, comp) for i, I in enumerate(comps))

        def nested(fixed: tuple[float, ...]) -> np.ndarray:
            if len(fixed) == k:
                return integrand(fixed)
            value, _ = integrate.quad_vec(lambda t: nested(fixed + (t,)), 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, norm="max", limit=200)
            return value

        out[basis.offsets[c] : basis.offsets[c + 1]] = nested(())
    return Cochain(basis.complex, k, out)
