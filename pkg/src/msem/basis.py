"""Lagrange and edge polynomial bases, piecewise axes and their tensor products.

Edge functions are stored through their proxy: ``e_i = eps_i(x) dx`` with
``eps_i = -(l_0' + ... + l_i')`` so that the integral of ``eps_i`` over segment
``[x_p, x_(p+1)]`` equals ``delta_ip``. Indices are 0-based: edge ``i`` spans the
nodes ``i`` and ``i + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations
from math import prod
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .nodes import NodeKind, NodeSet, gauss_quadrature, nodeset
from .topology import AxisKind, CellComplex

__all__ = [
    "Family",
    "Basis1D",
    "basis1d",
    "lagrange_eval",
    "lagrange_deriv",
    "edge_eval",
    "AxisRole",
    "Axis",
    "TensorBasis",
    "tensor_basis",
    "eval_component",
    "domain_quadrature",
]


_SNAP = np.sqrt(np.finfo(float).tiny)


class Family(str, Enum):
    LAGRANGE_GLL = "lagrange_gll"
    EDGE_GLL = "edge_gll"
    LAGRANGE_GAUSS = "lagrange_gauss"
    LAGRANGE_EXTENDED_GAUSS = "lagrange_extended_gauss"
    EDGE_EXTENDED_GAUSS = "edge_extended_gauss"


_FAMILY_NODES = {
    Family.LAGRANGE_GLL: NodeKind.GAUSS_LOBATTO,
    Family.EDGE_GLL: NodeKind.GAUSS_LOBATTO,
    Family.LAGRANGE_GAUSS: NodeKind.GAUSS,
    Family.LAGRANGE_EXTENDED_GAUSS: NodeKind.EXTENDED_GAUSS,
    Family.EDGE_EXTENDED_GAUSS: NodeKind.EXTENDED_GAUSS,
}


@dataclass(frozen=True, eq=False)
class Basis1D:
    """Polynomial family on the nodes of ``nodeset``."""

    family: Family
    nodeset: NodeSet

    @property
    def is_edge(self) -> bool:
        return self.family in (Family.EDGE_GLL, Family.EDGE_EXTENDED_GAUSS)

    @property
    def nodes(self) -> np.ndarray:
        return self.nodeset.nodes

    @property
    def size(self) -> int:
        return len(self.nodes) - 1 if self.is_edge else len(self.nodes)

    @property
    def degree(self) -> int:
        """Polynomial degree of every function in the family."""
        return len(self.nodes) - 2 if self.is_edge else len(self.nodes) - 1

    @cached_property
    def barycentric_weights(self) -> np.ndarray:
        x = self.nodes
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        return 1.0 / np.prod(diff, axis=1)

    @cached_property
    def differentiation_matrix(self) -> np.ndarray:
        """``D[m, j] = l_j'(x_m)``."""
        x, w = self.nodes, self.barycentric_weights
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        d = (w[None, :] / w[:, None]) / diff
        np.fill_diagonal(d, 0.0)
        np.fill_diagonal(d, -d.sum(axis=1))
        return d

    def lagrange_matrix(self, x: npt.ArrayLike) -> np.ndarray:
        """Values ``l_j(x)`` of the underlying Lagrange polynomials, shape (len(x), n_nodes)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        nodes, w = self.nodes, self.barycentric_weights
        diff = x[:, None] - nodes[None, :]
        # closer than this the quotients overflow; the node value is exact to rounding
        exact = np.abs(diff) < _SNAP
        diff[exact] = 1.0
        terms = w[None, :] / diff
        values = terms / terms.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        values[hit] = exact[hit].astype(float)
        return values

    def lagrange_derivative_matrix(self, x: npt.ArrayLike, order: int) -> np.ndarray:
        out = self.lagrange_matrix(x)
        for _ in range(order):
            out = out @ self.differentiation_matrix
        return out

    def values(self, x: npt.ArrayLike, derivative: int = 0) -> np.ndarray:
        """Basis values (or their ``derivative``-th derivative), shape (len(x), size)."""
        if self.is_edge:
            dl = self.lagrange_derivative_matrix(x, derivative + 1)
            return -np.cumsum(dl, axis=1)[:, : self.size]
        return self.lagrange_derivative_matrix(x, derivative)


def basis1d(family: Family | str, order: int) -> Basis1D:
    family = Family(family)
    return Basis1D(family, nodeset(_FAMILY_NODES[family], order))


def _check_index(basis: Basis1D, i: int) -> None:
    if not 0 <= i < basis.size:
        raise IndexError(f"basis index {i} outside 0..{basis.size - 1}")


def lagrange_eval(basis: Basis1D, i: int, x: float) -> float:
    if basis.is_edge:
        raise ValueError("lagrange_eval needs a Lagrange family")
    _check_index(basis, i)
    return float(basis.values([x])[0, i])


def lagrange_deriv(basis: Basis1D, i: int, x: float, order: int = 1) -> float:
    if basis.is_edge:
        raise ValueError("lagrange_deriv needs a Lagrange family")
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    _check_index(basis, i)
    return float(basis.values([x], order)[0, i])


def edge_eval(basis: Basis1D, i: int, x: float) -> float:
    """Proxy ``eps_i(x)`` of edge function ``i`` (0-based, spanning nodes i, i+1)."""
    if not basis.is_edge:
        raise ValueError("edge_eval needs an edge family")
    _check_index(basis, i)
    return float(basis.values([x])[0, i])


# ---------------------------------------------------------------------------
# piecewise axes


class AxisRole(str, Enum):
    PRIMAL = "primal"
    DUAL = "dual"
    DUAL_INTERIOR = "dual_interior"


_ROLE_FAMILIES = {
    AxisRole.PRIMAL: (Family.LAGRANGE_GLL, Family.EDGE_GLL),
    AxisRole.DUAL: (Family.LAGRANGE_EXTENDED_GAUSS, Family.EDGE_EXTENDED_GAUSS),
    AxisRole.DUAL_INTERIOR: (Family.LAGRANGE_GAUSS, Family.EDGE_EXTENDED_GAUSS),
}


@dataclass(frozen=True)
class Axis:
    """Discretization of one coordinate direction.

    A primal axis may consist of several elements (``breakpoints``) and may be
    periodic; shared element end points are single global nodes. Dual axes are
    single-element: ``DUAL`` uses extended-Gauss nodes, ``DUAL_INTERIOR`` the
    Gauss nodes only, with end segments reaching the interval ends.
    """

    order: int
    role: AxisRole = AxisRole.PRIMAL
    breakpoints: tuple[float, ...] = (-1.0, 1.0)
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "role", AxisRole(self.role))
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"polynomial order must be a positive integer, got {self.order}")
        if len(self.breakpoints) < 2 or np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.role is not AxisRole.PRIMAL and (self.elements != 1 or self.periodic):
            raise ValueError("dual axes are single-element and non-periodic")

    @classmethod
    def uniform(cls, order: int, elements: int, start: float = -1.0, stop: float = 1.0, periodic: bool = False) -> Axis:
        return cls(order, AxisRole.PRIMAL, tuple(np.linspace(start, stop, elements + 1)), periodic)

    @property
    def elements(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    @cached_property
    def nodal_basis(self) -> Basis1D:
        return basis1d(_ROLE_FAMILIES[self.role][0], self.order)

    @cached_property
    def edge_basis(self) -> Basis1D:
        return basis1d(_ROLE_FAMILIES[self.role][1], self.order)

    @property
    def topology(self) -> AxisKind:
        if self.role is AxisRole.DUAL_INTERIOR:
            return AxisKind.OPEN
        return AxisKind.PERIODIC if self.periodic else AxisKind.INTERVAL

    @property
    def n_edges(self) -> int:
        return self.edge_basis.size * self.elements

    @property
    def n_nodes(self) -> int:
        if self.role is AxisRole.PRIMAL:
            return self.order * self.elements + (0 if self.periodic else 1)
        return self.nodal_basis.size

    def _element_map(self, e: int, xi: np.ndarray) -> np.ndarray:
        a, b = self.breakpoints[e], self.breakpoints[e + 1]
        return a + 0.5 * (b - a) * (xi + 1.0)

    @cached_property
    def node_coordinates(self) -> np.ndarray:
        if self.role is not AxisRole.PRIMAL:
            return self._element_map(0, self.nodal_basis.nodes)
        return self._all_edge_nodes[: self.n_nodes]

    @cached_property
    def _all_edge_nodes(self) -> np.ndarray:
        """End points of all edges in order, including a repeated periodic end."""
        local = self.edge_basis.nodes
        parts = [self._element_map(e, local[:-1]) for e in range(self.elements)]
        parts.append([self.breakpoints[-1]])
        return np.concatenate(parts)

    @cached_property
    def edge_bounds(self) -> np.ndarray:
        x = self._all_edge_nodes
        return np.stack((x[:-1], x[1:]), axis=1)

    def edge_quadrature(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss points and weights with ``q`` points on every edge, shape (n_edges, q)."""
        pts, wts = gauss_quadrature(q)
        a, b = self.edge_bounds[:, :1], self.edge_bounds[:, 1:]
        return a + 0.5 * (b - a) * (pts + 1.0), 0.5 * (b - a) * wts

    def _locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        bp = np.asarray(self.breakpoints)
        e = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, self.elements - 1)
        a, b = bp[e], bp[e + 1]
        return e, 2.0 * (x - a) / (b - a) - 1.0, 2.0 / (b - a)

    def _assemble(self, x, basis: Basis1D, derivative: int, extra_scale: int, width: int, stride: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e, xi, scale = self._locate(x)
        out = np.zeros((x.size, width))
        for elem in np.unique(e):
            sel = e == elem
            local = basis.values(xi[sel], derivative) * scale[sel, None] ** (derivative + extra_scale)
            cols = (elem * stride + np.arange(basis.size)) % width
            np.add.at(out, (np.flatnonzero(sel)[:, None], cols[None, :]), local)
        return out

    def nodal_matrix(self, x: npt.ArrayLike, derivative: int = 0) -> np.ndarray:
        """Global 0-form basis values at ``x``, shape (len(x), n_nodes)."""
        return self._assemble(x, self.nodal_basis, derivative, 0, self.n_nodes, self.order)

    def edge_matrix(self, x: npt.ArrayLike, derivative: int = 0) -> np.ndarray:
        """Global edge proxies with respect to this axis coordinate, shape (len(x), n_edges)."""
        return self._assemble(x, self.edge_basis, derivative, 1, self.n_edges, self.edge_basis.size)

    def factor_matrix(self, is_edge: bool, x: npt.ArrayLike, derivative: int = 0) -> np.ndarray:
        return self.edge_matrix(x, derivative) if is_edge else self.nodal_matrix(x, derivative)

    def factor_degree(self, is_edge: bool) -> int:
        return (self.edge_basis if is_edge else self.nodal_basis).degree

    def quadrature(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss rule with ``q`` points per element over the whole axis."""
        pts, wts = gauss_quadrature(q)
        bp = np.asarray(self.breakpoints)
        half = 0.5 * np.diff(bp)[:, None]
        return (bp[:-1, None] + half * (pts + 1.0)).ravel(), (half * wts).ravel()

    def dual(self, role: AxisRole | str = AxisRole.DUAL) -> Axis:
        """Single-element dual axis on the same interval."""
        if self.elements != 1 or self.periodic:
            raise ValueError("dual grids are only defined for single-element, non-periodic axes")
        return Axis(self.order, AxisRole(role), self.breakpoints)

    def primal(self) -> Axis:
        return Axis(self.order, AxisRole.PRIMAL, self.breakpoints)


# ---------------------------------------------------------------------------
# tensor products


@dataclass(frozen=True)
class TensorBasis:
    """Basis of k-forms on a tensor grid of axes.

    Component ``S`` (sorted axis tuple) is ``prod_a f_a(x_a) dx^S`` with ``f_a``
    an edge function when ``a`` is in ``S`` and a Lagrange function otherwise.
    Degrees of freedom are numbered exactly like the k-cells of :attr:`complex`.
    """

    axes: tuple[Axis, ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 0 <= self.degree <= len(self.axes):
            raise ValueError(f"form degree {self.degree} outside 0..{len(self.axes)}")

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @cached_property
    def complex(self) -> CellComplex:
        return CellComplex(
            self.dimension,
            tuple(ax.n_edges for ax in self.axes),
            tuple(ax.topology for ax in self.axes),
        )

    @property
    def role(self) -> str:
        roles = {ax.role for ax in self.axes}
        return roles.pop().value if len(roles) == 1 else "mixed"

    @property
    def order(self) -> int:
        return max((ax.order for ax in self.axes), default=0)

    @cached_property
    def components(self) -> list[tuple[int, ...]]:
        return list(combinations(range(self.dimension), self.degree))

    def component_shape(self, component: Sequence[int]) -> tuple[int, ...]:
        return tuple(ax.n_edges if a in component else ax.n_nodes for a, ax in enumerate(self.axes))

    @cached_property
    def offsets(self) -> list[int]:
        sizes = [prod(self.component_shape(c)) for c in self.components]
        return [0] + [int(s) for s in np.cumsum(sizes)]

    @property
    def size(self) -> int:
        return self.offsets[-1]

    def with_degree(self, k: int) -> TensorBasis:
        return TensorBasis(self.axes, k)

    def families(self) -> list[list[str]]:
        """Per component, the family name of each axis factor."""
        return [
            [(ax.edge_basis if a in comp else ax.nodal_basis).family.value for a, ax in enumerate(self.axes)]
            for comp in self.components
        ]

    def blocks(self, coefficients: np.ndarray):
        """Yield (component, coefficient tensor) pairs."""
        coefficients = np.asarray(coefficients)
        if coefficients.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients, got shape {coefficients.shape}")
        for c, comp in enumerate(self.components):
            yield comp, coefficients[self.offsets[c] : self.offsets[c + 1]].reshape(self.component_shape(comp))

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> bool:
        points = np.atleast_2d(points)
        for a, ax in enumerate(self.axes):
            lo, hi = ax.domain
            if np.any(points[:, a] < lo - tol) or np.any(points[:, a] > hi + tol):
                return False
        return True

    def evaluate(self, coefficients: np.ndarray, points: npt.ArrayLike, derivative_axis: int | None = None) -> np.ndarray:
        """Component values at scattered points, shape (m, number of components).

        With ``derivative_axis`` set, returns the partial derivative of each
        component proxy along that axis.
        """
        points = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients, got shape {coefficients.shape}")
        out = np.empty((points.shape[0], len(self.components)))
        for c in range(len(self.components)):
            out[:, c] = self.evaluate_component(coefficients, c, points, derivative_axis)
        return out

    def evaluate_grid(self, coefficients: np.ndarray, grids: Sequence[npt.ArrayLike], derivative_axis: int | None = None) -> list[np.ndarray]:
        """Component values on the tensor grid ``grids[0] x grids[1] x ...``."""
        out = []
        for comp, block in self.blocks(coefficients):
            t = block
            for a, ax in enumerate(self.axes):
                m = ax.factor_matrix(a in comp, grids[a], int(a == derivative_axis))
                t = np.moveaxis(np.tensordot(m, t, axes=([1], [a])), 0, a)
            out.append(t)
        return out

    def evaluate_component(self, coefficients: np.ndarray, c: int, points: np.ndarray, derivative_axis: int | None = None) -> np.ndarray:
        comp = self.components[c]
        block = np.asarray(coefficients)[self.offsets[c] : self.offsets[c + 1]].reshape(self.component_shape(comp))
        if not self.axes:
            return np.full(points.shape[0], float(block))
        mats = [ax.factor_matrix(a in comp, points[:, a], int(a == derivative_axis)) for a, ax in enumerate(self.axes)]
        letters = "abcdefgh"[: self.dimension]
        subs = ",".join("p" + ch for ch in letters)
        return np.einsum(f"{subs},{letters}->p", *mats, block, optimize=True)

    def sample_matrix(self, points: npt.ArrayLike, derivative_axis: int | None = None) -> np.ndarray:
        """Values of every basis function at ``points``, shape (m, n_components, size)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((points.shape[0], len(self.components), self.size))
        for c, comp in enumerate(self.components):
            block = np.ones((points.shape[0], 1))
            for a, ax in enumerate(self.axes):
                f = ax.factor_matrix(a in comp, points[:, a], int(a == derivative_axis))
                block = (block[:, :, None] * f[:, None, :]).reshape(points.shape[0], -1)
            out[:, c, self.offsets[c] : self.offsets[c + 1]] = block
        return out

    def function_values(self, index: int, points: npt.ArrayLike) -> np.ndarray:
        e = np.zeros(self.size)
        e[index] = 1.0
        return self.evaluate(e, points)


def domain_quadrature(axes: Sequence[Axis], q: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor composite Gauss rule over the product domain: points (m, n), weights (m,)."""
    rules = [ax.quadrature(q) for ax in axes]
    if not rules:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*(r[0] for r in rules), indexing="ij")
    weights = np.ones(())
    for r in rules:
        weights = np.multiply.outer(weights, r[1])
    return np.stack([g.ravel() for g in grids], axis=1), weights.ravel()


def tensor_basis(n: int, k: int, primal_or_dual: AxisRole | str, order: int) -> TensorBasis:
    """Single-element basis of k-forms on the reference cube ``[-1, 1]^n``."""
    if n not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {n}")
    role = AxisRole(primal_or_dual)
    return TensorBasis(tuple(Axis(order, role) for _ in range(n)), k)


def eval_component(tb: TensorBasis, component: Sequence[int], multi_index: Sequence[int], point: Sequence[float]) -> float:
    """Value of one component of the basis function with the given multi-index."""
    comp = tuple(component)
    if comp not in tb.components:
        raise ValueError(f"{comp} is not a component of a {tb.degree}-form in {tb.dimension}D")
    value = 1.0
    for a, ax in enumerate(tb.axes):
        value *= ax.factor_matrix(a in comp, [point[a]])[0, multi_index[a]]
    return float(value)
