"""Finite-dimensional operators acting on discrete forms."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Any

import numpy as np
import scipy.sparse as sp

from .basis import Axis, AxisRole, TensorBasis, basis1d, domain_quadrature
from .mimetic import DiscreteForm, Metric, opposite_basis, project, rebase
from .topology import AxisKind

__all__ = [
    "OperatorKind",
    "OperatorMatrix",
    "derivative_matrix",
    "exterior_derivative",
    "hodge_star",
    "hodge_matrix",
    "codifferential_matrix",
    "codifferential",
    "star_d_star_matrix",
    "wedge_h",
    "mass_matrix",
    "inner",
    "trace_form",
    "boundary_traces",
]


class OperatorKind(str, Enum):
    DERIVATIVE = "derivative"
    HODGE = "hodge"
    CODIFFERENTIAL = "codifferential"
    MASS = "mass"
    TRACE = "trace"


def _describe(basis: TensorBasis) -> dict[str, Any]:
    return {"role": basis.role, "degree": basis.degree, "order": basis.order, "cells": list(basis.complex.cells_per_direction)}


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Matrix of a linear map between coefficient spaces, rows indexing the target."""

    kind: OperatorKind
    source: dict[str, Any]
    target: dict[str, Any]
    payload: np.ndarray | sp.spmatrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.payload.shape

    def toarray(self) -> np.ndarray:
        return self.payload.toarray() if sp.issparse(self.payload) else np.asarray(self.payload)

    def __matmul__(self, other):
        return self.payload @ other

    def to_csv(self) -> str:
        return "\n".join(",".join(f"{v:.17g}" for v in row) for row in self.toarray()) + "\n"

    def to_coo_text(self) -> str:
        m = sp.coo_matrix(self.payload)
        order = np.lexsort((m.col, m.row))
        return "".join(f"{m.row[i]} {m.col[i]} {m.data[i]:.17g}\n" for i in order)


def _has_open_axis(basis: TensorBasis) -> bool:
    return any(ax.topology is AxisKind.OPEN for ax in basis.axes)


def derivative_matrix(basis: TensorBasis) -> OperatorMatrix:
    """Coboundary ``E_(k+1,k)``; only exact for grids without open axes."""
    k = basis.degree
    if k >= basis.dimension:
        raise ValueError("the exterior derivative of a top-degree form is not defined here")
    if _has_open_axis(basis):
        raise ValueError("on an open dual grid the derivative needs the boundary values; use exterior_derivative")
    e = basis.complex.incidence_matrix(k + 1).T.tocsr()
    return OperatorMatrix(OperatorKind.DERIVATIVE, _describe(basis), _describe(basis.with_degree(k + 1)), e)


def exterior_derivative(df: DiscreteForm) -> DiscreteForm:
    """Exterior derivative as a discrete form of degree k + 1.

    On closed grids the coefficients are ``E^T c`` (metric-free, exact). A grid
    of interior dual points lacks boundary values; there the derivative of the
    reconstruction is re-expressed in the edge basis instead.
    """
    basis = df.basis
    if df.degree >= df.dimension:
        raise ValueError("the exterior derivative of a top-degree form is not defined here")
    target = basis.with_degree(df.degree + 1)
    if _has_open_axis(basis):
        return rebase(df.analytic_derivative(), target, basis.order + 3)
    return DiscreteForm(target, basis.complex.incidence_matrix(df.degree + 1).T @ df.coefficients)


def hodge_star(df: DiscreteForm, metric: Metric | None = None, dual: AxisRole | str = AxisRole.DUAL_INTERIOR) -> DiscreteForm:
    """Pointwise Hodge star of the reconstruction, expressed on the staggered grid.

    Primal forms go to the grid selected by ``dual``; dual forms go back to the
    primal grid. Under the Euclidean metric the starred form is a polynomial of
    the target space and the change of basis is checked to be exact; a general
    metric makes it rational, and the result is its projection.
    """
    target = opposite_basis(df.basis, dual_role=dual)
    starred = df.as_form().star(metric)
    if metric is None:
        return rebase(starred, target, df.basis.order + 3, tolerance=1e-9)
    return project(starred, target, df.basis.order + 4)


def _columns(basis: TensorBasis, apply) -> np.ndarray:
    cols = []
    for i in range(basis.size):
        e = np.zeros(basis.size)
        e[i] = 1.0
        cols.append(apply(DiscreteForm(basis, e)).coefficients)
    return np.stack(cols, axis=1)


def hodge_matrix(basis: TensorBasis, metric: Metric | None = None, dual: AxisRole | str = AxisRole.DUAL_INTERIOR) -> OperatorMatrix:
    """Matrix of :func:`hodge_star`; in 1D for 1-forms its entries are ``eps_i(x_j)``."""
    payload = _columns(basis, lambda f: hodge_star(f, metric, dual))
    target = opposite_basis(basis, dual_role=dual)
    return OperatorMatrix(OperatorKind.HODGE, _describe(basis), _describe(target), payload)


def codifferential_matrix(order: int) -> OperatorMatrix:
    """Direct 1D stencil ``D[j, i] = -sum_(m <= i) l_m''(x_j)`` on GLL nodes.

    Rows are the N + 1 primal nodes and columns the N edges (0-based). The
    entries equal the derivative ``eps_i'(x_j)`` of the edge proxies, i.e. the
    unsigned composition star-d-star.
    """
    lag = basis1d("lagrange_gll", order)
    second = lag.lagrange_derivative_matrix(lag.nodes, 2)
    payload = -np.cumsum(second, axis=1)[:, :order]
    edges = TensorBasis((Axis(order),), 1)
    return OperatorMatrix(OperatorKind.CODIFFERENTIAL, _describe(edges), _describe(edges.with_degree(0)), payload)


def _star_d_star(df: DiscreteForm, metric: Metric | None, dual: AxisRole | str) -> DiscreteForm:
    return hodge_star(exterior_derivative(hodge_star(df, metric, dual)), metric, dual)


def star_d_star_matrix(basis: TensorBasis, metric: Metric | None = None, dual: AxisRole | str = AxisRole.DUAL_INTERIOR) -> OperatorMatrix:
    """Unsigned composition star, d on the staggered grid, star, as a matrix."""
    payload = _columns(basis, lambda f: _star_d_star(f, metric, dual))
    return OperatorMatrix(OperatorKind.CODIFFERENTIAL, _describe(basis), _describe(basis.with_degree(basis.degree - 1)), payload)


def codifferential(df: DiscreteForm, metric: Metric | None = None, dual: AxisRole | str = AxisRole.DUAL_INTERIOR) -> DiscreteForm:
    """Signed codifferential ``(-1)^(n(k+1)+1) star d star`` of a k-form, k >= 1."""
    n, k = df.dimension, df.degree
    if k < 1:
        raise ValueError("the codifferential of a 0-form is not defined")
    sign = (-1) ** (n * (k + 1) + 1)
    return sign * _star_d_star(df, metric, dual)


def wedge_h(a: DiscreteForm, b: DiscreteForm, target: TensorBasis | None = None, quad_order: int | None = None) -> DiscreteForm:
    """Projection of the pointwise wedge product of two discrete forms."""
    if a.basis.axes != b.basis.axes:
        raise ValueError("both factors must live on the same grid")
    k, l = a.degree, b.degree
    if k + l > a.dimension:
        raise ValueError(f"wedge of a {k}-form and an {l}-form exceeds dimension {a.dimension}")
    target = target or a.basis.with_degree(k + l)
    q = quad_order or target.order + 3
    return project(a.as_form().wedge(b.as_form()), target, q)


def _inverse_minors(points: np.ndarray, n: int, k: int, metric: Metric | None) -> tuple[np.ndarray, np.ndarray]:
    comps = list(combinations(range(n), k))
    m = points.shape[0]
    if metric is None:
        return np.broadcast_to(np.eye(len(comps)), (m, len(comps), len(comps))), np.ones(m)
    g = np.asarray(metric(points), dtype=float)
    det = np.linalg.det(g)
    if np.any(det <= 0):
        raise ValueError("metric is singular or not positive definite at a quadrature point")
    inv = np.linalg.inv(g)
    minors = np.empty((m, len(comps), len(comps)))
    for i, I in enumerate(comps):
        for j, J in enumerate(comps):
            minors[:, i, j] = np.linalg.det(inv[:, list(I)][:, :, list(J)]) if k else 1.0
    return minors, np.sqrt(det)


def mass_matrix(basis: TensorBasis, metric: Metric | None = None, quad_order: int | None = None) -> OperatorMatrix:
    """``M_ij = integral of basis_i ^ star basis_j`` by tensor Gauss quadrature."""
    q = quad_order or basis.order + 3
    pts, w = domain_quadrature(basis.axes, q)
    B = basis.sample_matrix(pts)
    minors, vol = _inverse_minors(pts, basis.dimension, basis.degree, metric)
    M = np.einsum("pci,pcd,p,pdj->ij", B, minors, w * vol, B, optimize=True)
    M = 0.5 * (M + M.T)
    return OperatorMatrix(OperatorKind.MASS, _describe(basis), _describe(basis), M)


def inner(a: DiscreteForm, b: DiscreteForm, metric: Metric | None = None, quad_order: int | None = None) -> float:
    """L2 inner product of two discrete forms of the same space."""
    if a.basis != b.basis:
        raise ValueError("inner product needs forms in the same space")
    return float(a.coefficients @ mass_matrix(a.basis, metric, quad_order).payload @ b.coefficients)


def trace_form(df: DiscreteForm, axis: int, side: int) -> DiscreteForm:
    """Restriction to the face ``x_axis = end`` (``side`` = -1 or +1).

    Forms of degree n - 1 pick up the orientation sign ``(-1)^axis * side`` of
    the face as a boundary of the volume; top-degree forms are treated through
    their proxy with the same sign, which in 1D gives the signed end values.
    Lower degrees are restricted without a sign.
    """
    basis = df.basis
    n, k = basis.dimension, basis.degree
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} outside 0..{n - 1}")
    ax = basis.axes[axis]
    if ax.periodic:
        raise ValueError("a periodic axis has no boundary")
    end = ax.domain[0] if side < 0 else ax.domain[1]
    face_axes = tuple(a for i, a in enumerate(basis.axes) if i != axis)
    face_degree = min(k, n - 1)
    face = TensorBasis(face_axes, face_degree)
    sign = (-1) ** axis * side if k >= n - 1 else 1
    out = np.zeros(face.size)
    for comp, block in basis.blocks(df.coefficients):
        if k < n and axis in comp:
            continue
        along = ax.factor_matrix(axis in comp, [end])[0]
        restricted = np.tensordot(block, along, axes=([axis], [0]))
        face_comp = tuple(a - (a > axis) for a in comp if a != axis)
        fc = face.components.index(face_comp)
        out[face.offsets[fc] : face.offsets[fc + 1]] = restricted.ravel()
    return DiscreteForm(face, sign * out)


def boundary_traces(df: DiscreteForm) -> list[tuple[int, int, DiscreteForm]]:
    """Traces on all non-periodic faces as ``(axis, side, form)``."""
    return [
        (a, s, trace_form(df, a, s))
        for a, ax in enumerate(df.basis.axes)
        if not ax.periodic
        for s in (-1, 1)
    ]
