"""Reduction, reconstruction and the projections built from them.

Analytic forms are given by one callable per canonical component. Callables
receive one coordinate array per axis (broadcastable against each other) and
return values of the broadcast shape; constants are accepted and broadcast.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb, fsum, log
from typing import Callable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from .basis import Axis, AxisRole, TensorBasis, domain_quadrature
from .nodes import gauss_quadrature
from .topology import Cochain, permutation_sign

__all__ = [
    "AnalyticForm",
    "DiscreteForm",
    "canonical_monomial",
    "pointwise_form",
    "star_components",
    "wedge_components",
    "reduce",
    "reduce_tensor_cell",
    "reconstruct",
    "project",
    "coproject",
    "rebase",
    "opposite_basis",
    "galerkin_projection",
    "integrate",
    "l2_error",
    "ConvergenceRow",
    "convergence_study",
]

Metric = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# pointwise exterior algebra


def canonical_monomial(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted axes of ``dx^i1 ^ ... ^ dx^ik``; sign 0 for repeated axes."""
    if len(set(indices)) != len(indices):
        return 0, tuple(sorted(indices))
    return permutation_sign(np.argsort(indices, kind="stable")), tuple(sorted(indices))


def _complement(component: tuple[int, ...], n: int) -> tuple[int, ...]:
    return tuple(a for a in range(n) if a not in component)


def star_components(values: np.ndarray, n: int, k: int, metric: np.ndarray | None = None) -> np.ndarray:
    """Hodge star of k-form component values, shape (m, C(n,k)) -> (m, C(n,n-k)).

    ``metric`` holds g_ij per point, shape (m, n, n). Indices are raised with
    minors of the inverse metric and the result is scaled by sqrt(det g).
    """
    values = np.atleast_2d(values)
    comps = list(combinations(range(n), k))
    targets = list(combinations(range(n), n - k))
    if metric is None:
        raised, vol = values, np.ones(values.shape[0])
    else:
        metric = np.asarray(metric, dtype=float)
        det = np.linalg.det(metric)
        if np.any(det <= 0):
            raise ValueError("metric is singular or not positive definite at a sample point")
        inv = np.linalg.inv(metric)
        vol = np.sqrt(det)
        raised = np.zeros_like(values)
        for i, I in enumerate(comps):
            for j, K in enumerate(comps):
                minor = np.linalg.det(inv[:, list(I)][:, :, list(K)]) if k else np.ones(values.shape[0])
                raised[:, i] += minor * values[:, j]
    out = np.zeros((values.shape[0], len(targets)))
    for i, I in enumerate(comps):
        rest = _complement(I, n)
        out[:, targets.index(rest)] += permutation_sign(I + rest) * vol * raised[:, i]
    return out


def wedge_components(a: np.ndarray, k: int, b: np.ndarray, l: int, n: int) -> np.ndarray:
    """Pointwise wedge product of component arrays.

    Terms are accumulated in an order that depends only on the unordered pair
    of factor components, so ``a ^ b`` and ``(-1)^(kl) b ^ a`` agree bitwise.
    """
    if k + l > n:
        raise ValueError(f"wedge of a {k}-form and an {l}-form exceeds dimension {n}")
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    ca = list(combinations(range(n), k))
    cb = list(combinations(range(n), l))
    targets = list(combinations(range(n), k + l))
    out = np.zeros((a.shape[0], len(targets)))
    for j, J in enumerate(targets):
        terms = []
        for I in combinations(J, k):
            K = tuple(x for x in J if x not in I)
            key = min(I, K), max(I, K)
            terms.append((key, permutation_sign(I + K), ca.index(I), cb.index(K)))
        for _, sign, i, q in sorted(terms):
            out[:, j] += sign * (a[:, i] * b[:, q])
    return out


# ---------------------------------------------------------------------------
# analytic forms


def _broadcast_call(f, coords: Sequence[np.ndarray]) -> np.ndarray:
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords)) if coords else ()
    return np.broadcast_to(np.asarray(f(*coords), dtype=float), shape)


@dataclass(frozen=True)
class AnalyticForm:
    """Smooth k-form on a domain of R^n, one callable per canonical component.

    ``derivative`` optionally carries the analytically known exterior
    derivative; commutation checks use it instead of numerical differentiation.
    """

    dimension: int
    degree: int
    components: tuple[Callable, ...]
    derivative: AnalyticForm | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not 0 <= self.degree <= self.dimension:
            raise ValueError(f"degree {self.degree} outside 0..{self.dimension}")
        if len(self.components) != comb(self.dimension, self.degree):
            raise ValueError(
                f"a {self.degree}-form in {self.dimension}D has {comb(self.dimension, self.degree)} components, got {len(self.components)}"
            )
        if self.derivative is not None and self.derivative.degree != self.degree + 1:
            raise ValueError("derivative must have degree k + 1")

    @classmethod
    def from_terms(cls, dimension: int, degree: int, terms: Mapping[Sequence[int], Callable | float], derivative: AnalyticForm | None = None, name: str = "") -> AnalyticForm:
        """Build from monomials ``{(i1, ..., ik): coefficient}`` in any axis order.

        ``{(1, 0): 1.0}`` in 2D is ``dy ^ dx = -dx ^ dy``.
        """
        comps = list(combinations(range(dimension), degree))
        collected: list[list[tuple[int, Callable]]] = [[] for _ in comps]
        for idx, coef in terms.items():
            if len(idx) != degree:
                raise ValueError(f"monomial {idx} is not of degree {degree}")
            sign, axes = canonical_monomial(tuple(idx))
            if sign:
                f = coef if callable(coef) else (lambda *x, v=float(coef): v)
                collected[comps.index(axes)].append((sign, f))

        def make(parts):
            return lambda *x: sum((s * np.asarray(f(*x), dtype=float) for s, f in parts), np.zeros(()))

        return cls(dimension, degree, tuple(make(p) for p in collected), derivative, name)

    @classmethod
    def constant(cls, dimension: int, degree: int, values: Sequence[float] | float) -> AnalyticForm:
        values = np.broadcast_to(np.asarray(values, dtype=float), (comb(dimension, degree),))
        zero = cls(dimension, degree + 1, tuple(lambda *x: 0.0 for _ in range(comb(dimension, degree + 1)))) if degree < dimension else None
        return cls(dimension, degree, tuple((lambda *x, v=v: v) for v in values), zero)

    def component_values(self, c: int, coords: Sequence[np.ndarray]) -> np.ndarray:
        return _broadcast_call(self.components[c], coords)

    def evaluate(self, points: npt.ArrayLike) -> np.ndarray:
        """Component values at points of shape (m, n), returned as (m, C(n,k))."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        coords = [points[:, a] for a in range(self.dimension)]
        if not self.components:
            return np.zeros((points.shape[0], 0))
        return np.stack([np.broadcast_to(self.component_values(c, coords), (points.shape[0],)) for c in range(len(self.components))], axis=1)

    def __add__(self, other: AnalyticForm) -> AnalyticForm:
        if (self.dimension, self.degree) != (other.dimension, other.degree):
            raise ValueError("cannot add forms of different degree or dimension")
        d = self.derivative + other.derivative if self.derivative is not None and other.derivative is not None else None
        return AnalyticForm(
            self.dimension,
            self.degree,
            tuple((lambda *x, f=f, g=g: np.asarray(f(*x)) + np.asarray(g(*x))) for f, g in zip(self.components, other.components)),
            d,
        )

    def scale(self, factor: float) -> AnalyticForm:
        d = self.derivative.scale(factor) if self.derivative is not None else None
        return AnalyticForm(self.dimension, self.degree, tuple((lambda *x, f=f: factor * np.asarray(f(*x))) for f in self.components), d)

    def __neg__(self) -> AnalyticForm:
        return self.scale(-1.0)

    def star(self, metric: Metric | None = None) -> AnalyticForm:
        """Pointwise Hodge star; ``metric(points)`` returns g_ij of shape (m, n, n)."""
        n, k = self.dimension, self.degree
        return pointwise_form(n, n - k, lambda p: star_components(self.evaluate(p), n, k, None if metric is None else metric(p)))

    def wedge(self, other: AnalyticForm) -> AnalyticForm:
        n, k, l = self.dimension, self.degree, other.degree
        if other.dimension != n:
            raise ValueError("dimension mismatch")
        return pointwise_form(n, k + l, lambda p: wedge_components(self.evaluate(p), k, other.evaluate(p), l, n))


def pointwise_form(dimension: int, degree: int, func: Callable[[np.ndarray], np.ndarray]) -> AnalyticForm:
    """Wrap ``func(points) -> (m, C(n,k))`` as an analytic form."""

    def make(c):
        def component(*coords):
            shape = np.broadcast_shapes(*(np.shape(x) for x in coords))
            pts = np.stack([np.broadcast_to(x, shape).ravel() for x in coords], axis=1)
            return func(pts)[:, c].reshape(shape)

        return component

    return AnalyticForm(dimension, degree, tuple(make(c) for c in range(comb(dimension, degree))))


# ---------------------------------------------------------------------------
# discrete forms


@dataclass(frozen=True, eq=False)
class DiscreteForm:
    """Element of the finite-dimensional space spanned by a tensor basis."""

    basis: TensorBasis
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).copy()
        if coeffs.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return self.basis.degree

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def complex(self):
        return self.basis.complex

    @property
    def cochain(self) -> Cochain:
        return Cochain(self.basis.complex, self.degree, self.coefficients)

    def __add__(self, other: DiscreteForm) -> DiscreteForm:
        self._check(other)
        return DiscreteForm(self.basis, self.coefficients + other.coefficients)

    def __sub__(self, other: DiscreteForm) -> DiscreteForm:
        self._check(other)
        return DiscreteForm(self.basis, self.coefficients - other.coefficients)

    def __rmul__(self, scalar: float) -> DiscreteForm:
        return DiscreteForm(self.basis, scalar * self.coefficients)

    def _check(self, other: DiscreteForm) -> None:
        if other.basis != self.basis:
            raise ValueError("discrete forms live in different spaces")

    def evaluate(self, points: npt.ArrayLike, derivative_axis: int | None = None) -> np.ndarray:
        return self.basis.evaluate(self.coefficients, points, derivative_axis)

    def analytic_derivative(self) -> AnalyticForm | None:
        """Exact exterior derivative of the reconstruction, built from partials."""
        n, k = self.dimension, self.degree
        if k == n:
            return None
        comps = self.basis.components
        targets = list(combinations(range(n), k + 1))

        def dvalues(points):
            out = np.zeros((points.shape[0], len(targets)))
            for c, S in enumerate(comps):
                for a in range(n):
                    if a in S:
                        continue
                    sign, T = canonical_monomial((a,) + S)
                    out[:, targets.index(T)] += sign * self.basis.evaluate_component(self.coefficients, c, points, a)
            return out

        return pointwise_form(n, k + 1, dvalues)

    def as_form(self) -> AnalyticForm:
        """The reconstruction as an analytic form carrying its exact derivative."""
        b, coeffs = self.basis, self.coefficients

        def make(c):
            def component(*coords):
                shape = np.broadcast_shapes(*(np.shape(x) for x in coords)) if coords else ()
                pts = np.stack([np.broadcast_to(x, shape).ravel() for x in coords], axis=1) if coords else np.zeros((1, 0))
                return b.evaluate_component(coeffs, c, pts).reshape(shape)

            return component

        return AnalyticForm(self.dimension, self.degree, tuple(make(c) for c in range(len(b.components))), self.analytic_derivative())

    def to_json(self) -> dict:
        return {
            "complex": self.basis.complex.descriptor(),
            "role": self.basis.role,
            "degree": self.degree,
            "order": self.basis.order,
            "families": self.basis.families(),
            "coefficients": [float(c) for c in self.coefficients],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# reduction and reconstruction


def _axis_rule(ax: Axis, is_edge: bool, q: int) -> tuple[np.ndarray, np.ndarray]:
    if is_edge:
        return ax.edge_quadrature(q)
    x = ax.node_coordinates
    return x[:, None], np.ones((x.size, 1))


def reduce(form: AnalyticForm, basis: TensorBasis, quad_order: int | None = None) -> Cochain:
    """Integrate ``form`` over every k-cell of the basis grid.

    Edge factors use Gauss quadrature with ``quad_order`` points per 1-cell
    (default N + 2); node factors are point evaluations.
    """
    if form.degree != basis.degree or form.dimension != basis.dimension:
        raise ValueError(
            f"cannot reduce a {form.degree}-form in {form.dimension}D onto {basis.degree}-cochains in {basis.dimension}D"
        )
    q = basis.order + 2 if quad_order is None else quad_order
    if int(q) != q or q < 1:
        raise ValueError(f"quadrature order must be at least 1, got {quad_order}")
    n = basis.dimension
    out = np.empty(basis.size)
    for c, comp in enumerate(basis.components):
        coords, weights = [], np.ones(())
        for a, ax in enumerate(basis.axes):
            pts, wts = _axis_rule(ax, a in comp, int(q))
            shape = [1] * (2 * n)
            shape[a], shape[n + a] = pts.shape
            coords.append(pts.reshape(shape))
            weights = weights * wts.reshape(shape)
        values = form.component_values(c, coords) * weights
        full = np.broadcast_to(values, tuple(np.broadcast_shapes(*(x.shape for x in coords), weights.shape)))
        block = full.sum(axis=tuple(range(n, 2 * n))) if n else full
        out[basis.offsets[c] : basis.offsets[c + 1]] = block.ravel()
    return Cochain(basis.complex, basis.degree, out)


def reduce_tensor_cell(form: AnalyticForm, factors: Sequence[tuple[float, float] | float], quad_order: int = 8) -> float:
    """Integral of ``form`` over one tensor cell given per axis as an interval or a point.

    The cell is oriented like the canonical monomial of its extended axes.
    """
    if len(factors) != form.dimension:
        raise ValueError("need one factor per axis")
    extended = tuple(a for a, f in enumerate(factors) if np.ndim(f) == 1)
    if len(extended) != form.degree:
        raise ValueError(f"cell has dimension {len(extended)}, form has degree {form.degree}")
    c = list(combinations(range(form.dimension), form.degree)).index(extended)
    coords, rules = [], []
    n = form.dimension
    for a, f in enumerate(factors):
        shape = [1] * n
        if a in extended:
            lo, hi = float(f[0]), float(f[1])
            pts, wts = gauss_quadrature(quad_order, lo, hi)
            # one weight absorbs the rounding so the rule is exact on constants
            wts, mid = wts.copy(), wts.size // 2
            wts[mid] = (hi - lo) - fsum(np.delete(wts, mid))
            shape[a] = pts.size
            coords.append(pts.reshape(shape))
            rules.append(wts)
        else:
            coords.append(np.full(shape, float(f)))
    values = np.array(form.component_values(c, coords), dtype=float).reshape([coords[a].shape[a] for a in range(n)])
    values = values.reshape([values.shape[a] for a in extended]) if extended else values.reshape(())
    for wts in reversed(rules):
        values = np.apply_along_axis(lambda v, w=wts: fsum(v * w), -1, values)
    return float(values)


def reconstruct(df: DiscreteForm, points: npt.ArrayLike) -> np.ndarray:
    """Component values of the reconstruction at points of the reference domain."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not df.basis.contains(points):
        raise ValueError("reconstruction points must lie in the reference domain")
    return df.evaluate(points)


def project(form: AnalyticForm, basis: TensorBasis, quad_order: int | None = None) -> DiscreteForm:
    """Reduce and reconstruct: the projection onto the span of ``basis``."""
    return DiscreteForm(basis, reduce(form, basis, quad_order).coefficients)


def opposite_basis(basis: TensorBasis, degree: int | None = None, dual_role: AxisRole | str = AxisRole.DUAL_INTERIOR) -> TensorBasis:
    """Basis on the staggered grid; primal axes map to dual ones and back."""
    k = basis.dimension - basis.degree if degree is None else degree
    axes = tuple(ax.dual(dual_role) if ax.role is AxisRole.PRIMAL else ax.primal() for ax in basis.axes)
    return TensorBasis(axes, k)


def _sample_points(basis: TensorBasis, per_axis: int | None = None) -> np.ndarray:
    per = per_axis or basis.order + 3
    grids = []
    for ax in basis.axes:
        lo, hi = ax.domain
        grids.append(np.linspace(lo, hi, per * ax.elements + 1))
    if not grids:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def rebase(df: DiscreteForm | AnalyticForm, target: TensorBasis, quad_order: int | None = None, tolerance: float = 1e-10, source: TensorBasis | None = None) -> DiscreteForm:
    """Express a polynomial form in another basis of the same space.

    The new coefficients are the reduction onto ``target``; the result is
    checked pointwise against the input and a ``ValueError`` is raised when the
    target cannot represent it.
    """
    form = df.as_form() if isinstance(df, DiscreteForm) else df
    if quad_order is None:
        order = max(target.order, source.order if source is not None else 0, df.basis.order if isinstance(df, DiscreteForm) else 0)
        quad_order = order + 3
    out = project(form, target, quad_order)
    pts = _sample_points(target)
    expected = form.evaluate(pts)
    scale = max(1.0, float(np.max(np.abs(expected), initial=0.0)))
    err = float(np.max(np.abs(out.evaluate(pts) - expected), initial=0.0))
    if err > tolerance * scale:
        raise ValueError(f"target basis cannot represent the form (sampled mismatch {err:.3e})")
    return out


def coproject(form: AnalyticForm, target: TensorBasis, metric: Metric | None = None, quad_order: int | None = None, dual_role: AxisRole | str = AxisRole.DUAL_INTERIOR) -> DiscreteForm:
    """Coprojection ``(-1)^(k(n-k)) * star(projection onto the opposite grid)(star a)``.

    With a primal ``target`` this is the primal coprojection; with a dual target
    the roles of the two grids are exchanged. The final star lands in the span of
    ``target`` when the opposite grid is chosen by ``dual_role`` as by default.
    """
    n, k = form.dimension, form.degree
    if target.degree != k:
        raise ValueError("target basis degree must match the form degree")
    mid = opposite_basis(target, n - k, dual_role)
    starred = project(form.star(metric), mid, quad_order)
    back = starred.as_form().star(metric)
    sign = (-1) ** (k * (n - k))
    return rebase(back.scale(sign) if sign < 0 else back, target, quad_order, tolerance=1e-9, source=mid)


def galerkin_projection(form: AnalyticForm, basis: TensorBasis, quad_order: int | None = None) -> DiscreteForm:
    """Best L2 approximation in the span of ``basis`` under the Euclidean metric."""
    q = quad_order or basis.order + 4
    pts, w = domain_quadrature(basis.axes, q)
    B = basis.sample_matrix(pts)
    f = form.evaluate(pts)
    mass = np.einsum("pci,p,pcj->ij", B, w, B)
    rhs = np.einsum("pci,p,pc->i", B, w, f)
    return DiscreteForm(basis, np.linalg.solve(mass, rhs))


def integrate(form: AnalyticForm, axes: Sequence[Axis], quad_order: int = 10) -> float:
    """Integral of a top-degree form over the product domain of ``axes``."""
    if form.degree != form.dimension:
        raise ValueError("only top-degree forms can be integrated over the domain")
    pts, w = domain_quadrature(axes, quad_order)
    return float(w @ form.evaluate(pts)[:, 0])


# ---------------------------------------------------------------------------
# convergence harness


def l2_error(df: DiscreteForm | AnalyticForm, exact: AnalyticForm, axes: Sequence[Axis], quad_order: int = 20) -> float:
    """Euclidean L2 norm of the componentwise difference over the domain."""
    pts, w = domain_quadrature(axes, quad_order)
    approx = df.evaluate(pts)
    diff = approx - exact.evaluate(pts)
    return float(np.sqrt(w @ np.sum(diff**2, axis=1)))


@dataclass(frozen=True)
class ConvergenceRow:
    elements: int
    order: int
    h: float
    l2_error: float
    seminorm_error: float | None
    observed_order: float | None = None
    exact: bool = False


def convergence_study(
    form: AnalyticForm,
    orders: Sequence[int],
    elements: Sequence[int],
    interval: tuple[float, float] = (-1.0, 1.0),
    quad_order: int = 20,
    exact_tolerance: float = 1e-13,
) -> list[ConvergenceRow]:
    """Projection errors in 1D for every (order, elements) pair, in the given order.

    The observed order between consecutive rows uses the mesh width when the
    order is fixed and the polynomial order otherwise.
    """
    if form.dimension != 1:
        raise ValueError("the convergence harness works on 1D forms")
    rows: list[ConvergenceRow] = []
    for p in orders:
        for m in elements:
            ax = Axis.uniform(p, m, *interval)
            df = project(form, TensorBasis((ax,), form.degree))
            err = l2_error(df, form, (ax,), quad_order)
            semi = None
            if form.derivative is not None and form.degree < 1:
                semi = l2_error(df.analytic_derivative(), form.derivative, (ax,), quad_order)
            h = (interval[1] - interval[0]) / m
            observed = None
            if rows and not rows[-1].exact and err > exact_tolerance:
                prev = rows[-1]
                if prev.order == p and prev.h != h:
                    observed = log(prev.l2_error / err) / log(prev.h / h)
                elif prev.elements == m and prev.order != p:
                    observed = log(prev.l2_error / err) / log(p / prev.order)
            rows.append(ConvergenceRow(m, p, h, err, semi, observed, err <= exact_tolerance))
    return rows
