"""Oriented cubical cell complexes, chains, cochains and incidence matrices.

A tensor-product complex is described per axis by the number of 1-cells and
the axis topology (closed interval, periodic circle, or open interval whose end
segments have no end points; the latter models the interior of a dual grid).

Conventions
-----------
* k-cells are grouped by *component*: the sorted tuple of axes along which the
  cell is extended. Components are ordered lexicographically, e.g. in 3D the
  1-cells come as (0,), (1,), (2,) and the 2-cells as (0, 1), (0, 2), (1, 2).
* Within a component, cells are numbered row-major over the per-axis indices,
  so the last axis varies fastest.
* A cell extended along axes ``i1 < ... < ik`` carries the orientation of
  ``dx^i1 ^ ... ^ dx^ik``: edges point toward increasing coordinate, faces are
  counterclockwise in their (first, second) axis plane, volumes right-handed.

With these rules the boundary of a product cell follows the graded Leibniz rule
``d(a x b) = da x b + (-1)^p a x db`` and all incidence matrices are assembled
from Kronecker products of 1D incidence matrices.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations
from math import prod
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "AxisKind",
    "Complex",
    "CellComplex",
    "BoundaryComplex",
    "DualComplex",
    "DualBoundary",
    "RelabeledComplex",
    "IncidenceMatrix",
    "Chain",
    "Cochain",
    "HomologyInfo",
    "build_complex",
    "incidence",
    "boundary",
    "coboundary",
    "pairing",
    "dual_complex",
    "boundary_complex",
    "homology",
    "trace_cochain",
    "has_zero_trace",
    "tensor_product_chain",
    "transpose_product_chain",
    "permutation_sign",
    "relabel",
    "annulus_complex",
    "hole_complex",
    "complex_to_json",
    "complex_from_json",
    "chain_to_json",
    "chain_from_json",
]

ORIENTATION_CONVENTION = "default_lexicographic"


class AxisKind(str, Enum):
    INTERVAL = "interval"
    PERIODIC = "periodic"
    OPEN = "open"


def permutation_sign(order: Sequence[int]) -> int:
    """Sign of the permutation that sorts ``order`` (inversion count parity)."""
    order = list(order)
    inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
    return -1 if inversions % 2 else 1


def _zeros(rows: int, cols: int) -> sp.csr_matrix:
    return sp.csr_matrix((rows, cols), dtype=np.int64)


def _stack(blocks: list[list[sp.spmatrix]]) -> sp.csr_matrix:
    return sp.vstack([sp.hstack(row, format="csr") for row in blocks], format="csr").astype(np.int64)


# ---------------------------------------------------------------------------
# incidence matrix container


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Sparse matrix with entries in {-1, 0, 1} mapping coefficients of degree
    ``from_degree`` to degree ``to_degree``."""

    from_degree: int
    to_degree: int
    matrix: sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def T(self) -> IncidenceMatrix:
        return IncidenceMatrix(self.to_degree, self.from_degree, self.matrix.T.tocsr())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other):
        if isinstance(other, IncidenceMatrix):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def to_coo_text(self) -> str:
        """One ``i j value`` line per nonzero entry (0-based indices)."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"{coo.row[i]} {coo.col[i]} {int(coo.data[i]):+d}" for i in order if coo.data[i] != 0]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_coo_text(cls, text: str, shape: tuple[int, int], from_degree: int, to_degree: int) -> IncidenceMatrix:
        rows, cols, vals = [], [], []
        for line in text.splitlines():
            if line.strip():
                i, j, v = line.split()
                rows.append(int(i))
                cols.append(int(j))
                vals.append(int(v))
        m = sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=np.int64)
        return cls(from_degree, to_degree, m)


# ---------------------------------------------------------------------------
# complexes


class Complex(ABC):
    """Common interface: a finite chain complex given by its incidence matrices."""

    dimension: int

    @property
    @abstractmethod
    def cell_counts(self) -> tuple[int, ...]: ...

    @abstractmethod
    def _build_incidence(self, k: int) -> sp.csr_matrix: ...

    @abstractmethod
    def descriptor(self) -> dict[str, Any]: ...

    def incidence_matrix(self, k: int) -> sp.csr_matrix:
        """``E_(k-1,k)`` as a sparse integer matrix, rows (k-1)-cells, columns k-cells."""
        if not 1 <= k <= self.dimension:
            raise ValueError(f"incidence degree must lie in 1..{self.dimension}, got {k}")
        cache = self.__dict__.setdefault("_incidence_cache", {})
        if k not in cache:
            m = self._build_incidence(k)
            m.eliminate_zeros()
            m.sort_indices()
            cache[k] = m
        return cache[k]

    def check_degree(self, k: int) -> None:
        if not 0 <= k <= self.dimension:
            raise ValueError(f"degree {k} outside 0..{self.dimension}")

    def fingerprint(self) -> str:
        cached = self.__dict__.get("_fingerprint")
        if cached is None:
            text = json.dumps(self.descriptor(), sort_keys=True, separators=(",", ":"))
            cached = hashlib.sha256(text.encode()).hexdigest()
            self.__dict__["_fingerprint"] = cached
        return cached

    # complexes with the same structure are interchangeable
    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Complex):
            return NotImplemented
        return self.fingerprint() == other.fingerprint()

    def __hash__(self) -> int:
        return hash(self.fingerprint())


def _axis_incidence(kind: AxisKind, n_edges: int) -> sp.csr_matrix:
    """1D incidence (nodes x edges) of a single axis."""
    e = np.arange(n_edges)
    if kind is AxisKind.INTERVAL:
        n_nodes = n_edges + 1
        rows = np.concatenate((e, e + 1))
    elif kind is AxisKind.PERIODIC:
        n_nodes = n_edges
        rows = np.concatenate((e, (e + 1) % n_edges))
    else:
        n_nodes = n_edges - 1
        start, end = e - 1, e
        keep_s, keep_e = start >= 0, end <= n_nodes - 1
        rows = np.concatenate((start[keep_s], end[keep_e]))
        cols = np.concatenate((e[keep_s], e[keep_e]))
        vals = np.concatenate((-np.ones(keep_s.sum()), np.ones(keep_e.sum())))
        return sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_edges), dtype=np.int64)
    cols = np.concatenate((e, e))
    vals = np.concatenate((-np.ones(n_edges), np.ones(n_edges)))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_edges), dtype=np.int64)


@dataclass(frozen=True)
class CellComplex(Complex):
    """Tensor-product cubical complex.

    Parameters
    ----------
    dimension
        Number of axes, 1 to 3.
    cells_per_direction
        Number of 1-cells along each axis.
    axis_kinds
        Topology of each axis; periodic axes glue the last node to the first.
    """

    dimension: int
    cells_per_direction: tuple[int, ...]
    axis_kinds: tuple[AxisKind, ...]
    orientation_convention: str = ORIENTATION_CONVENTION

    def __post_init__(self):
        if self.dimension not in (0, 1, 2, 3):
            raise ValueError(f"dimension must be 0 to 3, got {self.dimension}")
        if len(self.cells_per_direction) != self.dimension or len(self.axis_kinds) != self.dimension:
            raise ValueError("need one cell count and one axis kind per dimension")
        for n, kind in zip(self.cells_per_direction, self.axis_kinds):
            if int(n) != n or n < 1:
                raise ValueError(f"cell counts must be positive integers, got {self.cells_per_direction}")
            if kind is AxisKind.OPEN and n < 2:
                raise ValueError("an open axis needs at least two 1-cells")

    @property
    def periodic(self) -> tuple[bool, ...]:
        return tuple(k is AxisKind.PERIODIC for k in self.axis_kinds)

    @property
    def nodes_per_direction(self) -> tuple[int, ...]:
        offset = {AxisKind.INTERVAL: 1, AxisKind.PERIODIC: 0, AxisKind.OPEN: -1}
        return tuple(n + offset[k] for n, k in zip(self.cells_per_direction, self.axis_kinds))

    def components(self, k: int) -> list[tuple[int, ...]]:
        self.check_degree(k)
        return list(combinations(range(self.dimension), k))

    def component_shape(self, component: Sequence[int]) -> tuple[int, ...]:
        return tuple(
            self.cells_per_direction[a] if a in component else self.nodes_per_direction[a]
            for a in range(self.dimension)
        )

    def component_offsets(self, k: int) -> list[int]:
        sizes = [prod(self.component_shape(c)) for c in self.components(k)]
        return [0] + [int(x) for x in np.cumsum(sizes)]

    @cached_property
    def cell_counts(self) -> tuple[int, ...]:
        return tuple(self.component_offsets(k)[-1] for k in range(self.dimension + 1))

    def cell_index(self, k: int, component: Sequence[int], multi_index: Sequence[int]) -> int:
        comps = self.components(k)
        c = comps.index(tuple(component))
        return self.component_offsets(k)[c] + int(np.ravel_multi_index(tuple(multi_index), self.component_shape(component)))

    def cell(self, k: int, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Component and per-axis index of k-cell ``index``."""
        offsets = self.component_offsets(k)
        if not 0 <= index < offsets[-1]:
            raise IndexError(f"{k}-cell index {index} out of range")
        c = int(np.searchsorted(offsets, index, side="right") - 1)
        comp = self.components(k)[c]
        mi = np.unravel_index(index - offsets[c], self.component_shape(comp))
        return comp, tuple(int(i) for i in mi)

    def _build_incidence(self, k: int) -> sp.csr_matrix:
        n = self.dimension
        lower = self.components(k - 1)
        blocks = [[None] * len(self.components(k)) for _ in lower]
        for j, comp in enumerate(self.components(k)):
            for pos, axis in enumerate(comp):
                face = tuple(a for a in comp if a != axis)
                factors = []
                for m in range(n):
                    if m == axis:
                        factors.append(_axis_incidence(self.axis_kinds[m], self.cells_per_direction[m]))
                    elif m in face:
                        factors.append(sp.identity(self.cells_per_direction[m], dtype=np.int64, format="csr"))
                    else:
                        factors.append(sp.identity(self.nodes_per_direction[m], dtype=np.int64, format="csr"))
                block = factors[0]
                for f in factors[1:]:
                    block = sp.kron(block, f, format="csr")
                blocks[lower.index(face)][j] = (-1) ** pos * block
        rows = [prod(self.component_shape(c)) for c in lower]
        cols = [prod(self.component_shape(c)) for c in self.components(k)]
        for i in range(len(lower)):
            for j in range(len(cols)):
                if blocks[i][j] is None:
                    blocks[i][j] = _zeros(rows[i], cols[j])
        return _stack(blocks)

    def boundary_mask(self, k: int) -> np.ndarray:
        """Boolean mask of k-cells lying on the boundary of the domain."""
        masks = []
        for comp in self.components(k):
            shape = self.component_shape(comp)
            grids = np.indices(shape).reshape(len(shape), -1) if shape else np.zeros((0, 1), int)
            on = np.zeros(prod(shape), dtype=bool)
            for a in range(self.dimension):
                if a in comp or self.axis_kinds[a] is not AxisKind.INTERVAL:
                    continue
                on |= (grids[a] == 0) | (grids[a] == shape[a] - 1)
            masks.append(on)
        return np.concatenate(masks) if masks else np.zeros(0, bool)

    def descriptor(self) -> dict[str, Any]:
        return {
            "type": "cubical",
            "dimension": self.dimension,
            "cells_per_direction": list(self.cells_per_direction),
            "periodic": list(self.periodic),
            "axis_kinds": [k.value for k in self.axis_kinds],
            "orientation_convention": self.orientation_convention,
        }


def build_complex(
    dimension: int,
    cells_per_direction: Sequence[int],
    periodic_flags: Sequence[bool] | None = None,
) -> CellComplex:
    """Tensor-product complex with the given number of 1-cells per axis."""
    if dimension not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    if periodic_flags is None:
        periodic_flags = [False] * dimension
    kinds = tuple(AxisKind.PERIODIC if p else AxisKind.INTERVAL for p in periodic_flags)
    return CellComplex(dimension, tuple(cells_per_direction), kinds)


@dataclass(frozen=True, eq=False)
class RelabeledComplex(Complex):
    """A complex whose cells are signed permutations of the cells of ``base``.

    New k-cell ``p`` is ``signs[k][p]`` times base k-cell ``permutations[k][p]``.
    """

    base: Complex
    permutations: tuple[np.ndarray, ...]
    signs: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        for k, (perm, sign) in enumerate(zip(self.permutations, self.signs)):
            n = self.base.cell_counts[k]
            if sorted(perm.tolist()) != list(range(n)) or perm.size != sign.size:
                raise ValueError(f"relabeling of degree {k} is not a permutation of {n} cells")
            if not np.all(np.abs(sign) == 1):
                raise ValueError("relabeling signs must be +1 or -1")

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def cell_counts(self) -> tuple[int, ...]:
        return self.base.cell_counts

    def selection(self, k: int) -> sp.csr_matrix:
        """Signed permutation matrix ``S`` with new = S @ base coefficients."""
        n = self.cell_counts[k]
        return sp.csr_matrix((self.signs[k], (np.arange(n), self.permutations[k])), shape=(n, n), dtype=np.int64)

    def _build_incidence(self, k: int) -> sp.csr_matrix:
        return (self.selection(k - 1) @ self.base.incidence_matrix(k) @ self.selection(k).T).tocsr()

    def from_base(self, coefficients: np.ndarray, k: int) -> np.ndarray:
        """Re-express base chain or cochain coefficients in the new labels."""
        return self.signs[k] * np.asarray(coefficients)[self.permutations[k]]

    def to_base(self, coefficients: np.ndarray, k: int) -> np.ndarray:
        out = np.zeros_like(np.asarray(coefficients))
        out[self.permutations[k]] = self.signs[k] * np.asarray(coefficients)
        return out

    def descriptor(self) -> dict[str, Any]:
        return {
            "type": "relabeled",
            "name": self.name,
            "base": self.base.descriptor(),
            "permutations": [p.tolist() for p in self.permutations],
            "signs": [s.tolist() for s in self.signs],
        }


def relabel(base: Complex, permutations: Sequence[Sequence[int]], signs: Sequence[Sequence[int]], name: str = "") -> RelabeledComplex:
    perms = tuple(np.asarray(p, dtype=np.int64) for p in permutations)
    sgns = tuple(np.asarray(s, dtype=np.int64) for s in signs)
    if len(perms) != base.dimension + 1 or len(sgns) != base.dimension + 1:
        raise ValueError("need one permutation and one sign vector per degree")
    return RelabeledComplex(base, perms, sgns, name)


@dataclass(frozen=True, eq=False)
class BoundaryComplex(Complex):
    """The (n-1)-dimensional complex formed by the boundary cells of a tensor complex.

    Boundary (n-1)-cells carry the outward orientation induced by the n-cell they
    bound, i.e. the sign of the corresponding entry of ``E_(n-1,n)``. Lower
    dimensional boundary cells keep their primal orientation.
    """

    parent: CellComplex
    cells: tuple[np.ndarray, ...]
    signs: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return self.parent.dimension - 1

    @property
    def cell_counts(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.cells)

    def trace_matrix(self, k: int) -> sp.csr_matrix:
        """Signed restriction from primal k-cochains to boundary k-cochains."""
        if not 0 <= k <= self.dimension:
            raise ValueError(f"no boundary cells of degree {k}")
        rows = np.arange(self.cells[k].size)
        return sp.csr_matrix(
            (self.signs[k], (rows, self.cells[k])),
            shape=(self.cells[k].size, self.parent.cell_counts[k]),
            dtype=np.int64,
        )

    def _build_incidence(self, k: int) -> sp.csr_matrix:
        e = self.parent.incidence_matrix(k)
        return (self.trace_matrix(k - 1) @ e @ self.trace_matrix(k).T).tocsr()

    def descriptor(self) -> dict[str, Any]:
        return {"type": "boundary", "parent": self.parent.descriptor()}


def boundary_complex(complex: CellComplex) -> BoundaryComplex:
    """Boundary of a tensor complex as a complex of one dimension less."""
    if not isinstance(complex, CellComplex):
        raise TypeError("boundary complexes are built from tensor cell complexes")
    if AxisKind.OPEN in complex.axis_kinds:
        raise ValueError("open axes have no boundary cells")
    n = complex.dimension
    cells, signs = [], []
    for k in range(n):
        idx = np.flatnonzero(complex.boundary_mask(k))
        if k == n - 1:
            e = complex.incidence_matrix(n).tocsr()
            s = np.asarray(e[idx].sum(axis=1)).ravel().astype(np.int64)
        else:
            s = np.ones(idx.size, dtype=np.int64)
        cells.append(idx.astype(np.int64))
        signs.append(s)
    return BoundaryComplex(complex, tuple(cells), tuple(signs))


@dataclass(frozen=True, eq=False)
class DualBoundary(Complex):
    """Boundary part of a dual complex: the dual of the primal boundary complex.

    Its p-cells are also the last cells of degree p in the full dual complex.
    """

    parent: DualComplex
    primal_boundary: BoundaryComplex

    @property
    def dimension(self) -> int:
        return self.primal_boundary.dimension

    @property
    def cell_counts(self) -> tuple[int, ...]:
        m = self.dimension
        return tuple(self.primal_boundary.cell_counts[m - p] for p in range(m + 1))

    def _build_incidence(self, p: int) -> sp.csr_matrix:
        m = self.dimension
        return self.primal_boundary.incidence_matrix(m - p + 1).T.tocsr()

    def trace_matrix(self, p: int) -> sp.csr_matrix:
        """Restriction from dual p-cochains to the boundary p-cells."""
        interior = self.parent.interior_counts[p]
        nb = self.cell_counts[p] if p <= self.dimension else 0
        total = self.parent.cell_counts[p]
        return sp.csr_matrix(
            (np.ones(nb, dtype=np.int64), (np.arange(nb), interior + np.arange(nb))),
            shape=(nb, total),
            dtype=np.int64,
        )

    def descriptor(self) -> dict[str, Any]:
        return {"type": "dual_boundary", "primal": self.parent.primal.descriptor()}


@dataclass(frozen=True, eq=False)
class DualComplex(Complex):
    """Dual complex with boundary, ``D~ = D~_i U D~_b``.

    Interior dual p-cell ``i`` is the dual of primal (n-p)-cell ``i``; the cells
    of the boundary part follow after the interior cells of each degree. The
    interior incidence is the transpose of the primal one,
    ``E~_(p-1,p) = E_(n-p,n-p+1)^T``; the interior-to-boundary block is
    ``(-1)^p`` times the signed trace of primal (n-p)-cells.
    """

    primal: CellComplex
    primal_boundary: BoundaryComplex | None

    @property
    def dimension(self) -> int:
        return self.primal.dimension

    @property
    def interior_counts(self) -> tuple[int, ...]:
        n = self.dimension
        return tuple(self.primal.cell_counts[n - p] for p in range(n + 1))

    @property
    def boundary_counts(self) -> tuple[int, ...]:
        n = self.dimension
        if self.primal_boundary is None:
            return (0,) * (n + 1)
        pb = self.primal_boundary.cell_counts
        return tuple(pb[n - 1 - p] if p <= n - 1 else 0 for p in range(n + 1))

    @property
    def cell_counts(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.interior_counts, self.boundary_counts))

    @cached_property
    def boundary(self) -> DualBoundary | None:
        if self.primal_boundary is None:
            return None
        return DualBoundary(self, self.primal_boundary)

    def interior_incidence(self, p: int) -> sp.csr_matrix:
        n = self.dimension
        return self.primal.incidence_matrix(n - p + 1).T.tocsr()

    def dual_index(self, k: int, index: int) -> tuple[int, int]:
        """Dual of primal k-cell ``index``: (degree, index) in the dual complex."""
        return self.dimension - k, index

    def _build_incidence(self, p: int) -> sp.csr_matrix:
        n = self.dimension
        top_left = self.interior_incidence(p)
        nb_lo, nb_hi = self.boundary_counts[p - 1], self.boundary_counts[p]
        ni_lo = self.interior_counts[p - 1]
        if self.primal_boundary is None:
            return top_left
        bottom_left = (-1) ** p * self.primal_boundary.trace_matrix(n - p)
        if nb_hi:
            bottom_right = self.boundary.incidence_matrix(p)
        else:
            bottom_right = _zeros(nb_lo, 0)
        return _stack([[top_left, _zeros(ni_lo, nb_hi)], [bottom_left, bottom_right]])

    def descriptor(self) -> dict[str, Any]:
        return {"type": "dual", "primal": self.primal.descriptor()}


def dual_complex(complex: CellComplex) -> DualComplex:
    if not isinstance(complex, CellComplex) or AxisKind.OPEN in complex.axis_kinds:
        raise TypeError("dual complexes are built from closed or periodic tensor complexes")
    has_boundary = any(k is AxisKind.INTERVAL for k in complex.axis_kinds)
    return DualComplex(complex, boundary_complex(complex) if has_boundary else None)


# ---------------------------------------------------------------------------
# chains and cochains


@dataclass(frozen=True, eq=False)
class Chain:
    """Formal sum of k-cells, stored as a coefficient vector."""

    complex: Complex
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        self.complex.check_degree(self.degree)
        c = np.asarray(self.coefficients)
        if c.shape != (self.complex.cell_counts[self.degree],):
            raise ValueError(
                f"a {self.degree}-chain needs {self.complex.cell_counts[self.degree]} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    def _check(self, other) -> None:
        if other.complex != self.complex or other.degree != self.degree:
            raise ValueError("chains live on different complexes or degrees")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.complex, self.degree, self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.complex, self.degree, self.coefficients - other.coefficients)

    def __neg__(self):
        return type(self)(self.complex, self.degree, -self.coefficients)

    def __rmul__(self, scalar):
        return type(self)(self.complex, self.degree, scalar * self.coefficients)

    @classmethod
    def zero(cls, complex: Complex, degree: int):
        dtype = np.float64 if cls is Cochain else np.int64
        return cls(complex, degree, np.zeros(complex.cell_counts[degree], dtype=dtype))

    @classmethod
    def canonical(cls, complex: Complex, degree: int, index: int):
        c = cls.zero(complex, degree)
        c.coefficients[index] = 1
        return c


@dataclass(frozen=True, eq=False)
class Cochain(Chain):
    """Real-valued linear functional on k-chains (degrees of freedom on k-cells)."""

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=np.float64))


def incidence(complex: Complex, k: int) -> IncidenceMatrix:
    """``E_(k-1,k)``: maps k-chain coefficients to their boundary."""
    return IncidenceMatrix(k, k - 1, complex.incidence_matrix(k))


def boundary(chain: Chain) -> Chain:
    if chain.degree == 0:
        raise ValueError("the boundary of a 0-chain is not defined")
    e = chain.complex.incidence_matrix(chain.degree)
    return Chain(chain.complex, chain.degree - 1, e @ chain.coefficients)


def coboundary(cochain: Cochain) -> Cochain:
    k = cochain.degree
    if k >= cochain.complex.dimension:
        raise ValueError("the coboundary of a top-degree cochain is not defined")
    e = cochain.complex.incidence_matrix(k + 1)
    return Cochain(cochain.complex, k + 1, e.T @ cochain.coefficients)


def pairing(cochain: Cochain, chain: Chain) -> float:
    """Duality pairing ``<c^(k), c_(k)>``; zero for mismatched degrees."""
    if cochain.complex != chain.complex:
        raise ValueError("cochain and chain live on different complexes")
    if cochain.degree != chain.degree:
        return 0.0
    return float(np.dot(cochain.coefficients, chain.coefficients))


# ---------------------------------------------------------------------------
# homology


@dataclass(frozen=True, eq=False)
class HomologyInfo:
    degree: int
    betti_number: int
    harmonic_chain_basis: list[Chain]
    harmonic_cochain_basis: list[Cochain]


def _rref(rows: np.ndarray, tol: float) -> np.ndarray:
    """Reduced row echelon form of a small dense matrix."""
    a = rows.astype(float).copy()
    r = 0
    for col in range(a.shape[1]):
        if r == a.shape[0]:
            break
        pivot = r + int(np.argmax(np.abs(a[r:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        a[r] /= a[r, col]
        others = np.arange(a.shape[0]) != r
        a[others] -= np.outer(a[others, col], a[r])
        r += 1
    return a[:r]


def homology(complex: Complex, k: int, tolerance: float = 1e-10) -> HomologyInfo:
    """Harmonic k-chains: ``null(E_(k-1,k))`` intersected with ``range(E_(k,k+1))^perp``.

    The basis is put in reduced row echelon form so each vector has leading
    entry +1, then rounded to integers when every entry is within 1e-6 of one.
    """
    complex.check_degree(k)
    n_cells = complex.cell_counts[k]
    parts = []
    if k >= 1:
        parts.append(complex.incidence_matrix(k).toarray())
    if k < complex.dimension:
        parts.append(complex.incidence_matrix(k + 1).toarray().T)
    a = np.vstack(parts).astype(float) if parts else np.zeros((0, n_cells))
    if a.shape[0] == 0 or not np.any(a):
        null = np.eye(n_cells)
    else:
        _, s, vt = np.linalg.svd(a)
        rank = int(np.sum(s > tolerance * s[0]))
        null = vt[rank:].T
    basis = _rref(null.T, 1e-8) if null.shape[1] else np.zeros((0, n_cells))
    for row in basis:
        first = row[np.flatnonzero(np.abs(row) > 1e-8)[0]]
        row /= first
    rounded = np.round(basis)
    integral = np.all(np.abs(basis - rounded) < 1e-6)
    chains, cochains = [], []
    for row, rrow in zip(basis, rounded):
        coeffs = rrow.astype(np.int64) if integral else row
        chains.append(Chain(complex, k, coeffs))
        cochains.append(Cochain(complex, k, coeffs.astype(float)))
    return HomologyInfo(k, len(chains), chains, cochains)


# ---------------------------------------------------------------------------
# traces


def trace_cochain(cochain: Cochain, boundary: BoundaryComplex | DualBoundary) -> Cochain:
    """Restrict a cochain to the cells of a boundary complex derived from its complex."""
    if boundary.parent is not cochain.complex:
        raise ValueError("boundary complex is not derived from the cochain's complex")
    t = boundary.trace_matrix(cochain.degree)
    return Cochain(boundary, cochain.degree, t @ cochain.coefficients)


def has_zero_trace(cochain: Cochain, boundary: BoundaryComplex | DualBoundary, tol: float = 0.0) -> bool:
    """Tangent (primal) or normal (dual) predicate: the trace vanishes."""
    return bool(np.all(np.abs(trace_cochain(cochain, boundary).coefficients) <= tol))


# ---------------------------------------------------------------------------
# tensor products of chains


def _product_complex(first: CellComplex, second: CellComplex) -> CellComplex:
    return CellComplex(
        first.dimension + second.dimension,
        first.cells_per_direction + second.cells_per_direction,
        first.axis_kinds + second.axis_kinds,
    )


def _component_blocks(complex: CellComplex, k: int, coefficients: np.ndarray):
    offsets = complex.component_offsets(k)
    for comp, lo, hi in zip(complex.components(k), offsets[:-1], offsets[1:]):
        yield comp, coefficients[lo:hi].reshape(complex.component_shape(comp))


def tensor_product_chain(first: Chain, second: Chain) -> Chain:
    """Chain ``c_p x c_q`` on the product complex (axes of ``first`` come first)."""
    if not isinstance(first.complex, CellComplex) or not isinstance(second.complex, CellComplex):
        raise TypeError("tensor products need tensor cell complexes")
    product = _product_complex(first.complex, second.complex)
    p, q = first.degree, second.degree
    shift = first.complex.dimension
    dtype = np.result_type(first.coefficients, second.coefficients)
    out = np.zeros(product.cell_counts[p + q], dtype=dtype)
    offsets = product.component_offsets(p + q)
    comps = product.components(p + q)
    for ca, block_a in _component_blocks(first.complex, p, first.coefficients):
        for cb, block_b in _component_blocks(second.complex, q, second.coefficients):
            comp = ca + tuple(a + shift for a in cb)
            i = comps.index(comp)
            out[offsets[i] : offsets[i + 1]] = np.multiply.outer(block_a, block_b).ravel()
    return Chain(product, p + q, out)


def transpose_product_chain(chain: Chain, leading_dimension: int) -> Chain:
    """Map a chain on ``A x B`` to the same geometric chain on ``B x A``.

    ``leading_dimension`` is the dimension of ``A``. Each cell picks up the sign
    of the axis permutation needed to restore canonical orientation.
    """
    cx = chain.complex
    if not isinstance(cx, CellComplex):
        raise TypeError("transposition needs a tensor cell complex")
    n, m = cx.dimension, leading_dimension
    order = list(range(m, n)) + list(range(m))
    swapped = CellComplex(n, tuple(cx.cells_per_direction[a] for a in order), tuple(cx.axis_kinds[a] for a in order))
    new_position = {old: new for new, old in enumerate(order)}
    k = chain.degree
    out = np.zeros(swapped.cell_counts[k], dtype=chain.coefficients.dtype)
    offsets = swapped.component_offsets(k)
    comps = swapped.components(k)
    for comp, block in _component_blocks(cx, k, chain.coefficients):
        mapped = [new_position[a] for a in comp]
        sign = permutation_sign(mapped)
        target = tuple(sorted(mapped))
        i = comps.index(target)
        out[offsets[i] : offsets[i + 1]] = sign * np.transpose(block, order).ravel()
    return Chain(swapped, k, out)


# ---------------------------------------------------------------------------
# named complexes


def annulus_complex(radial_cells: int, angular_cells: int) -> CellComplex:
    """Axis 0 radial (inner to outer), axis 1 angular and periodic."""
    return build_complex(2, [radial_cells, angular_cells], [False, True])


# Signed relabeling of annulus_complex(1, 4) onto the numbering of the square
# hole example: one ring of four faces around a hole, 8 nodes and 12 edges.
_HOLE_NODES = [4, 7, 0, 3, 1, 2, 5, 6]
_HOLE_EDGES = [11, 8, 0, 3, 10, 7, 4, 6, 5, 1, 2, 9]
_HOLE_EDGE_SIGNS = [-1, 1, -1, -1, -1, -1, 1, -1, 1, 1, 1, 1]
_HOLE_FACES = [3, 0, 2, 1]
_HOLE_FACE_SIGNS = [-1, -1, -1, -1]


def hole_complex() -> RelabeledComplex:
    """Four faces around a square hole, numbered as in the classic worked example.

    Built from ``annulus_complex(1, 4)`` by a signed relabeling. The ring
    through nodes 0, 1, 7, 6 runs against the angular direction of the base
    annulus.
    """
    return relabel(
        annulus_complex(1, 4),
        [_HOLE_NODES, _HOLE_EDGES, _HOLE_FACES],
        [[1] * 8, _HOLE_EDGE_SIGNS, _HOLE_FACE_SIGNS],
        name="hole",
    )


# ---------------------------------------------------------------------------
# serialization


def complex_to_json(complex: Complex) -> dict[str, Any]:
    d = complex.descriptor()
    d["cell_counts"] = list(complex.cell_counts)
    d["hash"] = complex.fingerprint()
    return d


def complex_from_json(data: dict[str, Any]) -> Complex:
    kind = data["type"]
    if kind == "cubical":
        kinds = tuple(AxisKind(k) for k in data["axis_kinds"])
        return CellComplex(int(data["dimension"]), tuple(data["cells_per_direction"]), kinds, data["orientation_convention"])
    if kind == "relabeled":
        return relabel(complex_from_json(data["base"]), data["permutations"], data["signs"], data.get("name", ""))
    raise ValueError(f"cannot rebuild complex of type {kind!r} from JSON")


def chain_to_json(chain: Chain) -> dict[str, Any]:
    coeffs = chain.coefficients
    values = coeffs.tolist()
    return {
        "kind": "cochain" if isinstance(chain, Cochain) else "chain",
        "complex_hash": chain.complex.fingerprint(),
        "degree": chain.degree,
        "coefficients": values,
    }


def chain_from_json(data: dict[str, Any], complex: Complex) -> Chain:
    if data["complex_hash"] != complex.fingerprint():
        raise ValueError("serialized chain belongs to a different complex")
    cls = Cochain if data.get("kind") == "cochain" else Chain
    return cls(complex, int(data["degree"]), np.asarray(data["coefficients"]))
