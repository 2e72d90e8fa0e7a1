"""Discrete Hodge decomposition and coboundary solves."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import Axis, TensorBasis
from .mapping import annulus_map, pullback
from .mimetic import AnalyticForm, DiscreteForm, reduce
from .operators import mass_matrix
from .topology import Chain, Cochain, HomologyInfo, hole_complex, homology, pairing

__all__ = [
    "HodgeSplit",
    "harmonic_amplitude",
    "harmonic_amplitudes",
    "decompose",
    "solve_coboundary",
    "cylinder_flow",
    "cylinder_potential",
    "annulus_basis",
    "hole_flow_cochain",
    "PotentialFlowResult",
    "potential_flow",
]

RANGE_TOLERANCE = 1e-8


def _vector(x: Cochain | Chain | DiscreteForm | np.ndarray) -> np.ndarray:
    if isinstance(x, DiscreteForm):
        return x.coefficients
    if isinstance(x, Chain):
        return x.coefficients
    return np.asarray(x, dtype=float)


def harmonic_amplitude(cochain: Cochain | DiscreteForm | np.ndarray, harmonic_cochain: Cochain | np.ndarray, harmonic_chain: Chain | np.ndarray) -> float:
    """``<c, h_chain> / <h_cochain, h_chain>`` for one harmonic pair."""
    h_co, h_ch = _vector(harmonic_cochain), _vector(harmonic_chain)
    norm = float(h_co @ h_ch)
    if norm == 0.0:
        raise ValueError("harmonic cochain and chain pair to zero")
    return float(_vector(cochain) @ h_ch) / norm


def harmonic_amplitudes(cochain: Cochain | DiscreteForm | np.ndarray, info: HomologyInfo) -> np.ndarray:
    """Amplitudes ``alpha`` solving ``G alpha = p`` with ``G_jl = <h^l, h_j>``.

    Reduces to the pairwise quotient when the bases are bi-orthogonal.
    """
    if info.betti_number == 0:
        return np.zeros(0)
    H_co = np.stack([h.coefficients for h in info.harmonic_cochain_basis], axis=1)
    H_ch = np.stack([h.coefficients for h in info.harmonic_chain_basis], axis=1)
    gram = H_ch.T @ H_co
    return np.linalg.solve(gram, H_ch.T @ _vector(cochain))


def solve_coboundary(f: Cochain, tolerance: float = RANGE_TOLERANCE) -> Cochain:
    """Minimum-norm ``a`` with ``E a = f`` for a (k+1)-cochain ``f``.

    The solution is orthogonal to every k-cocycle. Raises ``ValueError`` when
    ``f`` is not a coboundary to relative ``tolerance``.
    """
    k = f.degree - 1
    if k < 0:
        raise ValueError("a 0-cochain is never a coboundary")
    E = f.complex.incidence_matrix(f.degree).T.toarray().astype(float)
    a, *_ = np.linalg.lstsq(E, f.coefficients, rcond=None)
    residual = float(np.linalg.norm(E @ a - f.coefficients))
    if residual > tolerance * max(1.0, float(np.linalg.norm(f.coefficients))):
        raise ValueError(f"data is not a coboundary (residual {residual:.3e})")
    return Cochain(f.complex, k, a)


@dataclass(frozen=True, eq=False)
class HodgeSplit:
    """Exact, harmonic and remaining parts of a discrete k-form."""

    exact: DiscreteForm
    harmonic: DiscreteForm
    remainder: DiscreteForm
    amplitudes: np.ndarray
    potential: Cochain | None
    residuals: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "exact": [float(v) for v in self.exact.coefficients],
            "harmonic": [float(v) for v in self.harmonic.coefficients],
            "remainder": [float(v) for v in self.remainder.coefficients],
            "amplitudes": [float(v) for v in self.amplitudes],
            "potential": None if self.potential is None else [float(v) for v in self.potential.coefficients],
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def decompose(df: DiscreteForm, info: HomologyInfo | None = None, metric=None, orthogonality: bool = True) -> HodgeSplit:
    """Split ``df`` into ``d b + sum alpha_j h_j + remainder``.

    Amplitudes come from pairing with the harmonic chains; the potential ``b``
    is the least-squares fit of the cochain with its harmonic part removed.
    """
    basis, k = df.basis, df.degree
    c = df.coefficients
    info = info or homology(basis.complex, k)
    alpha = harmonic_amplitudes(c, info)
    harm = np.zeros_like(c)
    for a, h in zip(alpha, info.harmonic_cochain_basis):
        harm = harm + a * h.coefficients
    potential = None
    exact = np.zeros_like(c)
    if k >= 1:
        E = basis.complex.incidence_matrix(k).T.toarray().astype(float)
        b, *_ = np.linalg.lstsq(E, c - harm, rcond=None)
        exact = E @ b
        potential = Cochain(basis.complex, k - 1, b)
    remainder = c - exact - harm
    residuals = {"reassembly": float(np.max(np.abs(exact + harm + remainder - c), initial=0.0))}
    if k < basis.dimension:
        dh = basis.complex.incidence_matrix(k + 1).T @ harm
        residuals["d_harmonic"] = float(np.max(np.abs(dh), initial=0.0))
    if orthogonality:
        M = mass_matrix(basis, metric).payload
        residuals["exact_remainder"] = float(exact @ M @ remainder)
        residuals["harmonic_remainder"] = float(harm @ M @ remainder)
    return HodgeSplit(
        DiscreteForm(basis, exact),
        DiscreteForm(basis, harm),
        DiscreteForm(basis, remainder),
        alpha,
        potential,
        residuals,
    )


# ---------------------------------------------------------------------------
# potential flow around a cylinder of unit radius


def cylinder_potential() -> AnalyticForm:
    """Single-valued part ``(r + 1/r) cos(theta)`` of the flow potential, Cartesian."""

    def phi(x, y):
        r2 = x**2 + y**2
        return x * (1.0 + 1.0 / r2)

    def vx(x, y):
        r2 = x**2 + y**2
        return 1.0 + (y**2 - x**2) / r2**2

    def vy(x, y):
        r2 = x**2 + y**2
        return -2.0 * x * y / r2**2

    zero2 = AnalyticForm(2, 2, (lambda x, y: 0.0 * x,))
    grad = AnalyticForm(2, 1, (vx, vy), zero2)
    return AnalyticForm(2, 0, (phi,), grad)


def cylinder_flow(gamma: float) -> AnalyticForm:
    """Velocity 1-form of uniform flow past the unit cylinder with circulation.

    Closed form: ``v = d[(r + 1/r) cos(theta) - gamma theta / (2 pi)]``, so the
    circulation along any loop around the cylinder traversed with increasing
    angle is ``-gamma``.
    """
    base = cylinder_potential().derivative
    g = float(gamma) / (2.0 * np.pi)

    def vx(x, y):
        return base.components[0](x, y) + g * y / (x**2 + y**2)

    def vy(x, y):
        return base.components[1](x, y) - g * x / (x**2 + y**2)

    zero2 = AnalyticForm(2, 2, (lambda x, y: 0.0 * x,))
    return AnalyticForm(2, 1, (vx, vy), zero2, f"cylinder_flow(gamma={gamma:g})")


def annulus_basis(order: int, radial_elements: int, angular_elements: int, degree: int = 1) -> TensorBasis:
    """Primal basis on the reference square with a periodic angular axis."""
    return TensorBasis((Axis.uniform(order, radial_elements), Axis.uniform(order, angular_elements, periodic=True)), degree)


def hole_flow_cochain(gamma: float, r_inner: float = 1.0, r_outer: float = 2.0, quad_order: int = 12) -> Cochain:
    """Reduction of the cylinder flow onto the 12 edges of the hole complex.

    The hole complex is the annulus grid with one radial and four angular
    cells, renumbered; the reduction is carried out on the annulus grid and
    mapped to the hole numbering.
    """
    hole = hole_complex()
    basis = annulus_basis(1, 1, 4)
    v = pullback(cylinder_flow(gamma), annulus_map(r_inner, r_outer))
    base = reduce(v, basis, quad_order).coefficients
    return Cochain(hole, 1, hole.from_base(base, 1))


@dataclass(frozen=True, eq=False)
class PotentialFlowResult:
    gamma: float
    cochain: DiscreteForm
    split: HodgeSplit
    circulation_pairing: float
    harmonic_norm: float
    alpha: float

    def to_json(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "circulation_pairing": self.circulation_pairing,
            "harmonic_norm": self.harmonic_norm,
            "cochain": [float(v) for v in self.cochain.coefficients],
            "split": self.split.to_json(),
        }


def potential_flow(
    gamma: float,
    order: int = 1,
    radial_elements: int = 1,
    angular_elements: int = 4,
    r_inner: float = 1.0,
    r_outer: float = 2.0,
    quad_order: int | None = None,
) -> PotentialFlowResult:
    """Reduce the cylinder flow on the mapped annulus grid and decompose it."""
    basis = annulus_basis(order, radial_elements, angular_elements)
    mapping = annulus_map(r_inner, r_outer)
    q = quad_order or order + 4
    v = pullback(cylinder_flow(gamma), mapping)
    df = DiscreteForm(basis, reduce(v, basis, q).coefficients)
    info = homology(basis.complex, 1)
    split = decompose(df, info, orthogonality=False)
    h_chain = info.harmonic_chain_basis[0]
    h_cochain = info.harmonic_cochain_basis[0]
    p = pairing(df.cochain, h_chain)
    norm = float(h_cochain.coefficients @ h_chain.coefficients)
    return PotentialFlowResult(float(gamma), df, split, float(p), norm, float(split.amplitudes[0]))

