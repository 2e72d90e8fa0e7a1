"""Mimetic spectral element discretizations of differential forms.

Submodules: ``nodes`` (quadrature), ``topology`` (cell complexes and chains),
``basis`` (Lagrange and edge polynomials), ``mimetic`` (reduction and
projections), ``operators`` (d, Hodge star, wedge, mass matrices, traces),
``hodge`` (Hodge decomposition), ``mapping`` (curvilinear maps) and ``cli``.
"""

from .basis import Axis, AxisRole, Basis1D, TensorBasis, basis1d, edge_eval, lagrange_deriv, lagrange_eval, tensor_basis
from .hodge import HodgeSplit, decompose, harmonic_amplitude, harmonic_amplitudes, potential_flow, solve_coboundary
from .mapping import Mapping, annulus_map, named_map, pullback, pullback_commutes_d_check, pushforward, transformed_hodge
from .mimetic import AnalyticForm, DiscreteForm, coproject, project, rebase, reconstruct, reduce, reduce_tensor_cell
from .nodes import NodeKind, legendre, nodeset
from .operators import (
    codifferential,
    codifferential_matrix,
    exterior_derivative,
    hodge_star,
    mass_matrix,
    trace_form,
    wedge_h,
)
from .topology import (
    CellComplex,
    Chain,
    Cochain,
    boundary,
    build_complex,
    coboundary,
    dual_complex,
    hole_complex,
    homology,
    incidence,
    pairing,
    tensor_product_chain,
    trace_cochain,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticForm",
    "Axis",
    "AxisRole",
    "Basis1D",
    "CellComplex",
    "Chain",
    "Cochain",
    "DiscreteForm",
    "HodgeSplit",
    "Mapping",
    "NodeKind",
    "TensorBasis",
    "annulus_map",
    "basis1d",
    "boundary",
    "build_complex",
    "coboundary",
    "codifferential",
    "codifferential_matrix",
    "coproject",
    "decompose",
    "dual_complex",
    "edge_eval",
    "exterior_derivative",
    "harmonic_amplitude",
    "harmonic_amplitudes",
    "hodge_star",
    "hole_complex",
    "homology",
    "incidence",
    "lagrange_deriv",
    "lagrange_eval",
    "legendre",
    "mass_matrix",
    "named_map",
    "nodeset",
    "pairing",
    "potential_flow",
    "project",
    "pullback",
    "pullback_commutes_d_check",
    "pushforward",
    "rebase",
    "reconstruct",
    "reduce",
    "reduce_tensor_cell",
    "solve_coboundary",
    "tensor_basis",
    "tensor_product_chain",
    "trace_cochain",
    "trace_form",
    "transformed_hodge",
    "wedge_h",
]
