"""
Reduction, reconstruction and convergence
=========================================

Integral degrees of freedom on Gauss-Lobatto grids, compared with the
best L2 fit, and measured convergence rates.
"""

import numpy as np

from msem.basis import Axis, TensorBasis
from msem.mimetic import AnalyticForm, convergence_study, galerkin_projection, project, reduce

# %%
# The 1-form x^3 dx on the nodes -1, 0, 1: the cochain holds the two edge
# integrals.
cubic = AnalyticForm(1, 1, (lambda x: x**3,))
edges = TensorBasis((Axis(2),), 1)
print("reduction:", reduce(cubic, edges).coefficients)

# %%
# The L2-best approximation in the same space has different coefficients, so
# reducing it again does not give back the integrals of x^3.
g = galerkin_projection(cubic, edges)
print("L2 fit coefficients:", g.coefficients)
print("integrals of the L2 fit:", reduce(g.as_form(), edges).coefficients)
print("integrals of the projection:", reduce(project(cubic, edges).as_form(), edges).coefficients)

# %%
# h-refinement at fixed polynomial order: nodal interpolation of sin(pi x)
# converges at order p + 1, edge interpolation of its derivative at order p.
zero = AnalyticForm(1, 0, (lambda x: np.sin(np.pi * x),))
one = AnalyticForm(1, 1, (lambda x: np.pi * np.cos(np.pi * x),))
for p in (1, 2, 3):
    z = convergence_study(zero, [p], [4, 8, 16, 32])
    e = convergence_study(one, [p], [4, 8, 16, 32])
    print(f"p={p}: 0-form orders {[round(r.observed_order, 2) for r in z[1:]]}, "
          f"1-form orders {[round(r.observed_order, 2) for r in e[1:]]}")

# %%
# p-refinement on a single element converges faster than any power.
for row in convergence_study(zero, [4, 8, 12, 16], [1]):
    print(f"N={row.order:2d}  L2 error {row.l2_error:.2e}")
