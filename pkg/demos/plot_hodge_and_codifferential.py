"""
Hodge star on staggered grids and the codifferential
=====================================================

The star maps primal forms to the interior dual grid. Composing it with the
derivative gives the codifferential, which matches a closed-form stencil.
"""

import numpy as np

from msem.basis import Axis, TensorBasis, tensor_basis
from msem.mimetic import DiscreteForm
from msem.operators import codifferential, codifferential_matrix, hodge_star, star_d_star_matrix

# %%
# star star = (-1)^(k(n-k)) on 1-forms in 2D.
rng = np.random.default_rng(0)
b = tensor_basis(2, 1, "primal", 3)
u = DiscreteForm(b, rng.normal(size=b.size))
print("max |** u + u| =", np.abs(hodge_star(hodge_star(u)).coefficients + u.coefficients).max())

# %%
# The codifferential of 1D edge forms from the stencil and from star d star,
# for two placements of the dual grid.
N = 4
direct = codifferential_matrix(N).toarray()
edges = TensorBasis((Axis(N),), 1)
for dual in ("dual_interior", "dual"):
    route = star_d_star_matrix(edges, dual=dual).toarray()
    print(f"{dual:14s} max difference {np.abs(route - direct).max():.1e}")
print("stencil for N = 2:\n", codifferential_matrix(2).toarray())

# %%
# Applying the codifferential twice to an area form gives zero to rounding.
w = DiscreteForm(b.with_degree(2), rng.normal(size=b.with_degree(2).size))
print("max |codiff codiff w| =", np.abs(codifferential(codifferential(w)).coefficients).max())
