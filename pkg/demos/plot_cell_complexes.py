"""
Cell complexes, incidence matrices and homology
===============================================

A 2x2 grid of faces, its incidence matrices and a complex with a hole.
"""

import numpy as np

from msem.topology import annulus_complex, build_complex, dual_complex, hole_complex, homology

# %%
# Nine nodes, twelve edges and four faces. Cells are numbered with the last
# axis running fastest.
grid = build_complex(2, [2, 2])
print("cell counts:", grid.cell_counts)

E01 = grid.incidence_matrix(1).toarray()
E12 = grid.incidence_matrix(2).toarray()
print("E01 =\n", E01)
print("E12 =\n", E12)

# %%
# The boundary of a boundary vanishes, exactly, in integer arithmetic.
print("max |E01 E12| =", np.abs(E01 @ E12).max())

# %%
# The dual grid has a cell for every primal cell plus boundary cells.
dual = dual_complex(grid)
print("dual cell counts:", dual.cell_counts)

# %%
# An annulus grid has one independent loop. The harmonic chain winds around
# the hole; on the hole complex it has the familiar +-1 pattern.
for name, cx in [("annulus 2x6", annulus_complex(2, 6)), ("hole", hole_complex())]:
    betti = [homology(cx, k).betti_number for k in range(3)]
    print(name, "betti numbers:", betti)

print("harmonic chain:", homology(hole_complex(), 1).harmonic_chain_basis[0].coefficients)
