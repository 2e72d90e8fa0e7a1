"""
Potential flow around a cylinder
================================

Uniform flow past a unit cylinder with circulation, reduced on an annulus
and split into an exact and a harmonic part.
"""

from msem.hodge import hole_flow_cochain, harmonic_amplitudes, potential_flow
from msem.topology import hole_complex, homology, pairing

# %%
# On the twelve edges of the hole complex the harmonic amplitude is a quarter
# of the circulation strength and the pairing with the loop is twice it.
info = homology(hole_complex(), 1)
for gamma in (0.0, 1.0, 4.0, 10.0):
    c = hole_flow_cochain(gamma)
    alpha = harmonic_amplitudes(c, info)[0]
    print(f"gamma={gamma:5.1f}  alpha={alpha:.12f}  pairing={pairing(c, info.harmonic_chain_basis[0]):.12f}")

# %%
# On finer annulus grids the harmonic chain runs around every angular loop,
# so the pairing is the circulation times the number of loops; the amplitude
# depends on the normalization of the harmonic cochain.
for order, radial in [(1, 1), (2, 2), (3, 2)]:
    res = potential_flow(4.0, order, radial, 8, quad_order=12)
    loops = order * radial + 1
    print(f"N={order} radial={radial}: pairing/loops={res.circulation_pairing / loops:+.10f}, "
          f"remainder {abs(res.split.remainder.coefficients).max():.1e}")
