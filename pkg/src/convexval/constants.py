"""Global numeric tolerances.

Kept in one place so that geometry, quadrature and the checkers agree on
what "equal" means.
"""

# incidence / feasibility / vertex dedup, relative to the problem scale
GEOM_TOL = 1e-9
# orthogonality of rotation matrices
ORTHO_TOL = 1e-12
# quadrature target (relative)
QUAD_TOL = 1e-10
# identity assertions (valuation identity, homogeneity, decomposition)
IDENTITY_TOL = 1e-8
# routes that go through numerical differentiation
DERIV_TOL = 1e-6
# centered-difference step for the profile derivative
FD_STEP = 1e-6

# volume of the unit k-ball, k = 0..3
KAPPA = (1.0, 2.0, 3.141592653589793, 4.0 * 3.141592653589793 / 3.0)
