"""
Quadratic finite elements on the unit square
============================================

Build the P2 vector space, check the mass and stiffness matrices on a
smooth field, and evaluate the skew-symmetric convection form.
"""

import numpy as np

from vmspod.fe_core import build_space, h1_semi_inner, l2_inner, trilinear

space = build_space(16)
print("triangles:", space.mesh.triangles.shape[0], " velocity dofs:", space.n_dof)

# sin(pi x) sin(pi y) in the first component: ||u||^2 = 1/4, |u|_1^2 = pi^2/2
u = space.interpolate(lambda x, y, t: (np.sin(np.pi * x) * np.sin(np.pi * y), 0 * x))
print("L2 norm^2  %.8f  (exact 0.25)" % l2_inner(u, u))
print("H1 semi^2  %.8f  (exact %.8f)" % (h1_semi_inner(u, u), np.pi ** 2 / 2))

# b*(u, v, v) vanishes for any u, v
rng = np.random.default_rng(1)
a, b = (space.interpolate(lambda x, y, t, c=c: (np.cos(c * x * y), x - y * c)) for c in rng.uniform(1, 3, 2))
print("b*(a, b, b) =", trilinear(a, b, b))
print("b*(a, b, a) = %.6e" % trilinear(a, b, a))
