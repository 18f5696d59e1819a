"""
Radiated fields of point and Gaussian sources
=============================================

Closed-form fields for monopoles and dipoles, then midpoint quadrature for a
Gaussian source on successively finer triangular meshes.
"""

import math

import numpy as np

from helmsource import Rectangle, aperture_geometry, make_gaussian_config, make_point_config, triangulate_square
from helmsource.forward import far_field_gaussian, far_field_point, near_field_point

k = 6.0

# a monopole radiates with constant far-field modulus |lambda|
mono = make_point_config([2.0], [(0, 0)], [(1.0, -0.5)])
xhat = aperture_geometry("far", "S1").observation_points()
print("monopole |u_inf| over 80 directions:", np.ptp(np.abs(far_field_point(mono, xhat, k))), "spread")

# a dipole is silent in the directions orthogonal to xi
dip = make_point_config([0.0], [(1.0, 0.0)], [(0.0, 0.0)])
for theta in (0.0, math.pi / 4, math.pi / 2):
    d = np.array([math.cos(theta), math.sin(theta)])
    print(f"dipole far field at theta={theta:.3f}: |u_inf| = {abs(far_field_point(dip, d, k)):.4f}")

# near field on the measurement circle
x = aperture_geometry("near", "S1").observation_points()
u = near_field_point(mono, x, k)
print("near field on R=6.5, first 3 points:", np.round(u[:3], 5))

# Gaussian source: the far field is a Fourier transform, known in closed form
# when the Gaussian sits well inside the square
g = make_gaussian_config([3.0], [2.5], [(0.0, 0.0)])
exact = 3 * math.pi / 2.5 * math.exp(-k * k / (4 * 2.5))
d = np.array([[1.0, 0.0]])
print("\nmesh h    triangles   |error|")
for h in (0.48, 0.24, 0.12, 0.06):
    mesh = triangulate_square(Rectangle(), h)
    approx = far_field_gaussian(g, mesh, d, k)[0]
    print(f"{h:6.2f}  {len(mesh.areas):10d}   {abs(approx - exact):.2e}")
# the integrand is smooth and negligible on the boundary, so the centroid rule
# converges far faster than its nominal second order
