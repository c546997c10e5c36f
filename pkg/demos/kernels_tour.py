"""
A tour of the kernels on the conic surface
==========================================

Reproducing kernels, Poisson kernels and Cesaro kernels on the
two-dimensional conic surface ``||x|| = t`` with weight ``(1 - t)^gamma``.
Run with ``python3 demos/kernels_tour.py``.
"""

import math

import numpy as np

from conic_fourier import (
    AdditionSpec,
    SampledFunction,
    SurfacePoint,
    cesaro_kernel,
    jacobi_series,
    partial_sum,
    poisson_kernel_closed,
    reproducing_kernel,
    surface_grid,
)

spec = AdditionSpec.surface(2, 0.5)
p = spec.params
print(f"surface d=2, gamma=1/2 -> Jacobi parameters ({p.alpha}, {p.beta})")

# The degree-n kernel at a point against itself grows with n, while the
# kernel between two far apart points stays small.
a = SurfacePoint.polar(0.5, 0.0)
b = SurfacePoint.polar(0.9, math.pi)
for n in (0, 2, 4, 8):
    print(f"  P_{n}(a, a) = {reproducing_kernel(spec, n, a, a):9.3f}   "
          f"P_{n}(a, b) = {reproducing_kernel(spec, n, a, b):8.3f}")

# A polynomial is reproduced exactly by its partial sum once the truncation
# reaches its degree.  An exact grid of degree 2N makes the integrals exact.
f = SampledFunction(lambda X, T: 1 + X[:, 0] * T - 2 * T**3, "surface", "cubic", 3)
grid = surface_grid(2, 0.5, 6)
pts = [a, b, SurfacePoint.polar(0.3, 2.0)]
for N in (1, 2, 3):
    err = np.max(np.abs(partial_sum(spec, f, N, pts, grid) - f.at(pts)))
    print(f"  |S_{N} f - f| = {err:.2e}")

# The Poisson kernel has a closed form; the truncated series agrees with it.
t = np.linspace(-1, 1, 7)
r = 0.6
closed = poisson_kernel_closed(p, r, t)
series = jacobi_series(r ** np.arange(120), p, t)
print("  Poisson kernel at r=0.6:", np.round(closed, 4))
print(f"  closed form vs series: {np.max(np.abs(closed - series)):.1e}")

# Cesaro kernels become nonnegative once delta reaches alpha + beta + 2.
tt = np.linspace(-1, 1, 2000)
for delta in (0.5, 1.5, p.alpha + p.beta + 2):
    low = min(cesaro_kernel(p, n, delta, tt).min() for n in range(0, 41, 4))
    print(f"  delta={delta:.1f}: smallest Cesaro kernel value {low:+.3e}")
