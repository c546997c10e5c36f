"""
Two maximal functions on the conic surface
==========================================

Compares the convolution maximal function (a supremum over generalized
translations of characteristic profiles) with the Hardy-Littlewood maximal
function over intrinsic caps, on a fixed test battery and two grids.
Run with ``python3 demos/maximal_domination.py``.
"""

import math

from conic_fourier import (
    AdditionSpec,
    MaximalConfig,
    SampledFunction,
    battery,
    default_theta_grid,
    domination_experiment,
    hl_maximal,
    sample_points,
    script_maximal,
    surface_grid,
)

spec = AdditionSpec.surface(2, 0.5)
cfg = MaximalConfig.for_spec(spec, theta_grid=default_theta_grid(24, 16, 10), nodes_per_piece=6)
coarse, fine = surface_grid(2, 0.5, 40), surface_grid(2, 0.5, 60)

# For the constant function the Hardy-Littlewood maximal function is 1 and the
# convolution maximal function equals the normalizing constant of the
# Jacobi weight on [-1, 1].
one = SampledFunction.constant(1.0, "surface")
a = sample_points(spec, 1, 3)[0]
print(f"M(1)            = {hl_maximal(spec, one, a, cfg, coarse):.6f}")
print(f"convolution (1) = {script_maximal(spec, one, a, cfg, coarse):.6f}   "
      f"normalizing constant = {spec.params.c_prime:.6f}")

# The pointwise ratio stays bounded and does not drift when the grid is refined.
fs = battery(spec)
points = sample_points(spec, 10, 0)
rep = domination_experiment(spec, fs, points, cfg, [coarse, fine])
for level, name in zip(rep.levels, ("degree 40", "degree 60")):
    print(f"largest ratio on the {name} grid: {rep.max_ratio(level):.4f}")
print(f"ratio between levels: {rep.stability():.3f}")

worst = max(rep.rows, key=lambda r: r["ratio"] if math.isfinite(r["ratio"]) else -1)
print(f"largest ratio at point {worst['point']} for {worst['f']}")
