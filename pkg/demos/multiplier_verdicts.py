"""
Multiplier sequences and their L^p behaviour
============================================

Riesz means ``(1 - j/N)^k`` satisfy the Marcinkiewicz difference condition at
the order fixed by the domain; the alternating sequence ``(-1)^j`` does not.
The harness measures ``||T_mu f||_p / ||f||_p`` over a test battery.
Run with ``python3 demos/multiplier_verdicts.py``.
"""

import numpy as np

from conic_fourier import (
    AdditionSpec,
    MultiplierSequence,
    boundedness_experiment,
    marcinkiewicz_blocks,
    multiplier_battery,
    operator_norm_l2,
    surface_grid,
    thresholds,
)

spec = AdditionSpec.surface(2, 0.5)
th = thresholds(spec)
k = th["domain"]
print(f"difference order: general {th['general']}, domain {k}")

# On L^2 the operator norm of a multiplier is its largest coefficient.
grid = surface_grid(2, 0.5, 12)
mu = np.array([1.0, -0.3, 0.8, 2.0, -1.5, 0.1, 0.4])
print(f"L^2 norm {operator_norm_l2(spec, mu, 6, grid):.8f} vs max|mu| {np.max(np.abs(mu)):.8f}")

# Dyadic blocks of the difference condition.
for seq in (MultiplierSequence.riesz(64, k), MultiplierSequence.alternating()):
    blocks = marcinkiewicz_blocks(seq, k, 6)
    print(f"{seq.name:>16}: " + " ".join(f"{b:8.2f}" for b in blocks))

# Empirical L^p ratios as the truncation N grows.
Ns = [8, 16, 32]
grid = surface_grid(2, 0.5, 2 * max(Ns))
families = {
    "riesz": lambda N: MultiplierSequence.riesz(N, k),
    "alternating": lambda N: MultiplierSequence.alternating(),
}
table = boundedness_experiment(spec, families, multiplier_battery(spec), [1.5, 2.0, 4.0], Ns, grid, k=k)
for v in table.verdicts:
    maxima = " ".join(f"{m:7.3f}" for m in v["maxima"])
    print(f"{v['sequence']:>12} p={v['p']}: {maxima}   {v['verdict']}")
