"""End-to-end acceptance checks, one group per criterion.

Every test also prints a ``criterion n: PASS|FAIL`` line (visible with ``-s``);
the terminal summary lists the aggregate status per criterion.
"""

import hashlib
import json
import math
import time

import numpy as np
import pytest
from scipy import special

from conic_fourier.cli import main, make_grid
from conic_fourier.expansion import partial_sum, project, projection_table
from conic_fourier.jacobi import (
    JacobiParams,
    eval_Zn,
    gauss_jacobi_rule,
    gegenbauer_Z,
    jacobi_norm,
    jacobi_table,
    z_table,
)
from conic_fourier.kernels import AdditionSpec, cesaro_coefficients, cesaro_kernel, poisson_kernel_closed
from conic_fourier.maximal import (
    MaximalConfig,
    battery,
    default_theta_grid,
    domination_experiment,
    multiplier_battery,
    sample_points,
    script_maximal,
)
from conic_fourier.expansion import SampledFunction
from conic_fourier.multipliers import (
    MultiplierSequence,
    UNIFORM,
    boundedness_experiment,
    marcinkiewicz_blocks,
    operator_norm_l2,
    thresholds,
)


def report(n, ok, detail=""):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


SURFACES = [AdditionSpec.surface(2, g) for g in (0.0, 0.5, 2.0)]
SOLIDS = [AdditionSpec.solid(2, 0.5, mu) for mu in (0.0, 1.0)]


# ------------------------------------------------------------------------ 1


@pytest.mark.criterion(1)
def test_jacobi_gram_and_quadratic_transformation():
    start = time.perf_counter()
    worst_gram = 0.0
    for a, b in ((0.0, 0.0), (1.5, -0.5), (2.5, -0.5)):
        p = JacobiParams(a, b)
        h = np.array([jacobi_norm(n, p) for n in range(21)])
        # our rule and table, and an independent scipy rule and evaluation
        rule = gauss_jacobi_rule(30, p)
        P = jacobi_table(20, p, rule.nodes)
        x, w = special.roots_jacobi(30, a, b)
        Q = np.array([special.eval_jacobi(n, a, b, x) for n in range(21)])
        for G in ((P * rule.weights) @ P.T, (Q * (w / w.sum())) @ Q.T):
            worst_gram = max(worst_gram, float(np.max(np.abs(G - np.diag(h)))))
    theta = np.linspace(0, math.pi, 200)
    worst_qt = 0.0
    for a in (0.5, 1.5, 2.5):
        for n in range(16):
            lhs = eval_Zn(n, JacobiParams(a, -0.5), np.cos(2 * theta))
            rhs = gegenbauer_Z(2 * n, a + 0.5, np.cos(theta))
            worst_qt = max(worst_qt, float(np.max(np.abs(lhs - rhs)) / max(1.0, abs(rhs[0]))))
    elapsed = time.perf_counter() - start
    report(1, worst_gram < 1e-10 and worst_qt < 1e-11 and elapsed < 10,
           f"gram={worst_gram:.2e} quadratic={worst_qt:.2e} time={elapsed:.2f}s")


# ------------------------------------------------------------------------ 2


@pytest.mark.criterion(2)
def test_poisson_closed_form():
    start = time.perf_counter()
    t = np.linspace(-1, 1, 500)
    worst, lowest = 0.0, math.inf
    for a, b in ((1.0, -0.5), (2.5, -0.5), (1.0, 0.5), (2.5, 1.0)):
        p = JacobiParams(a, b)
        Z = z_table(int(math.log(1e-18) / math.log(0.95)) + 50, p, t)
        for r in (0.3, 0.6, 0.9, 0.95):
            N = int(math.log(1e-18) / math.log(r)) + 50
            terms = r ** np.arange(N + 1)
            series = terms @ Z[: N + 1]
            scale = np.maximum(1.0, terms @ np.abs(Z[: N + 1]))
            closed = poisson_kernel_closed(p, r, t)
            worst = max(worst, float(np.max(np.abs(closed - series) / scale)))
            lowest = min(lowest, float(closed.min()))
    elapsed = time.perf_counter() - start
    report(2, worst < 1e-10 and lowest >= -1e-12 and elapsed < 30,
           f"max scaled error={worst:.2e} min={lowest:.3e} time={elapsed:.2f}s")


# -------------------------------------------------------------------- 3 & 4


def _reproducing_suite(random_poly, spec, max_degree, grid_degree, seed):
    grid = make_grid(spec, grid_degree)
    pts = sample_points(spec, 50, seed)
    worst_rep, worst_orth = 0.0, 0.0
    for m in range(max_degree + 1):
        f = random_poly(spec.kind, spec.d, m, seed + m)
        exact = f.at(pts)
        for N in sorted({m, max_degree}):
            worst_rep = max(worst_rep, float(np.max(np.abs(partial_sum(spec, f, N, pts, grid) - exact))))
        # a member of the level-m space, carried as grid values
        g = projection_table(spec, f, max_degree, None, grid).values[m]
        parts = projection_table(spec, g, max_degree, pts, grid).values
        g_pts = project(spec, f, m, pts, grid)
        worst_rep = max(worst_rep, float(np.max(np.abs(parts[m] - g_pts))))
        others = [n for n in range(max_degree + 1) if n != m]
        worst_orth = max(worst_orth, float(np.max(np.abs(parts[others]))))
    return worst_rep, worst_orth


@pytest.mark.criterion(3)
@pytest.mark.parametrize("spec", SURFACES, ids=lambda s: f"gamma{s.gamma}")
def test_surface_reproduction(spec, make_poly):
    start = time.perf_counter()
    rep, orth = _reproducing_suite(make_poly, spec, 8, 16, 11)
    elapsed = time.perf_counter() - start
    report(3, rep < 1e-8 and orth < 1e-8 and elapsed < 300,
           f"gamma={spec.gamma} reproduce={rep:.2e} cross-level={orth:.2e} time={elapsed:.1f}s")


@pytest.mark.criterion(4)
@pytest.mark.parametrize("spec", SOLIDS, ids=lambda s: f"mu{s.mu}")
def test_solid_reproduction(spec, make_poly):
    start = time.perf_counter()
    rep, orth = _reproducing_suite(make_poly, spec, 6, 12, 23)
    elapsed = time.perf_counter() - start
    report(4, rep < 1e-7 and orth < 1e-7 and elapsed < 600,
           f"mu={spec.mu} reproduce={rep:.2e} cross-level={orth:.2e} time={elapsed:.1f}s")


# ------------------------------------------------------------------------ 5


CESARO_SPECS = [AdditionSpec.surface(2, 0.5), AdditionSpec.surface(3, 0.0), AdditionSpec.solid(2, 0.5, 0.0),
                AdditionSpec.solid(2, 0.5, 1.0)]


@pytest.mark.criterion(5)
@pytest.mark.parametrize("spec", CESARO_SPECS, ids=lambda s: f"{s.kind}_d{s.d}_g{s.gamma}_mu{s.mu}")
def test_cesaro_positivity(spec):
    p = spec.params
    t = np.linspace(-1, 1, 2000)
    lowest = min(float(cesaro_kernel(p, n, p.alpha + p.beta + 2, t).min()) for n in range(61))
    report(5, lowest >= -1e-10, f"{spec.kind} alpha={p.alpha} kernel min={lowest:.3e}")


@pytest.mark.criterion(5)
@pytest.mark.parametrize("spec", [AdditionSpec.surface(2, 0.5), AdditionSpec.solid(2, 0.5, 1.0)],
                         ids=lambda s: s.kind)
def test_cesaro_contraction(spec):
    p = spec.params
    delta = max(p.alpha, p.beta) + 0.6
    polys = [f for f in battery(spec) if f.degree is not None]
    # the battery polynomials have degree <= 6, so levels above 6 vanish
    grid = make_grid(spec, 14)
    dense = make_grid(spec, 60 if spec.kind == "surface" else 30)
    worst = 0.0
    for f in polys:
        table = projection_table(spec, f, 6, (dense.x, dense.t), grid)
        sup_f = float(np.max(np.abs(f.on(dense))))
        for n in range(41):
            sup_s = float(np.max(np.abs(table.multiplier(cesaro_coefficients(n, delta)[:7]))))
            worst = max(worst, sup_s / sup_f)
    report(5, worst <= 1 + 1e-6, f"{spec.kind} delta={delta} max sup ratio={worst:.6f}")


# ------------------------------------------------------------------------ 6


# below degree 30 the solid grid misses the small apex cap of the battery entirely
DOMINATION = [
    (AdditionSpec.surface(2, 0.5), (40, 60)),
    (AdditionSpec.solid(2, 0.5, 1.0), (30, 40)),
]


@pytest.mark.criterion(6)
@pytest.mark.parametrize("spec,levels", DOMINATION, ids=lambda v: getattr(v, "kind", ""))
def test_maximal_domination(spec, levels):
    grids = [make_grid(spec, g) for g in levels]
    mcfg = MaximalConfig.for_spec(spec, theta_grid=default_theta_grid(24, 16, 10), nodes_per_piece=6)
    rep = domination_experiment(spec, battery(spec), sample_points(spec, 25, 0), mcfg, grids)
    maxima = [rep.max_ratio(l) for l in rep.levels]
    ok = len(maxima) == 2 and all(np.isfinite(maxima)) and rep.stability() < 2
    report(6, ok, f"{spec.kind} max ratios={[round(m, 4) for m in maxima]} stability={rep.stability():.3f} "
                  f"dropped={rep.dropped} unresolved={rep.unresolved}")


@pytest.mark.criterion(6)
@pytest.mark.parametrize("spec", [AdditionSpec.surface(2, 0.5), AdditionSpec.solid(2, 0.5, 1.0)],
                         ids=lambda s: s.kind)
def test_maximal_of_constant(spec):
    grid = make_grid(spec, 24)
    mcfg = MaximalConfig.for_spec(spec)
    one = SampledFunction.constant(1.0, spec.kind)
    values = np.array([script_maximal(spec, one, a, mcfg, grid) for a in sample_points(spec, 25, 0)])
    p = spec.params
    err = float(np.max(np.abs(values - p.c)))
    report(6, err < 1e-8, f"{spec.kind} M(1) in [{values.min():.12f}, {values.max():.12f}] "
                          f"c={p.c:.12f} c'={p.c_prime:.12f} |M(1)-c|={err:.3e}")


# ------------------------------------------------------------------------ 7


@pytest.mark.criterion(7)
def test_maximal_cesaro_domination():
    spec = AdditionSpec.surface(2, 0.5)
    delta = spec.gamma + spec.d - 1 + 0.1
    grids = [make_grid(spec, 80), make_grid(spec, 120)]
    mcfg = MaximalConfig.for_spec(spec, theta_grid=default_theta_grid(24, 16, 10), nodes_per_piece=6)
    rep = domination_experiment(spec, battery(spec), sample_points(spec, 25, 0), mcfg, grids,
                                numerator="cesaro", denominator="script", delta=delta, N=40)
    maxima = [rep.max_ratio(l) for l in rep.levels]
    ok = len(maxima) == 2 and all(np.isfinite(maxima)) and rep.stability() < 2
    report(7, ok, f"delta={delta} max ratios={[round(m, 4) for m in maxima]} stability={rep.stability():.3f}")


# ------------------------------------------------------------------------ 8


@pytest.mark.criterion(8)
@pytest.mark.parametrize("spec", [AdditionSpec.surface(2, 0.5), AdditionSpec.solid(2, 0.5, 1.0)],
                         ids=lambda s: s.kind)
def test_l2_anchor(spec):
    grid = make_grid(spec, 12)
    mu = np.random.default_rng(8).uniform(-2, 2, 7)
    err = abs(operator_norm_l2(spec, mu, 6, grid) - np.max(np.abs(mu)))
    report(8, err < 1e-6, f"{spec.kind} |norm - max|mu||={err:.2e}")


@pytest.mark.criterion(8)
def test_riesz_uniform():
    spec = AdditionSpec.surface(2, 0.5)
    k = thresholds(spec)["domain"]
    Ns = [8, 16, 32, 64]
    grid = make_grid(spec, 2 * max(Ns))
    family = {"riesz": lambda N: MultiplierSequence.riesz(N, k)}
    fs = multiplier_battery(spec)
    table = boundedness_experiment(spec, family, fs, [1.5, 2.0, 4.0], Ns, grid, k=k)
    # the constant function pins the battery maximum at 1; repeat without polynomials
    rough = boundedness_experiment(spec, family, [f for f in fs if f.degree is None], [1.5, 2.0, 4.0], Ns, grid, k=k)
    worst = max(v["variation"] for v in table.verdicts)
    worst_rough = max(v["variation"] for v in rough.verdicts)
    ok = all(v["verdict"] == UNIFORM for v in table.verdicts + rough.verdicts)
    report(8, ok, f"k={k} worst variation={worst:.3f} (non-polynomial battery {worst_rough:.3f})")


@pytest.mark.criterion(8)
def test_alternating_blocks_grow():
    spec = AdditionSpec.surface(2, 0.5)
    k = thresholds(spec)["domain"]
    blocks = marcinkiewicz_blocks(MultiplierSequence.alternating(), k, 6)
    growth = blocks[1:] / blocks[:-1]
    report(8, bool(np.all(growth >= 4)), f"blocks={blocks.tolist()} min growth={growth.min():.2f}")


# ------------------------------------------------------------------------ 9


@pytest.mark.criterion(9)
def test_selftest_bit_identical(tmp_path):
    digests = []
    for run in ("first", "second"):
        out = tmp_path / run
        assert main(["selftest", "--out", str(out), "--seed", "7"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        files = {a["file"]: hashlib.sha256((out / a["file"]).read_bytes()).hexdigest()
                 for a in manifest["artifacts"]}
        manifest.pop("wall_time_s")
        digests.append((files, manifest))
    same = digests[0] == digests[1]
    report(9, same, f"artifacts={sorted(digests[0][0])}")
