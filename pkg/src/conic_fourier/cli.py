"""Command-line runner: ``conic-fourier COMMAND [--config PATH] [--out DIR] ...``.

Exit codes: 0 success, 2 configuration or parameter error, 3 resolution
error, 4 numeric failure (including failed checks).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig, load_config
from .errors import ConicError, NumericError
from .expansion import (
    SampledFunction,
    _projections,
    lp_norm,
    partial_sum,
    project,
    projection_table,
    translation_coefficients,
)
from .geometry import (
    distance_solid,
    distance_surface,
    sample_solid,
    sample_surface,
    solid_grid,
    surface_grid,
)
from .jacobi import (
    JacobiParams,
    eval_Zn,
    gauss_jacobi_rule,
    gegenbauer_Z,
    jacobi_norm,
    jacobi_series,
    jacobi_table,
    z_table,
)
from .kernels import AdditionSpec, cesaro_coefficients, cesaro_kernel, poisson_kernel_closed, reproducing_kernel
from .maximal import (
    MaximalConfig,
    battery,
    default_theta_grid,
    domination_experiment,
    hl_maximal,
    multiplier_battery,
    sample_points,
    script_maximal,
)
from .multipliers import (
    MultiplierSequence,
    boundedness_experiment,
    marcinkiewicz_blocks,
    operator_norm_l2,
    thresholds,
)

COMMANDS = ("kernel-check", "summability", "maximal-compare", "multiplier-verdict", "selftest")


def make_grid(spec: AdditionSpec, degree: int):
    if spec.kind == "surface":
        return surface_grid(spec.d, spec.gamma, degree)
    return solid_grid(spec.d, spec.gamma, spec.mu, degree)


def random_polynomial(spec: AdditionSpec, degree: int, rng: np.random.Generator,
                      homogeneous: bool = False) -> SampledFunction:
    """Random combination of monomials ``x^a t^j`` of total degree ``<= degree``."""
    d = spec.d
    terms = []
    for total in range(degree + 1):
        if homogeneous and total != degree:
            continue
        for exps in _compositions(total, d + 1):
            terms.append((np.array(exps[:d]), exps[d], rng.standard_normal()))

    def ev(X, T):
        out = np.zeros(T.shape)
        for a, j, c in terms:
            out += c * np.prod(X ** a, axis=1) * T**j
        return out

    return SampledFunction(ev, spec.kind, f"poly{degree}", degree)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check(rows, name, value, tol):
    ok = bool(np.isfinite(value) and value <= tol)
    rows.append((name, float(value), float(tol), ok))
    return ok


# ----------------------------------------------------------------- commands


def cmd_kernel_check(cfg: ExperimentConfig, out: Path):
    spec = cfg.spec()
    N = cfg.truncation
    grid = make_grid(spec, max(cfg.degree, 2 * N))
    rng = np.random.default_rng(cfg.seed)
    pts = sample_points(spec, cfg.n_points, cfg.seed)
    rows = []
    f = random_polynomial(spec, N, rng)
    _check(rows, "reproduce_degree_N", np.max(np.abs(partial_sum(spec, f, N, pts, grid) - f.at(pts))), cfg.tolerance)
    if N >= 1:
        g = random_polynomial(spec, N - 1, rng)
        _check(rows, "level_N_of_degree_N-1", np.max(np.abs(project(spec, g, N, pts, grid))), cfg.tolerance)
    one = SampledFunction.constant(1.0, spec.kind)
    tab = projection_table(spec, one, min(N, 12), pts, grid)
    ref = np.zeros_like(tab.values)
    ref[0] = 1.0
    _check(rows, "kernel_unit_mass", np.max(np.abs(tab.values - ref)), cfg.tolerance)
    a, b = pts[0], pts[1]
    sym = max(abs(reproducing_kernel(spec, n, a, b) - reproducing_kernel(spec, n, b, a)) for n in range(N + 1))
    _check(rows, "kernel_symmetry", sym, 1e-12)
    p = spec.params
    t = np.linspace(-1, 1, 201)
    for r in (0.3, 0.6, 0.9):
        n_terms = int(math.log(1e-17) / math.log(r)) + 40
        terms = r ** np.arange(n_terms + 1)
        Z = z_table(n_terms, p, t)
        # cancellation in the series at t = -1 is bounded by sum |Z_k| r^k
        scale = np.maximum(1.0, terms @ np.abs(Z))
        err = np.max(np.abs(poisson_kernel_closed(p, r, t) - terms @ Z) / scale)
        _check(rows, f"poisson_closed_vs_series_r{r}", err, 1e-10)
    delta = p.alpha + p.beta + 2
    tt = np.linspace(-1, 1, 2000)
    low = min(float(np.min(cesaro_kernel(p, n, delta, tt))) for n in range(0, 61, 5))
    _check(rows, "cesaro_kernel_min_negated", -low, 1e-10)
    _write_rows(out / "kernel_check.csv", ["check", "value", "tolerance", "passed"], rows)
    return ["kernel_check.csv"], all(r[3] for r in rows), {"checks": {r[0]: r[3] for r in rows}}


def cmd_summability(cfg: ExperimentConfig, out: Path):
    spec = cfg.spec()
    n = cfg.cesaro_n
    grid = make_grid(spec, max(cfg.degree, 2 * n))
    fs = battery(spec, cfg.battery)
    delta = cfg.cesaro_delta
    p = spec.params
    F = np.column_stack([f.on(grid) for f in fs])
    vals, _, _ = _projections(spec, F, n, None, grid)
    rows = []
    ops = [(f"cesaro_delta{delta:g}", cesaro_coefficients(n, delta)),
           (f"cesaro_delta{p.alpha + p.beta + 2:g}", cesaro_coefficients(n, p.alpha + p.beta + 2)),
           ("poisson_r0.5", 0.5 ** np.arange(n + 1))]
    for th in (math.pi / 4, math.pi / 2):
        ops.append((f"translate_theta{th:.6f}", translation_coefficients(spec, th, n)))
    for name, coeffs in ops:
        res = np.tensordot(coeffs, vals, axes=(0, 0))
        for i, f in enumerate(fs):
            sup_ratio = float(np.max(np.abs(res[:, i])) / np.max(np.abs(F[:, i])))
            rows.append((name, f.name, sup_ratio, float(np.min(res[:, i]))))
    _write_rows(out / "summability.csv", ["operator", "f", "sup_ratio", "min_value"], rows)
    return ["summability.csv"], True, {}


def _domination(spec, fs, pts, mcfg, grids, workers, **kw):
    def one(item):
        i, a = item
        rep = domination_experiment(spec, fs, [a], mcfg, grids, **kw)
        for r in rep.rows:
            r["point"] = i
        return rep

    items = list(enumerate(pts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reps = list(pool.map(one, items))
    else:
        reps = [one(it) for it in items]
    total = reps[0]
    for rep in reps[1:]:
        total.rows.extend(rep.rows)
        for lvl, cnt in rep.dropped.items():
            total.dropped[lvl] = total.dropped.get(lvl, 0) + cnt
    return total


def cmd_maximal_compare(cfg: ExperimentConfig, out: Path):
    spec = cfg.spec()
    grids = [make_grid(spec, cfg.degree), make_grid(spec, cfg.degree_fine)]
    mcfg = MaximalConfig.for_spec(spec, theta_grid=default_theta_grid(cfg.theta_geometric, cfg.theta_linear,
                                                                      cfg.theta_depth),
                                  nodes_per_piece=cfg.nodes_per_piece)
    pts = sample_points(spec, cfg.n_points, cfg.seed)
    fs = battery(spec, cfg.battery)
    rep = _domination(spec, fs, pts, mcfg, grids, _workers(cfg))
    rep.to_csv(out / "domination.csv")
    one = SampledFunction.constant(1.0, spec.kind)
    const = [script_maximal(spec, one, a, mcfg, grids[0]) for a in pts[:3]]
    summary = {
        "max_ratio": {str(l): rep.max_ratio(l) for l in rep.levels},
        "stability_factor": rep.stability(),
        "dropped_points": {str(k): v for k, v in rep.dropped.items()},
        "unresolved_functions": {str(k): v for k, v in rep.unresolved.items()},
        "maximal_of_constant": const,
        "c_alpha_beta": spec.params.c,
        "c_prime_alpha_beta": spec.params.c_prime,
        "battery": cfg.battery,
    }
    _write_json(out / "domination_summary.json", summary)
    ok = all(np.isfinite(v) for v in summary["max_ratio"].values()) and summary["stability_factor"] < 2
    return ["domination.csv", "domination_summary.json"], ok, {"max_ratio": summary["max_ratio"]}


def cmd_multiplier_verdict(cfg: ExperimentConfig, out: Path):
    spec = cfg.spec()
    th = thresholds(spec)
    k = th["domain"]
    grid = make_grid(spec, max(cfg.degree_multiplier, 2 * max(cfg.ns)))
    families = {
        "riesz": lambda N: MultiplierSequence.riesz(N, k),
        "alternating": lambda N: MultiplierSequence.alternating(),
        "constant": lambda N: MultiplierSequence.constant(1.0),
    }
    fam = {cfg.sequence: families[cfg.sequence]}
    table = boundedness_experiment(spec, fam, multiplier_battery(spec, cfg.battery), cfg.ps, cfg.ns, grid, k=k)
    table.to_csv(out / "verdict.csv")
    blocks = marcinkiewicz_blocks(fam[cfg.sequence](max(cfg.ns)), k, max(0, math.ceil(math.log2(max(cfg.ns)))))
    payload = {"spread": table.spread, "verdicts": table.verdicts, "thresholds": th,
               "marcinkiewicz_blocks": [float(b) for b in blocks]}
    _write_json(out / "verdict.json", payload)
    return ["verdict.csv", "verdict.json"], True, {"verdicts": {f"{v['sequence']}@p={v['p']!r}": v["verdict"]
                                                           for v in table.verdicts}}


def cmd_selftest(cfg: ExperimentConfig, out: Path):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    suites = {}

    def suite(name, checks):
        start = len(rows)
        for cname, value, tol in checks:
            _check(rows, f"{name}:{cname}", value, tol)
        suites[name] = all(r[3] for r in rows[start:])

    # Jacobi orthogonality and the quadratic transformation
    checks = []
    for a, b in ((0.0, 0.0), (1.5, -0.5), (2.5, -0.5)):
        p = JacobiParams(a, b)
        rule = gauss_jacobi_rule(30, p)
        P = jacobi_table(20, p, rule.nodes)
        G = (P * rule.weights) @ P.T
        h = np.array([jacobi_norm(n, p) for n in range(21)])
        checks.append((f"gram_{a}_{b}", np.max(np.abs(G - np.diag(h)) / np.sqrt(np.outer(h, h))), 1e-10))
    th = np.linspace(0, math.pi, 100)
    qt = max(np.max(np.abs(eval_Zn(n, JacobiParams(1.5, -0.5), np.cos(2 * th)) - gegenbauer_Z(2 * n, 2.0, np.cos(th))))
             / max(1.0, abs(gegenbauer_Z(2 * n, 2.0, 1.0))) for n in range(16))
    checks.append(("quadratic_transformation", qt, 1e-11))
    suite("jacobi", checks)

    # reproduction on both domains
    checks = []
    for spec, deg in ((AdditionSpec.surface(2, 0.5), 4), (AdditionSpec.solid(2, 0.5, 1.0), 3)):
        grid = make_grid(spec, 2 * deg)
        f = random_polynomial(spec, deg, rng)
        pts = sample_points(spec, 10, cfg.seed)
        checks.append((f"reproduce_{spec.kind}", np.max(np.abs(partial_sum(spec, f, deg, pts, grid) - f.at(pts))), 1e-8))
        g = random_polynomial(spec, deg - 1, rng)
        checks.append((f"orthogonal_{spec.kind}", np.max(np.abs(project(spec, g, deg, pts, grid))), 1e-8))
        parts = projection_table(spec, f, deg, None, grid).values
        parse = sum(lp_norm(parts[n], 2, grid) ** 2 for n in range(deg + 1))
        checks.append((f"parseval_{spec.kind}", abs(parse - lp_norm(f, 2, grid) ** 2), 1e-8))
    suite("expansion", checks)

    # kernels
    spec = AdditionSpec.surface(2, 0.5)
    p = spec.params
    t = np.linspace(-1, 1, 101)
    series = jacobi_series(0.5 ** np.arange(80), p, t)
    tt = np.linspace(-1, 1, 2000)
    cmin = min(float(np.min(cesaro_kernel(p, n, p.alpha + p.beta + 2, tt))) for n in range(0, 31, 3))
    suite("kernels", [("poisson_closed", np.max(np.abs(poisson_kernel_closed(p, 0.5, t) - series) / series), 1e-10),
                      ("cesaro_positive", -cmin, 1e-10)])

    # multiplier anchor
    grid = make_grid(spec, 12)
    mu = rng.uniform(-1, 1, 7)
    suite("multiplier", [("l2_anchor", abs(operator_norm_l2(spec, mu, 6, grid) - np.max(np.abs(mu))), 1e-6)])

    # maximal functions of the constant
    grid = make_grid(spec, 24)
    mcfg = MaximalConfig.for_spec(spec)
    one = SampledFunction.constant(1.0, "surface")
    pts = sample_points(spec, 3, cfg.seed)
    suite("maximal", [("script_of_one", max(abs(script_maximal(spec, one, a, mcfg, grid) - p.c_prime) for a in pts), 1e-8),
                      ("hl_of_one", max(abs(hl_maximal(spec, one, a, mcfg, grid) - 1) for a in pts), 1e-12)])

    # distances
    rng2 = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(200):
        a, b, c = sample_surface(rng2, 2, 3)
        worst = max(worst, distance_surface(a, c) - distance_surface(a, b) - distance_surface(b, c))
        a, b, c = sample_solid(rng2, 2, 3)
        worst = max(worst, distance_solid(a, c) - distance_solid(a, b) - distance_solid(b, c))
    suite("geometry", [("triangle_excess", worst, 1e-12)])

    _write_rows(out / "selftest.csv", ["check", "value", "tolerance", "passed"], rows)
    _write_json(out / "selftest.json", {"suites": suites, "all_passed": all(suites.values())})
    return ["selftest.csv", "selftest.json"], all(suites.values()), {"suites": suites}


_DISPATCH = {
    "kernel-check": cmd_kernel_check,
    "summability": cmd_summability,
    "maximal-compare": cmd_maximal_compare,
    "multiplier-verdict": cmd_multiplier_verdict,
    "selftest": cmd_selftest,
}


def _workers(cfg: ExperimentConfig) -> int:
    return cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: ExperimentConfig, command: str, out: Path) -> int:
    """Run ``command`` with ``cfg`` and write artifacts plus ``manifest.json`` into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    (out / "config.ini").write_text(cfg.to_text())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        files, ok, info = _DISPATCH[command](cfg, out)
    files = ["config.ini"] + files
    manifest = {
        "command": command,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "status": "ok" if ok else "checks failed",
        "versions": {"conic_fourier": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "wall_time_s": time.perf_counter() - start,
        "warnings": sorted({str(w.message) for w in caught}),
        "results": info,
        "artifacts": [{"file": f, "sha256": _sha256(out / f)} for f in files],
    }
    _write_json(out / "manifest.json", manifest)
    if not ok:
        raise NumericError(f"{command}: one or more checks failed (see {out})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conic-fourier", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="INI file with [domain], [grid], ... sections")
    ap.add_argument("--out", metavar="DIR", default="results", help="artifact directory (default: results)")
    ap.add_argument("--workers", type=int, metavar="N", help="parallel workers (default: available CPUs)")
    ap.add_argument("--seed", type=int, metavar="S", help="seed for sampled points and polynomials")
    ap.add_argument("--tolerance", type=float, metavar="T", help="tolerance for identity checks")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config).with_overrides(workers=args.workers, seed=args.seed,
                                                      tolerance=args.tolerance)
        return run(cfg, args.command, out)
    except ConicError as exc:
        code = exc.exit_code
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    except Exception as exc:  # unexpected failures count as numeric
        code = 4
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "error.json", record)
    except OSError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
