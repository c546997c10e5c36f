"""Maximal functions on conic domains and domination experiments.

``script_maximal`` is the convolution maximal function

    sup_theta (|f| *_w chi_[cos theta, 1])(a) / int_0^theta w(cos phi) sin phi dphi,

``hl_maximal`` the Hardy-Littlewood maximal function over intrinsic caps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError, ResolutionError
from .expansion import (
    SampledFunction,
    _check_grid,
    _projections,
    poisson_integral,
)
from .geometry import (
    MIN_CAP_NODES,
    SolidPoint,
    SurfacePoint,
    WeightedGrid,
    sample_solid,
    sample_surface,
    solid_cos,
    surface_cos,
)
from .jacobi import JacobiParams, _jacobi_unnorm_rule, jacobi_table, jacobi_tail_mass
from .kernels import AdditionSpec, cesaro_coefficients, indicator_T

__all__ = [
    "BATTERY_VERSION",
    "MaximalConfig",
    "default_theta_grid",
    "chi_coefficients",
    "script_maximal",
    "script_maximal_many",
    "hl_maximal",
    "hl_maximal_many",
    "maximal_poisson",
    "maximal_cesaro",
    "maximal_cesaro_many",
    "battery",
    "multiplier_battery",
    "sample_points",
    "DominationReport",
    "domination_experiment",
]

BATTERY_VERSION = "battery-v1"


def default_theta_grid(n_geometric: int = 48, n_linear: int = 32, depth: int = 12) -> np.ndarray:
    """Geometric points from pi down to ``pi 2^-depth`` merged with a linear grid."""
    geo = math.pi * 2.0 ** (-np.linspace(0, depth, n_geometric))
    lin = np.linspace(math.pi / n_linear, math.pi, n_linear)
    return np.unique(np.concatenate([geo, lin]))


@dataclass(frozen=True)
class MaximalConfig:
    """Discretization of the suprema in the maximal functions.

    Attributes
    ----------
    lam : float
        ``alpha + 1/2`` of the addition formula; checked against the spec.
    theta_grid, r_grid : ndarray
        Angles for the convolution maximal function and radii for caps.
    nodes_per_piece : int
        Quadrature nodes between kinks of the characteristic-profile kernel.
    resolution_tol : float
        Relative change allowed when the per-piece node count is doubled.
    min_cap_nodes : int
        Caps holding fewer grid nodes are below grid resolution and skipped.
    """

    lam: float
    theta_grid: np.ndarray = field(default_factory=default_theta_grid)
    r_grid: np.ndarray = field(default_factory=lambda: default_theta_grid(32, 16, 10))
    nodes_per_piece: int = 8
    resolution_tol: float = 0.05
    min_cap_nodes: int = MIN_CAP_NODES
    tolerance: float = 1e-10

    def __post_init__(self):
        for name in ("theta_grid", "r_grid"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size == 0 or np.any(arr <= 0) or np.any(arr > math.pi + 1e-12):
                raise ParameterError(f"{name} must be a nonempty set of values in (0, pi]")
            if np.any(np.diff(arr) <= 0):
                raise ParameterError(f"{name} must be strictly increasing")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def for_spec(cls, spec: AdditionSpec, **kw) -> "MaximalConfig":
        return cls(lam=spec.lam, **kw)


def _check_cfg(spec: AdditionSpec, cfg: MaximalConfig) -> None:
    if not math.isclose(cfg.lam, spec.lam):
        raise ParameterError(f"config lambda {cfg.lam} does not match alpha + 1/2 = {spec.lam}")


def _cos_fn(grid: WeightedGrid):
    return surface_cos if grid.kind == "surface" else solid_cos


def _distances(grid: WeightedGrid, a) -> np.ndarray:
    return np.arccos(_cos_fn(grid)(grid.x, grid.t, a.x[None, :], a.t))


def _declared_nonneg_poly(f, grid) -> bool:
    return isinstance(f, SampledFunction) and f.degree is not None and np.all(f.on(grid) >= 0)


# --------------------------------------------------- characteristic profile


def chi_coefficients(p: JacobiParams, n_max: int, thetas) -> np.ndarray:
    """``c' int_{cos theta}^1 P_n(t)/P_n(1) w(t) dt`` for ``n = 0..n_max``.

    Returns shape ``(len(thetas), n_max + 1)``.  The integral is taken on
    whichever side of ``cos theta`` keeps the other endpoint weight smooth.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    m = n_max // 2 + 24
    out = np.empty((thetas.size, n_max + 1))
    p1 = jacobi_table(n_max, p, 1.0)
    total = np.zeros(n_max + 1)
    total[0] = 1.0
    a, b, cp = p.alpha, p.beta, p.c_prime
    for i, th in enumerate(thetas):
        x0 = math.cos(th)
        if x0 >= 0:
            z, wz = _jacobi_unnorm_rule(m, a, 0.0)
            t = x0 + (1 - x0) * (1 + z) / 2
            wt = wz * ((1 - x0) / 2) ** (a + 1) * (1 + t) ** b
            out[i] = cp * (jacobi_table(n_max, p, t) @ wt) / p1
        else:
            z, wz = _jacobi_unnorm_rule(m, 0.0, b)
            t = -1 + (1 + x0) * (1 + z) / 2
            wt = wz * ((1 + x0) / 2) ** (b + 1) * (1 - t) ** a
            out[i] = total - cp * (jacobi_table(n_max, p, t) @ wt) / p1
    return out


def _denominators(p: JacobiParams, thetas) -> np.ndarray:
    """``int_0^theta w(cos phi) sin phi dphi``."""
    return jacobi_tail_mass(p, np.cos(thetas)) / p.c_prime


def _chi_convolutions(spec, WF, a, thetas, grid, m, dist):
    """``(F *_w chi_theta)(a)`` for each theta; columns of ``WF`` are weighted values."""
    out = np.zeros((len(thetas), WF.shape[1]))
    for i, th in enumerate(thetas):
        idx = np.nonzero(dist <= th / 2 + 1e-12)[0]
        if idx.size == 0:
            continue
        K = indicator_T(spec, th, a.x[None, :], a.t, grid.x[idx], grid.t[idx], m=m)
        out[i] = K @ WF[idx]
    return out


def _valid_thetas(dist, cfg):
    counts = np.array([(dist <= th / 2 + 1e-12).sum() for th in cfg.theta_grid])
    keep = counts >= cfg.min_cap_nodes
    if not keep.any():
        raise ResolutionError("no angle in the theta grid gives a resolved cap")
    return cfg.theta_grid[keep]


def script_maximal_many(spec: AdditionSpec, fs: Sequence, a, cfg: MaximalConfig,
                        grid: WeightedGrid, route: str = "auto", return_argmax: bool = False):
    """The convolution maximal function of several functions at one point.

    ``route="spectral"`` (used automatically for declared nonnegative
    polynomials) expands ``f *_w chi_theta`` in projections; ``"kernel"``
    integrates the characteristic-profile kernel against the grid values.
    """
    _check_grid(spec, grid)
    _check_cfg(spec, cfg)
    fs = list(fs)
    dist = _distances(grid, a)
    thetas = _valid_thetas(dist, cfg)
    den = _denominators(spec.params, thetas)
    conv = np.empty((thetas.size, len(fs)))
    spectral = [route == "spectral" or (route == "auto" and _declared_nonneg_poly(f, grid)) for f in fs]
    kern = [i for i, s in enumerate(spectral) if not s]
    for i, s in enumerate(spectral):
        if s:
            n = fs[i].degree
            vals, _, _ = _projections(spec, fs[i], n, [a], grid)
            conv[:, i] = chi_coefficients(spec.params, n, thetas) @ vals[:, 0, 0]
    if kern:
        F = np.column_stack([np.abs(fs[i].on(grid) if isinstance(fs[i], SampledFunction) else fs[i])
                             for i in kern])
        WF = grid.weights[:, None] * F
        conv[:, kern] = _chi_convolutions(spec, WF, a, thetas, grid, cfg.nodes_per_piece, dist)
        ratio = conv[:, kern] / den[:, None]
        best = np.argmax(ratio, axis=0)
        # refine the maximizing angles
        uniq = np.unique(best)
        fine = _chi_convolutions(spec, WF, a, thetas[uniq], grid, 2 * cfg.nodes_per_piece, dist)
        for col, b in enumerate(best):
            coarse = conv[b, kern[col]]
            new = fine[np.searchsorted(uniq, b), col]
            if abs(new - coarse) > cfg.resolution_tol * max(abs(new), 1e-300) and abs(new - coarse) > cfg.tolerance:
                raise ResolutionError(
                    f"characteristic kernel under-resolved at theta={thetas[b]:.3g}: {coarse:.4g} -> {new:.4g}"
                )
            conv[b, kern[col]] = new
    ratio = conv / den[:, None]
    best = np.argmax(ratio, axis=0)
    vals = ratio[best, np.arange(len(fs))]
    if return_argmax:
        return vals, thetas[best]
    return vals


def script_maximal(spec: AdditionSpec, f, a, cfg: MaximalConfig, grid: WeightedGrid,
                   route: str = "auto") -> float:
    """Convolution maximal function of ``|f|`` at the point ``a``.

    The denominator is ``int_0^theta w(cos phi) sin phi dphi`` with no
    normalizing constant, so the maximal function of 1 is ``c'_{alpha,beta}``.
    """
    return float(script_maximal_many(spec, [f], a, cfg, grid, route)[0])


def hl_maximal_many(spec: AdditionSpec, fs: Sequence, a, cfg: MaximalConfig,
                    grid: WeightedGrid) -> np.ndarray:
    """Largest weighted cap average of ``|f|`` over the radii in ``cfg.r_grid``.

    Radii whose cap holds fewer than ``cfg.min_cap_nodes`` nodes are below the
    grid resolution and skipped; an error is raised when none remain.
    """
    _check_grid(spec, grid)
    dist = _distances(grid, a)
    F = np.column_stack([np.abs(f.on(grid) if isinstance(f, SampledFunction) else f) for f in fs])
    best = np.full(F.shape[1], -np.inf)
    for r in cfg.r_grid:
        mask = dist <= r + 1e-12
        if mask.sum() < cfg.min_cap_nodes:
            continue
        w = grid.weights[mask]
        best = np.maximum(best, (w @ F[mask]) / w.sum())
    if not np.all(np.isfinite(best)):
        raise ResolutionError("every cap in the radius grid is under-resolved")
    return best


def hl_maximal(spec: AdditionSpec, f, a, cfg: MaximalConfig, grid: WeightedGrid) -> float:
    """Hardy-Littlewood maximal function over intrinsic caps."""
    return float(hl_maximal_many(spec, [f], a, cfg, grid)[0])


def maximal_poisson(spec: AdditionSpec, f, a, r_grid, grid: WeightedGrid, **kw) -> float:
    """``max_r Q_r(|f|)(a)`` over the radii in ``r_grid``."""
    g = f.absolute() if isinstance(f, SampledFunction) else np.abs(f)
    return max(float(poisson_integral(spec, g, r, [a], grid, **kw)[0]) for r in r_grid)


def maximal_cesaro_many(spec: AdditionSpec, fs, a, delta: float, N: int,
                        grid: WeightedGrid) -> np.ndarray:
    """``max_{n <= N} |S_n^delta f(a)|`` for several functions."""
    F = np.column_stack([f.on(grid) if isinstance(f, SampledFunction) else f for f in fs])
    vals, _, _ = _projections(spec, F, N, [a], grid)
    proj = vals[:, 0, :]
    best = np.zeros(F.shape[1])
    for n in range(N + 1):
        best = np.maximum(best, np.abs(cesaro_coefficients(n, delta) @ proj[: n + 1]))
    return best


def maximal_cesaro(spec: AdditionSpec, f, a, delta: float, N: int, grid: WeightedGrid) -> float:
    """Maximal Cesaro ``(C, delta)`` operator at ``a``, truncated at ``n <= N``."""
    return float(maximal_cesaro_many(spec, [f], a, delta, N, grid)[0])


# ------------------------------------------------------------------ battery


def _centers(spec: AdditionSpec):
    """Five cap centers: apex, rim and three interior heights."""
    d = spec.d
    e = np.zeros(d)
    e[0] = 1.0
    f = np.zeros(d)
    f[-1] = 1.0
    g = (e + f) / np.linalg.norm(e + f)
    if spec.kind == "surface":
        make = lambda t, u: SurfacePoint(t * u, t)
        return [make(0.0, e), make(1.0, e), make(0.5, f), make(0.85, g), make(0.25, -e)]
    make = lambda t, rho, u: SolidPoint(t * rho * u, t)
    return [make(0.0, 0.0, e), make(1.0, 1.0, e), make(0.5, 0.0, f), make(0.85, 0.5, g), make(0.3, 0.9, -e)]


def battery(spec: AdditionSpec, version: str = BATTERY_VERSION) -> list[SampledFunction]:
    """The fixed nonnegative test battery.

    Cap indicators at three radii around five centers, five nonnegative
    polynomials of degree at most six and two Gaussian bumps.
    """
    if version != BATTERY_VERSION:
        raise ParameterError(f"unknown battery version {version!r}")
    kind = spec.kind
    cos_fn = surface_cos if kind == "surface" else solid_cos
    out = []
    for ci, c in enumerate(_centers(spec)):
        for r0 in (0.2, 0.4, 0.8):
            ev = (lambda c, r0: lambda X, T: (np.arccos(cos_fn(X, T, c.x[None, :], c.t)) <= r0).astype(float))(c, r0)
            out.append(SampledFunction(ev, kind, f"cap{ci}_r{r0}"))
    polys = [
        ("one", lambda X, T: np.ones_like(T), 0),
        ("t", lambda X, T: T, 1),
        ("sq", lambda X, T: (X[:, 0] + T) ** 2 / 4, 2),
        ("t6", lambda X, T: T**6, 6),
        ("mix", lambda X, T: (X[:, 0] ** 2 + T * T) * (1 - T) ** 2 * (1 + X[:, -1]) / 2, 5),
    ]
    for name, ev, deg in polys:
        out.append(SampledFunction(ev, kind, name, deg))
    z0 = np.zeros(spec.d + 1)
    z0[0], z0[-1] = 0.3, 0.6
    for sigma in (0.15, 0.3):
        ev = (lambda s: lambda X, T: np.exp(-(np.sum((X - z0[:-1]) ** 2, axis=1) + (T - z0[-1]) ** 2) / s**2))(sigma)
        out.append(SampledFunction(ev, kind, f"bump{sigma}"))
    return out


def multiplier_battery(spec: AdditionSpec, version: str = BATTERY_VERSION) -> list[SampledFunction]:
    """:func:`battery` plus two sign-oscillating functions."""
    out = battery(spec, version)
    kind = spec.kind
    out.append(SampledFunction(lambda X, T: np.where(np.sin(9 * np.pi * X[:, 0]) >= 0, 1.0, -1.0), kind, "osc"))
    out.append(SampledFunction(
        lambda X, T: np.where(np.sin(7 * np.pi * X[:, -1]) * np.sin(7 * np.pi * T) >= 0, 1.0, -1.0), kind, "checker"))
    return out


def sample_points(spec: AdditionSpec, n: int, seed: int = 0) -> list:
    """Deterministic sample points on the spec's domain."""
    rng = np.random.default_rng(seed)
    if spec.kind == "surface":
        return sample_surface(rng, spec.d, n)
    return sample_solid(rng, spec.d, n)


# --------------------------------------------------------------- experiment


@dataclass
class DominationReport:
    """Per-point ratios of a maximal operator to a reference maximal function."""

    spec: AdditionSpec
    numerator: str
    denominator: str
    rows: list = field(default_factory=list)
    dropped: dict = field(default_factory=dict)
    unresolved: dict = field(default_factory=dict)

    def max_ratio(self, level: int) -> float:
        vals = [r["ratio"] for r in self.rows if r["level"] == level and np.isfinite(r["ratio"])]
        return max(vals) if vals else math.nan

    @property
    def levels(self) -> list:
        return sorted({r["level"] for r in self.rows})

    def stability(self) -> float:
        """Ratio of the largest to the smallest per-level maximum."""
        m = [self.max_ratio(l) for l in self.levels]
        return max(m) / min(m)

    def to_csv(self, path) -> None:
        cols = ["d", "gamma", "mu", "point", "f", self.numerator, self.denominator, "ratio", "level"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow([self.spec.d, repr(self.spec.gamma), repr(self.spec.mu), r["point"], r["f"],
                            repr(r["num"]), repr(r["den"]), repr(r["ratio"]), r["level"]])


def domination_experiment(spec: AdditionSpec, fs: Sequence[SampledFunction], points: Sequence,
                          cfg: MaximalConfig, grids: Sequence[WeightedGrid],
                          numerator: str = "script", denominator: str = "hl",
                          delta: Optional[float] = None, N: Optional[int] = None) -> DominationReport:
    """Ratios ``numerator / denominator`` over a battery, points and grid levels.

    ``numerator`` is ``"script"`` (convolution maximal function) or
    ``"cesaro"`` (maximal Cesaro operator with ``delta`` and ``N``);
    ``denominator`` is ``"hl"`` or ``"script"``.  Points where either side is
    under-resolved are dropped and counted per level.  Functions that vanish
    at every node of a grid (a support smaller than the grid spacing) are
    left out of that level and listed in ``report.unresolved``.
    """

    def evaluate(which, a, grid):
        if which == "script":
            return script_maximal_many(spec, fs, a, cfg, grid)
        if which == "hl":
            return hl_maximal_many(spec, fs, a, cfg, grid)
        if which == "cesaro":
            if delta is None or N is None:
                raise ParameterError("the Cesaro comparison needs delta and N")
            return maximal_cesaro_many(spec, fs, a, delta, N, grid)
        raise ParameterError(f"unknown maximal operator {which!r}")

    all_fs = list(fs)
    report = DominationReport(spec, numerator, denominator)
    for level, grid in enumerate(grids):
        report.dropped[level] = 0
        seen = [bool(np.any(f.on(grid) != 0)) for f in all_fs]
        report.unresolved[level] = [f.name for f, ok in zip(all_fs, seen) if not ok]
        fs = [f for f, ok in zip(all_fs, seen) if ok]
        for pi, a in enumerate(points):
            try:
                num = evaluate(numerator, a, grid)
                den = evaluate(denominator, a, grid)
            except ResolutionError:
                report.dropped[level] += 1
                continue
            for f, nv, dv in zip(fs, num, den):
                ratio = nv / dv if dv > 0 else (0.0 if nv == 0 else math.inf)
                report.rows.append(dict(point=pi, f=f.name, num=float(nv), den=float(dv),
                                        ratio=float(ratio), level=level))
    return report
