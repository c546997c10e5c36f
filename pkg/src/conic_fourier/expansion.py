"""Fourier orthogonal expansions on conic domains by grid quadrature.

Every operator here is a convolution ``f *_w g`` with a one-variable profile
``g``.  Polynomial profiles ``g = sum_k c_k Z_k`` act diagonally on the
projections, so they are all evaluated from one :class:`ProjectionTable`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import comb

from .errors import DomainError, ParameterError, ResolutionWarning
from .geometry import SolidPoint, SurfacePoint, WeightedGrid, points_to_arrays
from .jacobi import _check_degree, eval_jacobi, jacobi_table
from .kernels import (
    AdditionSpec,
    _check_r,
    cesaro_coefficients,
    poisson_profile,
    t_values,
    tz_table,
)

__all__ = [
    "SampledFunction",
    "ProjectionTable",
    "projection_table",
    "project",
    "partial_sum",
    "cesaro_mean",
    "poisson_integral",
    "translate",
    "convolve",
    "apply_multiplier",
    "translation_coefficients",
    "lp_norm",
    "dim_Vn",
]

_TABLE_BUDGET = 4_000_000


@dataclass(eq=False)
class SampledFunction:
    """A function on a conic domain with values cached per grid.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(X, T)`` with ``X`` of shape ``(n, d)`` and ``T`` of shape
        ``(n,)`` returns ``n`` real values.
    kind : {"surface", "solid"}
    name : str
    degree : int, optional
        Declared polynomial degree; ``None`` for general functions.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kind: str
    name: str = "f"
    degree: Optional[int] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, X, T) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        T = np.atleast_1d(np.asarray(T, dtype=float))
        return np.asarray(self.evaluator(X, T), dtype=float).reshape(T.shape)

    def on(self, grid: WeightedGrid) -> np.ndarray:
        """Values at the grid nodes, computed once per grid."""
        if grid.kind != self.kind:
            raise ParameterError(f"{self.name} lives on the {self.kind}, grid on the {grid.kind}")
        hit = self._cache.get(id(grid))
        if hit is None or hit[0] is not grid:
            vals = self(grid.x, grid.t)
            vals.setflags(write=False)
            hit = (grid, vals)
            self._cache[id(grid)] = hit
        return hit[1]

    def at(self, points) -> np.ndarray:
        X, T = points_to_arrays(points)
        return self(X, T)

    def scaled(self, factor: float) -> "SampledFunction":
        return SampledFunction(lambda X, T: factor * self.evaluator(X, T), self.kind,
                               f"{factor:g}*{self.name}", self.degree)

    def absolute(self) -> "SampledFunction":
        return SampledFunction(lambda X, T: np.abs(self.evaluator(X, T)), self.kind,
                               f"|{self.name}|", None)

    @classmethod
    def constant(cls, value: float, kind: str) -> "SampledFunction":
        return cls(lambda X, T: np.full(np.shape(T), float(value)), kind, f"const{value:g}", 0)


@dataclass(frozen=True)
class ProjectionTable:
    """``values[n, i] = proj_n f`` at output point ``i`` for ``n = 0..N``."""

    values: np.ndarray
    X: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def multiplier(self, coeffs) -> np.ndarray:
        """``sum_k coeffs[k] proj_k f``; ``coeffs`` may be shorter than ``N + 1``."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] > self.N + 1:
            raise ParameterError(f"multiplier needs degree {coeffs.shape[-1] - 1} > table degree {self.N}")
        return np.tensordot(coeffs, self.values[: coeffs.shape[-1]], axes=([-1], [0]))

    def partial_sum(self, n: int) -> np.ndarray:
        return self.values[: n + 1].sum(axis=0)

    def to_csv(self, path) -> None:
        """Columns ``degree, point, value``."""
        n, i = np.meshgrid(np.arange(self.N + 1), np.arange(self.values.shape[1]), indexing="ij")
        flat = self.values.reshape(self.N + 1, -1)
        with open(path, "w") as fh:
            fh.write("degree,point,value\n")
            for row in zip(n.ravel(), i.ravel(), flat.ravel()):
                fh.write(f"{row[0]},{row[1]},{float(row[2])!r}\n")

    @classmethod
    def from_csv(cls, path, X=None, T=None) -> "ProjectionTable":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        N, P = int(data[:, 0].max()) + 1, int(data[:, 1].max()) + 1
        vals = np.empty((N, P))
        vals[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2]
        X = np.zeros((P, 0)) if X is None else X
        T = np.zeros(P) if T is None else T
        return cls(vals, X, T)


# ------------------------------------------------------------------ helpers


def _check_grid(spec: AdditionSpec, grid: WeightedGrid) -> None:
    if grid.kind != spec.kind or grid.d != spec.d:
        raise ParameterError("grid and addition spec describe different domains")
    if not np.allclose(grid.weight_spec, spec.weight_spec):
        raise ParameterError(f"grid weight {grid.weight_spec} differs from spec {spec.weight_spec}")


def _outputs(outputs, grid: WeightedGrid):
    """``(X, T, on_grid)`` for ``None`` (grid nodes), a point list, or an ``(X, T)`` pair."""
    if outputs is None:
        return grid.x, grid.t, True
    if isinstance(outputs, (SurfacePoint, SolidPoint)) or (
        isinstance(outputs, Sequence) and outputs and isinstance(outputs[0], (SurfacePoint, SolidPoint))
    ):
        X, T = points_to_arrays(outputs)
        return X, T, False
    X, T = outputs
    return np.atleast_2d(np.asarray(X, float)), np.atleast_1d(np.asarray(T, float)), False


def _values(f, grid: WeightedGrid) -> np.ndarray:
    """Grid values as an ``(n_grid, n_funcs)`` matrix."""
    if isinstance(f, SampledFunction):
        return f.on(grid)[:, None]
    if isinstance(f, (list, tuple)) and f and isinstance(f[0], SampledFunction):
        return np.column_stack([g.on(grid) for g in f])
    F = np.asarray(f, dtype=float)
    if F.shape[0] != len(grid):
        raise ParameterError("value array does not match the grid")
    return F[:, None] if F.ndim == 1 else F


def _ring_radii(grid: WeightedGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per-ring ``(|x|, t)``; rings are consecutive blocks of ``n_angle`` nodes."""
    n_rad, M = grid.ring
    first = np.arange(n_rad) * M
    return np.linalg.norm(grid.x[first], axis=1), grid.t[first]


def _projections_ring(spec, WF, N, grid):
    n_rad, M = grid.ring
    rad, tt = _ring_radii(grid)
    phi = 2 * np.pi * np.arange(M) / M
    Y = rad[:, None, None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1)[None, :, :]
    S = np.broadcast_to(tt[:, None], (n_rad, M))
    G = np.fft.rfft(WF.reshape(n_rad, M, -1), axis=1)
    out = np.empty((N + 1, n_rad, M, WF.shape[1]))
    for i in range(n_rad):
        xi_ = np.array([rad[i], 0.0])
        K = tz_table(spec, N, xi_[None, None, :], tt[i], Y, S)
        Kh = np.fft.rfft(K, axis=-1)
        out[:, i] = np.fft.irfft(np.einsum("kjq,jqf->kqf", Kh, G), n=M, axis=1)
    return out.reshape(N + 1, n_rad * M, -1)


def _projections_dense(spec, WF, N, X, T, grid):
    n_out = T.size
    out = np.empty((N + 1, n_out, WF.shape[1]))
    step = max(1, _TABLE_BUDGET // ((N + 1) * len(grid)))
    for lo in range(0, n_out, step):
        sl = slice(lo, lo + step)
        K = tz_table(spec, N, X[sl, None, :], T[sl, None], grid.x[None, :, :], grid.t[None, :])
        out[:, sl] = np.einsum("kon,nf->kof", K, WF)
    return out


def _projections(spec, f, N, outputs, grid, ring=True):
    _check_grid(spec, grid)
    N = _check_degree(N)
    if grid.degree < 2 * N:
        warnings.warn(f"grid degree {grid.degree} below 2N = {2 * N}", ResolutionWarning)
    X, T, on_grid = _outputs(outputs, grid)
    WF = grid.weights[:, None] * _values(f, grid)
    if on_grid and ring and grid.ring is not None:
        vals = _projections_ring(spec, WF, N, grid)
    else:
        vals = _projections_dense(spec, WF, N, X, T, grid)
    return vals, X, T


def projection_table(spec: AdditionSpec, f, N: int, outputs=None, grid: WeightedGrid = None,
                     ring: bool = True) -> ProjectionTable:
    """``proj_n f`` for ``n = 0..N`` at the output points.

    ``outputs=None`` evaluates at the grid nodes, through an FFT over the
    angle when the grid has a ring layout.
    """
    vals, X, T = _projections(spec, f, N, outputs, grid, ring)
    if vals.shape[-1] != 1:
        raise ParameterError("projection_table takes a single function")
    return ProjectionTable(vals[..., 0], X, T)


# --------------------------------------------------------------- operators


def project(spec: AdditionSpec, f, n: int, outputs=None, grid: WeightedGrid = None) -> np.ndarray:
    """``proj_n(w; f)`` at the outputs."""
    n = _check_degree(n)
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    return apply_multiplier(spec, f, coeffs, n, outputs, grid)


def partial_sum(spec: AdditionSpec, f, N: int, outputs=None, grid: WeightedGrid = None) -> np.ndarray:
    """``S_N f = sum_{n <= N} proj_n f``."""
    return apply_multiplier(spec, f, np.ones(_check_degree(N) + 1), N, outputs, grid)


def cesaro_mean(spec: AdditionSpec, f, n: int, delta: float, outputs=None,
                grid: WeightedGrid = None) -> np.ndarray:
    """Cesaro ``(C, delta)`` mean ``S_n^delta f = f *_w k_n^delta``."""
    return apply_multiplier(spec, f, cesaro_coefficients(n, delta), n, outputs, grid)


def translation_coefficients(spec: AdditionSpec, theta: float, N: int) -> np.ndarray:
    """``P_n(cos theta) / P_n(1)`` for ``n = 0..N``."""
    if not 0 <= theta <= math.pi:
        raise DomainError(f"theta = {theta} outside [0, pi]")
    p = spec.params
    return jacobi_table(N, p, math.cos(theta)) / jacobi_table(N, p, 1.0)


def translate(spec: AdditionSpec, f, theta: float, outputs=None, grid: WeightedGrid = None,
              N: int = 24, tol: float = 1e-8) -> np.ndarray:
    """Generalized translation ``S_theta f`` truncated at degree ``N``."""
    vals, _, _ = _projections(spec, f, N, outputs, grid)
    out = np.tensordot(translation_coefficients(spec, theta, N), vals, axes=(0, 0))
    declared = getattr(f, "degree", None)
    if declared is None or declared > N:
        tail = np.max(np.abs(vals[-1]))
        if tail > tol * max(1.0, np.max(np.abs(out))):
            warnings.warn(f"translation truncated at N={N} with tail {tail:.2e}", ResolutionWarning)
    return out[..., 0] if out.shape[-1] == 1 else out


def apply_multiplier(spec: AdditionSpec, f, mu, N: int, outputs=None,
                     grid: WeightedGrid = None) -> np.ndarray:
    """``sum_{k <= N} mu_k proj_k f`` for a sequence or :class:`MultiplierSequence`."""
    N = _check_degree(N)
    coeffs = np.asarray(mu.head(N + 1) if hasattr(mu, "head") else mu, dtype=float)[: N + 1]
    if coeffs.size < N + 1:
        raise ParameterError(f"multiplier has {coeffs.size} terms, need {N + 1}")
    vals, _, _ = _projections(spec, f, N, outputs, grid)
    out = np.tensordot(coeffs, vals, axes=(0, 0))
    return out[..., 0] if out.shape[-1] == 1 else out


def _poisson_nodes(r: float, tol: float) -> int:
    if r == 0:
        return 1
    return int(math.ceil(math.log(1 / tol) / math.log(1 / r))) + 4


def convolve(spec: AdditionSpec, f, g: Callable, outputs=None, grid: WeightedGrid = None,
             n_inner: int = 32) -> np.ndarray:
    """``(f *_w g)(x) = sum_j w_j f(y_j) T g(x, y_j)`` with ``n_inner`` nodes per axis."""
    _check_grid(spec, grid)
    X, T, _ = _outputs(outputs, grid)
    WF = grid.weights[:, None] * _values(f, grid)
    rules = spec.inner_rules(n_inner)
    out = np.empty((T.size, WF.shape[1]))
    step = max(1, _TABLE_BUDGET // len(grid))
    for lo in range(0, T.size, step):
        sl = slice(lo, lo + step)
        K = t_values(spec, g, X[sl, None, :], T[sl, None], grid.x[None, :, :], grid.t[None, :], rules)
        out[sl] = K @ WF
    return out[:, 0] if out.shape[1] == 1 else out


def poisson_integral(spec: AdditionSpec, f, r: float, outputs=None, grid: WeightedGrid = None,
                     n_inner: Optional[int] = None, tol: float = 1e-12,
                     max_inner: int = 512) -> np.ndarray:
    """Poisson integral ``Q_r f = f *_w q_r`` through the closed-form kernel.

    The inner rule size grows like ``log(1/tol) / log(1/r)``; it is capped at
    ``max_inner`` with a ``ResolutionWarning``.  The grid must also resolve the
    kernel peak, whose width shrinks like ``1 - r``.
    """
    r = _check_r(r)
    if n_inner is None:
        n_inner = _poisson_nodes(r, tol)
        if n_inner > max_inner:
            warnings.warn(f"Poisson inner rule capped at {max_inner} nodes for r={r}", ResolutionWarning)
            n_inner = max_inner
    return convolve(spec, f, poisson_profile(spec.params, r), outputs, grid, n_inner)


def lp_norm(f, p: float, grid: WeightedGrid) -> float:
    """``(sum_j w_j |f(y_j)|^p)^(1/p)``, or the max over nodes for ``p = inf``."""
    vals = f.on(grid) if isinstance(f, SampledFunction) else np.asarray(f, dtype=float)
    if p == math.inf:
        return float(np.max(np.abs(vals)))
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    return float(np.dot(grid.weights, np.abs(vals) ** p) ** (1 / p))


def dim_Vn(kind: str, d: int, n: int) -> int:
    """Dimension of the degree-``n`` orthogonal space.

    ``kind="surface"`` counts polynomials on a quadratic surface in R^d (the
    sphere S^{d-1} convention); ``kind="solid"`` counts them on a solid domain
    in R^d.

    Examples
    --------
    >>> dim_Vn("surface", 3, 2), dim_Vn("solid", 2, 3)
    (5, 4)
    """
    n = _check_degree(n)
    if kind == "surface":
        return int(comb(n + d - 2, n, exact=True) + (comb(n + d - 3, n - 1, exact=True) if n >= 1 else 0))
    if kind == "solid":
        return int(comb(n + d - 1, n, exact=True))
    raise ParameterError(f"unknown domain kind {kind!r}")
