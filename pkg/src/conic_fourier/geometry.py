"""Conic surface and solid cone: points, intrinsic distances, caps and grids.

The conic surface is ``V0 = {(x, t): ||x|| = t, 0 <= t <= 1}`` in R^{d+1} with
weight ``t^{-1} (1-t)^gamma``; the solid cone is ``V = {||x|| <= t <= 1}`` with
weight ``(t^2 - ||x||^2)^{mu-1/2} (1-t)^gamma``.  Both are normalized to unit
mass by the quadrature grids built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, ParameterError, ResolutionError
from .jacobi import JacobiParams, gauss_jacobi_rule

__all__ = [
    "MAX_DIM",
    "SurfacePoint",
    "SolidPoint",
    "WeightedGrid",
    "surface_cos",
    "solid_cos",
    "distance_surface",
    "distance_solid",
    "distance_interval",
    "sphere_rule",
    "surface_grid",
    "solid_grid",
    "cap_mask",
    "cap_measure_surface",
    "cap_measure_solid",
    "surface_cap_asymptotic",
    "solid_cap_asymptotic",
    "sample_surface",
    "sample_solid",
]

MAX_DIM = 4
_TOL = 1e-12
MIN_CAP_NODES = 10


def _as_vec(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DomainError("x must be a vector")
    return x


@dataclass(frozen=True)
class SurfacePoint:
    """A point ``(x, t)`` on the conic surface, ``||x|| = t``."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        x = _as_vec(self.x)
        t = float(self.t)
        if not (-_TOL <= t <= 1 + _TOL):
            raise DomainError(f"t = {t} outside [0, 1]")
        if abs(np.linalg.norm(x) - t) > _TOL * max(1.0, t) * 10:
            raise DomainError(f"|x| = {np.linalg.norm(x)} differs from t = {t}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", min(max(t, 0.0), 1.0))

    @property
    def d(self) -> int:
        return self.x.size

    @classmethod
    def polar(cls, t: float, phi: float) -> "SurfacePoint":
        """Point of the d = 2 surface at height ``t`` and angle ``phi``."""
        return cls(np.array([t * math.cos(phi), t * math.sin(phi)]), t)


@dataclass(frozen=True)
class SolidPoint:
    """A point ``(x, t)`` of the solid cone, ``||x|| <= t``."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        x = _as_vec(self.x)
        t = float(self.t)
        if not (-_TOL <= t <= 1 + _TOL):
            raise DomainError(f"t = {t} outside [0, 1]")
        if np.linalg.norm(x) > t + _TOL:
            raise DomainError(f"|x| = {np.linalg.norm(x)} exceeds t = {t}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", min(max(t, 0.0), 1.0))

    @property
    def d(self) -> int:
        return self.x.size


Point = Union[SurfacePoint, SolidPoint]


def points_to_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    """Stack a point or a sequence of points into ``(X, T)`` arrays."""
    if isinstance(points, (SurfacePoint, SolidPoint)):
        points = [points]
    X = np.array([p.x for p in points], dtype=float)
    T = np.array([p.t for p in points], dtype=float)
    return X, T


@dataclass(frozen=True)
class WeightedGrid:
    """Product quadrature grid on a conic domain.

    Attributes
    ----------
    kind : {"surface", "solid"}
    x, t : ndarray
        Node coordinates, shapes ``(n, d)`` and ``(n,)``.
    weights : ndarray
        Positive weights summing to one.
    weight_spec : tuple
        ``(gamma,)`` on the surface, ``(gamma, mu)`` on the solid cone.
    degree : int
        Total polynomial degree in ``(x, t)`` integrated exactly.
    ring : tuple of int, optional
        ``(n_radial, n_angle)`` when d = 2 and nodes are stored radial-major on
        a uniform angle grid ``phi_m = 2 pi m / n_angle``.
    """

    kind: str
    x: np.ndarray
    t: np.ndarray
    weights: np.ndarray
    weight_spec: tuple
    degree: int
    ring: Optional[tuple] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("surface", "solid"):
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        for name in ("x", "t", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.weights <= 0):
            raise ParameterError("grid weights must be positive")

    def __len__(self) -> int:
        return self.t.size

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def gamma(self) -> float:
        return self.weight_spec[0]

    @property
    def mu(self) -> Optional[float]:
        return self.weight_spec[1] if self.kind == "solid" else None

    @property
    def points(self) -> list:
        cls = SurfacePoint if self.kind == "surface" else SolidPoint
        return [cls(x, t) for x, t in zip(self.x, self.t)]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def to_csv(self, path) -> None:
        """Write one row per node: ``x1..xd, t, weight``."""
        cols = [f"x{i + 1}" for i in range(self.d)] + ["t", "weight"]
        data = np.column_stack([self.x, self.t, self.weights])
        meta = f"kind={self.kind};spec={','.join(repr(float(v)) for v in self.weight_spec)};degree={self.degree}"
        if self.ring is not None:
            meta += f";ring={self.ring[0]},{self.ring[1]}"
        np.savetxt(path, data, delimiter=",", fmt="%.17g", header=meta + "\n" + ",".join(cols), comments="# ")

    @classmethod
    def from_csv(cls, path) -> "WeightedGrid":
        with open(path) as fh:
            meta_line = fh.readline()[2:].strip()
        meta = dict(item.split("=", 1) for item in meta_line.split(";"))
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        ring = tuple(int(v) for v in meta["ring"].split(",")) if "ring" in meta else None
        spec = tuple(float(v) for v in meta["spec"].split(","))
        return cls(meta["kind"], data[:, :-2], data[:, -2], data[:, -1], spec, int(meta["degree"]), ring)


# ---------------------------------------------------------------- distances


def surface_cos(x, t, y, s):
    """``cos d_V0`` for broadcastable arrays ``x (..., d)``, ``t (...)``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    t, s = np.asarray(t, float), np.asarray(s, float)
    inner = np.einsum("...i,...i->...", x, y)
    first = np.sqrt(np.clip(0.5 * (inner + t * s), 0.0, None))
    second = np.sqrt(np.clip(1 - t, 0.0, None) * np.clip(1 - s, 0.0, None))
    return np.clip(first + second, -1.0, 1.0)


def solid_cos(x, t, y, s):
    """``cos d_V`` for broadcastable arrays."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    t, s = np.asarray(t, float), np.asarray(s, float)
    inner = np.einsum("...i,...i->...", x, y)
    hx = np.sqrt(np.clip(t * t - np.einsum("...i,...i->...", x, x), 0.0, None))
    hy = np.sqrt(np.clip(s * s - np.einsum("...i,...i->...", y, y), 0.0, None))
    first = np.sqrt(np.clip(0.5 * (inner + t * s + hx * hy), 0.0, None))
    second = np.sqrt(np.clip(1 - t, 0.0, None) * np.clip(1 - s, 0.0, None))
    return np.clip(first + second, -1.0, 1.0)


def distance_surface(a: SurfacePoint, b: SurfacePoint) -> float:
    """Intrinsic distance on the conic surface.

    Examples
    --------
    >>> apex = SurfacePoint([0.0, 0.0], 0.0)
    >>> rim = SurfacePoint([1.0, 0.0], 1.0)
    >>> round(distance_surface(apex, rim), 12) == round(math.pi / 2, 12)
    True
    """
    return float(np.arccos(surface_cos(a.x, a.t, b.x, b.t)))


def distance_solid(a: SolidPoint, b: SolidPoint) -> float:
    """Intrinsic distance on the solid cone."""
    return float(np.arccos(solid_cos(a.x, a.t, b.x, b.t)))


def distance_interval(t, s):
    """``arccos(sqrt(ts) + sqrt(1-t) sqrt(1-s))`` on [0, 1]."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any((t < 0) | (t > 1) | (s < 0) | (s > 1)):
        raise DomainError("distance_interval needs t, s in [0, 1]")
    arg = np.sqrt(t * s) + np.sqrt((1 - t) * (1 - s))
    out = np.arccos(np.clip(arg, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


# -------------------------------------------------------------------- grids


def _check_dim(d: int, low: int) -> int:
    if int(d) != d or d < low:
        raise ParameterError(f"dimension must be an integer >= {low}, got {d}")
    if d > MAX_DIM:
        raise ParameterError(f"dimension {d} exceeds the supported limit {MAX_DIM}")
    return int(d)


def _check_degree(degree: int) -> int:
    if int(degree) != degree or degree < 1:
        raise ParameterError(f"grid degree must be a positive integer, got {degree}")
    return int(degree)


@lru_cache(maxsize=64)
def sphere_rule(k: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on the unit sphere of R^k exact for polynomials of degree ``degree``.

    Returns ``(points, weights)`` with weights summing to one.  The circle uses
    the trapezoidal rule with ``degree + 1`` equally spaced angles starting at 0.
    """
    if k == 1:
        pts, wts = np.array([[-1.0], [1.0]]), np.array([0.5, 0.5])
    elif k == 2:
        M = degree + 1
        phi = 2 * np.pi * np.arange(M) / M
        pts, wts = np.column_stack([np.cos(phi), np.sin(phi)]), np.full(M, 1.0 / M)
    else:
        lower, lw = sphere_rule(k - 1, degree)
        half = (k - 3) / 2
        rule = gauss_jacobi_rule(-(-(degree + 1) // 2), JacobiParams(half, half))
        z = rule.nodes
        rho = np.sqrt(1 - z * z)
        pts = np.concatenate(
            [np.column_stack([r * lower, np.full(len(lw), zi)]) for zi, r in zip(z, rho)]
        )
        wts = np.concatenate([w * lw for w in rule.weights])
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def surface_grid(d: int, gamma: float, degree: int) -> WeightedGrid:
    """Product grid on the conic surface exact for polynomials of degree ``degree``.

    The apex factor ``t^{-1}`` of the weight is absorbed into the Gauss-Jacobi
    rule for ``t^{d-2} (1-t)^gamma`` on (0, 1), so no node sits at the apex.
    """
    d = _check_dim(d, 2)
    degree = _check_degree(degree)
    if gamma < -0.5:
        raise ParameterError(f"gamma must be >= -1/2, got {gamma}")
    rule = gauss_jacobi_rule(-(-(degree + 1) // 2), JacobiParams(gamma, d - 2))
    t = 0.5 * (1 + rule.nodes)
    sph, sw = sphere_rule(d, degree)
    X = (t[:, None, None] * sph[None, :, :]).reshape(-1, d)
    T = np.repeat(t, len(sw))
    W = np.outer(rule.weights, sw).ravel()
    ring = (t.size, len(sw)) if d == 2 else None
    return WeightedGrid("surface", X, T, W / W.sum(), (float(gamma),), degree, ring)


def solid_grid(d: int, gamma: float, mu: float, degree: int) -> WeightedGrid:
    """Product grid on the solid cone exact for polynomials of degree ``degree``.

    Uses ``x = t u`` with ``u`` in the unit ball, a Gauss-Jacobi rule for
    ``t^{d+2mu-1} (1-t)^gamma`` in ``t`` and one for ``s^{(d-2)/2} (1-s)^{mu-1/2}``
    in ``s = ||u||^2``.
    """
    d = _check_dim(d, 1)
    degree = _check_degree(degree)
    if gamma < -0.5:
        raise ParameterError(f"gamma must be >= -1/2, got {gamma}")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    trule = gauss_jacobi_rule(-(-(degree + 1) // 2), JacobiParams(gamma, d + 2 * mu - 1))
    srule = gauss_jacobi_rule(degree // 4 + 1, JacobiParams(mu - 0.5, (d - 2) / 2))
    t = 0.5 * (1 + trule.nodes)
    rho = np.sqrt(0.5 * (1 + srule.nodes))
    sph, sw = sphere_rule(d, degree)
    # radial index (t_i, rho_j) is major, sphere index minor
    radial_t = np.repeat(t, rho.size)
    radial_r = np.tile(rho, t.size)
    radial_w = np.outer(trule.weights, srule.weights).ravel()
    X = ((radial_t * radial_r)[:, None, None] * sph[None, :, :]).reshape(-1, d)
    T = np.repeat(radial_t, len(sw))
    W = np.outer(radial_w, sw).ravel()
    ring = (radial_t.size, len(sw)) if d == 2 else None
    return WeightedGrid("solid", X, T, W / W.sum(), (float(gamma), float(mu)), degree, ring)


# ---------------------------------------------------------------------- caps


def cap_mask(grid: WeightedGrid, center: Point, r: float) -> np.ndarray:
    """Boolean mask of grid nodes within intrinsic distance ``r`` of ``center``."""
    cosfn = surface_cos if grid.kind == "surface" else solid_cos
    c = cosfn(grid.x, grid.t, center.x[None, :], center.t)
    return np.arccos(c) <= r


def _cap_measure(grid, center, r, min_nodes):
    if not 0 < r <= math.pi:
        raise DomainError(f"cap radius {r} outside (0, pi]")
    mask = cap_mask(grid, center, r)
    if mask.sum() < min_nodes:
        raise ResolutionError(f"cap of radius {r:.3g} holds {int(mask.sum())} nodes (< {min_nodes})")
    return float(grid.weights[mask].sum())


def cap_measure_surface(center: SurfacePoint, r: float, gamma: float, grid: WeightedGrid,
                        min_nodes: int = MIN_CAP_NODES) -> float:
    """Weighted measure of the conic cap ``c(center, r)`` on the surface."""
    if grid.kind != "surface" or not math.isclose(grid.gamma, gamma):
        raise ParameterError("grid does not carry the surface weight for this gamma")
    return _cap_measure(grid, center, r, min_nodes)


def cap_measure_solid(center: SolidPoint, r: float, gamma: float, mu: float, grid: WeightedGrid,
                      min_nodes: int = MIN_CAP_NODES) -> float:
    """Weighted measure of the ball ``c(center, r)`` on the solid cone."""
    if grid.kind != "solid" or not (math.isclose(grid.gamma, gamma) and math.isclose(grid.mu, mu)):
        raise ParameterError("grid does not carry the solid weight for (gamma, mu)")
    return _cap_measure(grid, center, r, min_nodes)


def surface_cap_asymptotic(center: SurfacePoint, r: float, gamma: float) -> float:
    """``r^d (t + r^2)^{(d-2)/2} (1 - t + r^2)^{gamma+1/2}``."""
    d, t = center.d, center.t
    return r**d * (t + r * r) ** ((d - 2) / 2) * (1 - t + r * r) ** (gamma + 0.5)


def solid_cap_asymptotic(center: SolidPoint, r: float, gamma: float, mu: float) -> float:
    """``r^{d+1} (t + r^2)^{(d-1)/2} (1 - t + r^2)^{gamma+1/2} (t^2 - |x|^2 + r^2)^mu``."""
    d, t = center.d, center.t
    h2 = max(t * t - float(center.x @ center.x), 0.0)
    return (r ** (d + 1) * (t + r * r) ** ((d - 1) / 2)
            * (1 - t + r * r) ** (gamma + 0.5) * (h2 + r * r) ** mu)


# ------------------------------------------------------------------ sampling


def _random_directions(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_surface(rng: np.random.Generator, d: int, n: int) -> list[SurfacePoint]:
    """Random surface points, uniform in ``t`` and direction."""
    t = rng.uniform(0, 1, n)
    u = _random_directions(rng, n, d)
    return [SurfacePoint(ti * ui, ti) for ti, ui in zip(t, u)]


def sample_solid(rng: np.random.Generator, d: int, n: int) -> list[SolidPoint]:
    """Random solid-cone points, uniform in ``t``, direction and relative radius."""
    t = rng.uniform(0, 1, n)
    rad = rng.uniform(0, 1, n)
    u = _random_directions(rng, n, d)
    return [SolidPoint(ti * ri * ui, ti) for ti, ri, ui in zip(t, rad, u)]
