"""Addition-formula kernels on the conic surface and the solid cone.

Every kernel here has the form ``T g(a, b) = E_v[g(2 zeta(a, b; v)^2 - 1)]``
where the expectation runs over a product of symmetric probability measures
``(1 - v^2)^(b - 1/2) dv`` on [-1, 1] (two atoms when ``b = -1/2``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import betaln

from .errors import DomainError, NumericError, ParameterError, ResolutionWarning
from .geometry import MAX_DIM, SolidPoint, SurfacePoint
from .jacobi import (
    JacobiParams,
    QuadratureRule1D,
    _check_degree,
    _jacobi_unnorm_rule,
    _jacobi_iter,
    gauss_jacobi_rule,
    gegenbauer_measure,
    jacobi_series,
    log_binom,
    symmetric_cdf,
    z_scale,
)

__all__ = [
    "AdditionSpec",
    "zeta",
    "xi",
    "apply_T",
    "t_values",
    "reproducing_kernel",
    "tz_table",
    "poisson_kernel_closed",
    "poisson_profile",
    "cesaro_coefficients",
    "cesaro_kernel",
    "indicator_T",
]

CESARO_MAX_N = 10_000
_CHUNK = 2_000_000


@dataclass(frozen=True)
class AdditionSpec:
    """Parameters of the addition formula on one conic domain.

    Surface: ``alpha = gamma + d - 3/2`` with inner axes ``(v1, v2)`` of
    indices ``((d-3)/2, gamma)``.  Solid: ``alpha = gamma + d + 2 mu - 1/2`` with
    axes ``(u, v1, v2)`` of indices ``(mu - 1/2, mu + (d-2)/2, gamma)``.
    In both cases ``beta = -1/2``.
    """

    kind: str
    d: int
    gamma: float
    mu: float = 0.0

    def __post_init__(self):
        if self.kind not in ("surface", "solid"):
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        low = 2 if self.kind == "surface" else 1
        if int(self.d) != self.d or not low <= self.d <= MAX_DIM:
            raise ParameterError(f"dimension {self.d} unsupported for the {self.kind}")
        if self.gamma < -0.5:
            raise ParameterError(f"gamma must be >= -1/2, got {self.gamma}")
        if self.mu < 0 or (self.kind == "surface" and self.mu != 0):
            raise ParameterError(f"invalid mu = {self.mu} for the {self.kind}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def surface(cls, d: int, gamma: float) -> "AdditionSpec":
        return cls("surface", d, gamma)

    @classmethod
    def solid(cls, d: int, gamma: float, mu: float) -> "AdditionSpec":
        return cls("solid", d, gamma, mu)

    @property
    def alpha(self) -> float:
        if self.kind == "surface":
            return self.gamma + self.d - 1.5
        return self.gamma + self.d + 2 * self.mu - 0.5

    @property
    def params(self) -> JacobiParams:
        return JacobiParams(self.alpha, -0.5)

    @property
    def lam(self) -> float:
        return self.alpha + 0.5

    @property
    def axis_indices(self) -> tuple:
        if self.kind == "surface":
            return ((self.d - 3) / 2, self.gamma)
        return (self.mu - 0.5, self.mu + (self.d - 2) / 2, self.gamma)

    @property
    def weight_spec(self) -> tuple:
        return (self.gamma,) if self.kind == "surface" else (self.gamma, self.mu)

    def inner_rules(self, m: int) -> list[QuadratureRule1D]:
        """One rule per inner axis with ``m`` nodes (atoms where degenerate)."""
        return [gauss_jacobi_rule(m, gegenbauer_measure(b)) for b in self.axis_indices]

    def poly_rules(self, n: int) -> list[QuadratureRule1D]:
        """Rules exact for a degree-``n`` polynomial profile ``g``."""
        rules = self.inner_rules(n + 1)
        if self.kind == "solid":
            rules[0] = gauss_jacobi_rule(n // 2 + 1, gegenbauer_measure(self.axis_indices[0]))
        return rules

    def point_type(self):
        return SurfacePoint if self.kind == "surface" else SolidPoint


# ------------------------------------------------------------- pair geometry


def _pair_terms(spec: AdditionSpec, X, T, Y, S):
    """Per-pair scalars: ``(P, Q)`` on the surface, ``(K, H, B)`` on the solid."""
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    T, S = np.asarray(T, float), np.asarray(S, float)
    inner = np.einsum("...i,...i->...", X, Y)
    B = np.sqrt(np.clip(1 - T, 0, None) * np.clip(1 - S, 0, None))
    if spec.kind == "surface":
        return np.sqrt(np.clip(0.5 * (inner + T * S), 0, None)), B
    hx = np.sqrt(np.clip(T * T - np.einsum("...i,...i->...", X, X), 0, None))
    hy = np.sqrt(np.clip(S * S - np.einsum("...i,...i->...", Y, Y), 0, None))
    K = np.clip(0.5 * (inner + T * S), 0, None)
    return K, 0.5 * hx * hy, B


def _fold(rule: QuadratureRule1D):
    """Keep nonnegative nodes of a symmetric rule, doubling the off-center weights."""
    # the center node of an odd symmetric rule is only zero to rounding
    center = np.abs(rule.nodes) <= 1e-12
    keep = (rule.nodes > 0) | center
    w = np.where(center, rule.weights, 2 * rule.weights)
    return np.where(center, 0.0, rule.nodes)[keep], w[keep]


def _product_nodes(spec: AdditionSpec, rules):
    """Flattened product nodes (one array per axis) and weights.

    The v1 axis is folded onto ``v1 >= 0``: ``zeta^2`` is invariant under
    ``(v1, v2) -> (-v1, -v2)`` and both measures are symmetric.
    """
    if spec.kind == "surface":
        r1, r2 = rules
        v1, w1 = _fold(r1)
        g = np.meshgrid(v1, r2.nodes, indexing="ij")
        w = np.outer(w1, r2.weights)
        return (g[0].ravel(), g[1].ravel()), w.ravel()
    ru, r1, r2 = rules
    v1, w1 = _fold(r1)
    g = np.meshgrid(ru.nodes, v1, r2.nodes, indexing="ij")
    w = ru.weights[:, None, None] * w1[None, :, None] * r2.weights[None, None, :]
    return (g[0].ravel(), g[1].ravel(), g[2].ravel()), w.ravel()


def _arguments(spec: AdditionSpec, terms, nodes):
    """``2 zeta^2 - 1`` for every (pair, inner node), shape ``(npairs, nq)``."""
    if spec.kind == "surface":
        P, Q = terms
        v1, v2 = nodes
        z = P[:, None] * v1[None, :] + Q[:, None] * v2[None, :]
    else:
        K, H, B = terms
        u, v1, v2 = nodes
        R = np.sqrt(np.clip(K[:, None] + H[:, None] * u[None, :], 0, None))
        z = R * v1[None, :] + B[:, None] * v2[None, :]
    return np.clip(2 * z * z - 1, -1.0, 1.0)


def zeta(a: SurfacePoint, b: SurfacePoint, v) -> float:
    """``v1 sqrt((ts + <x,y>)/2) + v2 sqrt(1-t) sqrt(1-s)``, clamped to [-1, 1]."""
    v1, v2 = v
    P, Q = _pair_terms(AdditionSpec.surface(max(a.d, 2), 0.0), a.x, a.t, b.x, b.t)
    return float(np.clip(v1 * P + v2 * Q, -1, 1))


def xi(a: SolidPoint, b: SolidPoint, u: float, v) -> float:
    """Solid-cone argument ``v1 sqrt(K + H u) + v2 sqrt(1-t) sqrt(1-s)``."""
    v1, v2 = v
    K, H, B = _pair_terms(AdditionSpec.solid(a.d, 0.0, 0.0), a.x, a.t, b.x, b.t)
    return float(np.clip(v1 * math.sqrt(max(K + H * u, 0.0)) + v2 * B, -1, 1))


def _flatten_pairs(X, T, Y, S):
    """Broadcast point arrays against each other and flatten to pair lists."""
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    T, S = np.broadcast_arrays(np.asarray(T, float), np.asarray(S, float))
    shape = T.shape
    d = X.shape[-1]
    X = np.broadcast_to(X, shape + (d,)).reshape(-1, d)
    Y = np.broadcast_to(Y, shape + (d,)).reshape(-1, d)
    return X, T.reshape(-1), Y, S.reshape(-1), shape


def t_values(spec: AdditionSpec, g: Callable, X, T, Y, S, rules) -> np.ndarray:
    """``T g`` on broadcast point arrays ``(X, T)`` and ``(Y, S)``."""
    X, T, Y, S, shape = _flatten_pairs(X, T, Y, S)
    nodes, w = _product_nodes(spec, rules)
    out = np.empty(T.size)
    step = max(1, _CHUNK // w.size)
    for lo in range(0, T.size, step):
        sl = slice(lo, lo + step)
        terms = _pair_terms(spec, X[sl], T[sl], Y[sl], S[sl])
        out[sl] = np.asarray(g(_arguments(spec, terms, nodes))) @ w
    return out.reshape(shape)


def apply_T(spec: AdditionSpec, g: Callable, a, b, n_inner: int = 32,
            tol: float = 1e-10) -> float:
    """Average of ``g(2 zeta^2 - 1)`` over the inner measures.

    The value is computed with ``n_inner`` and ``2 n_inner`` nodes per axis and
    a ``ResolutionWarning`` is issued when the two differ by more than ``tol``.
    """
    coarse = t_values(spec, g, a.x, a.t, b.x, b.t, spec.inner_rules(n_inner))
    fine = t_values(spec, g, a.x, a.t, b.x, b.t, spec.inner_rules(2 * n_inner))
    if abs(fine - coarse) > tol * max(1.0, abs(fine)):
        warnings.warn(f"inner quadrature moved T g by {abs(fine - coarse):.2e}", ResolutionWarning)
    return float(fine)


def reproducing_kernel(spec: AdditionSpec, n: int, a, b) -> float:
    """``P_n(w; a, b) = T Z_n^{(alpha, -1/2)}(a, b)`` with exact inner rules."""
    n = _check_degree(n)
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    p = spec.params
    g = lambda s: jacobi_series(coeffs, p, s)
    return float(t_values(spec, g, a.x, a.t, b.x, b.t, spec.poly_rules(n)))


def tz_table(spec: AdditionSpec, N: int, X, T, Y, S) -> np.ndarray:
    """``T Z_k`` for ``k = 0..N`` on broadcast point arrays.

    Returns shape ``(N+1,) + broadcast shape``.  One recurrence sweep over the
    inner-node images serves every degree.
    """
    N = _check_degree(N)
    X, T, Y, S, shape = _flatten_pairs(X, T, Y, S)
    nodes, w = _product_nodes(spec, spec.poly_rules(N))
    scale = z_scale(N, spec.params)
    out = np.empty((N + 1, T.size))
    step = max(1, _CHUNK // w.size)
    for lo in range(0, T.size, step):
        sl = slice(lo, lo + step)
        args = _arguments(spec, _pair_terms(spec, X[sl], T[sl], Y[sl], S[sl]), nodes)
        for k, pk in enumerate(_jacobi_iter(N, spec.params, args)):
            out[k, sl] = scale[k] * (pk @ w)
    return out.reshape((N + 1,) + shape)


# ----------------------------------------------------------------- Poisson


def _check_r(r: float) -> float:
    r = float(r)
    if not 0 <= r < 1:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    return r


def _poisson_atoms(alpha: float, r: float, c):
    sr = math.sqrt(r)
    e = alpha + 1.5
    return 0.5 * ((1 - r) / (1 - 2 * sr * c + r) ** e + (1 - r) / (1 + 2 * sr * c + r) ** e)


def poisson_kernel_closed(p: JacobiParams, r: float, t) -> np.ndarray:
    """Closed form of ``q_r(t) = sum_n Z_n^{(alpha,beta)}(t) r^n``.

    For ``beta > -1/2`` the inner integral against ``(1 - u^2)^(beta-1/2)`` is
    evaluated by a Gauss-Jacobi rule sized from the distance of the pole to
    [-1, 1]; for ``beta = -1/2`` it is the two-atom average.
    """
    r = _check_r(r)
    if p.beta < -0.5 or p.alpha < -0.5:
        raise ParameterError("the Poisson closed form needs alpha, beta >= -1/2")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise DomainError("t outside [-1, 1]")
    c = np.sqrt(np.clip(0.5 * (1 + t), 0, 1))
    if r == 0:
        return np.ones_like(t)
    if p.beta == -0.5:
        return _poisson_atoms(p.alpha, r, c)
    sr = math.sqrt(r)
    e = p.alpha + p.beta + 2
    out = np.empty(t.shape)
    flat_c, flat_o = c.reshape(-1), out.reshape(-1)
    # pole of the integrand at u0 >= 1; Bernstein ellipse parameter rho
    u0 = np.minimum((1 + r) / (2 * sr * np.maximum(flat_c, 1e-12)), 1e100)
    rho = u0 + np.sqrt(np.maximum(u0 * u0 - 1, 0))
    log_rho = np.log(np.maximum(rho, 1 + 1e-15))
    m_need = np.log(1e16) / (2 * log_rho) + 10
    m_need = np.clip(np.ceil(m_need), 8, 4000).astype(int)
    measure = gegenbauer_measure(p.beta)
    for m in np.unique(m_need):
        idx = np.nonzero(m_need == m)[0]
        rule = gauss_jacobi_rule(int(m), measure)
        den = 1 - 2 * sr * flat_c[idx, None] * rule.nodes[None, :] + r
        flat_o[idx] = ((1 - r) / den**e) @ rule.weights
    return out


def poisson_profile(p: JacobiParams, r: float) -> Callable:
    """The one-variable function ``t -> q_r^{(alpha,beta)}(t)``."""
    r = _check_r(r)
    return lambda t: poisson_kernel_closed(p, r, np.clip(t, -1, 1))


# ------------------------------------------------------------------ Cesaro


def cesaro_coefficients(n: int, delta: float, dtype=float) -> np.ndarray:
    """``binom(n-k+delta, n-k) / binom(n+delta, n)`` for ``k = 0..n``.

    ``dtype=np.longdouble`` forms the ratios as running products in extended
    precision.
    """
    n = _check_degree(n)
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    if n > CESARO_MAX_N:
        raise NumericError(f"Cesaro degree {n} exceeds {CESARO_MAX_N}")
    if np.dtype(dtype) == np.dtype(float):
        k = np.arange(n + 1)
        return np.exp(log_binom(n - k + delta, n - k) - log_binom(n + delta, n))
    # A_k / A_{k-1} = (k + delta) / k with A_k = binom(k + delta, k)
    A = np.ones(n + 1, dtype=dtype)
    d = dtype(delta)
    for k in range(1, n + 1):
        A[k] = A[k - 1] * (k + d) / k
    return A[::-1] / A[n]


def cesaro_kernel(p: JacobiParams, n: int, delta: float, t) -> np.ndarray:
    """``k_n^delta(t) = sum_k A_{n,k}^delta Z_k^{(alpha,beta)}(t)``.

    Summed in extended precision: the kernel is tiny near ``t = -1`` while
    the terms grow like ``n^{alpha + 1/2}``.
    """
    return jacobi_series(cesaro_coefficients(n, delta, np.longdouble), p, t, np.longdouble)


# ------------------------------------------------- characteristic profiles


def _strip(a, q, c, index):
    """``Pr(|a + q v| >= c)`` for ``v`` from the measure of Gegenbauer index ``index``."""
    if index == -0.5:
        return 0.5 * ((np.abs(a + q) >= c).astype(float) + (np.abs(a - q) >= c))
    qs = np.where(q > 0, q, 1.0)
    if index == 0.5:
        F = lambda x: np.clip(0.5 * (1 + x), 0.0, 1.0)
    else:
        F = lambda x: symmetric_cdf(index, x)
    val = 1 - F((c - a) / qs) + F((-c - a) / qs)
    return np.where(q > 0, val, (np.abs(a) >= c).astype(float))


def _log_mass(e: float) -> float:
    """``log int_{-1}^1 (1-v^2)^e dv``."""
    return (2 * e + 1) * math.log(2.0) + float(betaln(e + 1, e + 1))


def _piecewise(lo, breaks, e: float, m: int):
    """Nodes and weights on ``[lo, 1]`` split at ``breaks``.

    ``lo`` is a per-row array (-1 or 0 typically) and ``breaks`` has shape
    ``(n, K)`` with entries already clipped to ``[lo, 1]``.  Weights integrate
    against ``(1 - v^2)^e dv`` normalized to unit mass on [-1, 1].  Pieces
    touching -1 or 1 absorb the endpoint singularity into a Gauss-Jacobi rule.
    """
    n = breaks.shape[0]
    edges = np.concatenate([lo.reshape(n, 1), np.sort(breaks, axis=1), np.ones((n, 1))], axis=1)
    left, right = edges[:, :-1, None], edges[:, 1:, None]
    ls, rs = left <= -1, right >= 1
    length = right - left
    nodes = np.zeros(left.shape[:2] + (m,))
    wts = np.zeros_like(nodes)
    for lflag in (False, True):
        for rflag in (False, True):
            sel = (ls == lflag) & (rs == rflag)
            if not sel.any():
                continue
            z, wz = _jacobi_unnorm_rule(m, e if rflag else 0.0, e if lflag else 0.0)
            v = left + length * (1 + z) / 2
            with np.errstate(divide="ignore", invalid="ignore"):
                f_right = ((1 - left) / 2) ** e if rflag else (1 - v) ** e
                f_left = ((right + 1) / 2) ** e if lflag else (1 + v) ** e
                w = length / 2 * wz * f_right * f_left
            w = np.where(length > 0, w, 0.0)
            nodes = np.where(sel, v, nodes)
            wts = np.where(sel, w, wts)
    return nodes.reshape(n, -1), wts.reshape(n, -1) * math.exp(-_log_mass(e))


def _even_axis(h, scale, offset_breaks, index, m):
    """``E_v[h(v * scale)]`` for an even ``h`` and a symmetric axis of Gegenbauer ``index``.

    ``offset_breaks`` are the points ``|x|`` where ``h`` is non-smooth; they map
    to ``v = |x| / scale`` on ``[0, 1]``.
    """
    if index == -0.5:
        return h(scale)
    safe = np.where(scale > 0, scale, 1.0)
    br = np.clip(np.stack(offset_breaks, axis=-1) / safe[..., None], 0.0, 1.0)
    br = np.where(scale[..., None] > 0, br, 1.0)
    flat = br.reshape(-1, br.shape[-1])
    v, w = _piecewise(np.zeros(flat.shape[0]), flat, index - 0.5, m)
    v = v.reshape(br.shape[:-1] + (-1,))
    w = w.reshape(v.shape)
    return 2 * np.sum(h(v * scale[..., None]) * w, axis=-1)


def indicator_T(spec: AdditionSpec, theta: float, X, T, Y, S, m: int = 8) -> np.ndarray:
    """``T chi_{[cos theta, 1]}`` on broadcast point arrays.

    Uses ``chi(2 zeta^2 - 1) = 1{|zeta| >= cos(theta/2)}``: the v2 integral is a
    strip probability from the incomplete beta function, and the remaining axes
    are integrated piecewise with ``m`` nodes between the kinks.
    """
    if not 0 <= theta <= math.pi:
        raise DomainError(f"theta = {theta} outside [0, pi]")
    c = math.cos(theta / 2)
    X, T, Y, S, shape = _flatten_pairs(X, T, Y, S)
    terms = _pair_terms(spec, X, T, Y, S)
    if spec.kind == "surface":
        P, Q = terms
        b1, b2 = spec.axis_indices
        h = lambda a: _strip(a, Q[..., None] if np.ndim(a) > 1 else Q, c, b2)
        out = _even_axis(h, P, (c + Q, np.abs(c - Q)), b1, m)
        return out.reshape(shape)
    K, H, B = terms
    bu, b1, b2 = spec.axis_indices

    def inner(R):
        # R has shape (npairs, nu)
        Bn = B[:, None]
        h = lambda a: _strip(a, Bn[..., None] if a.ndim == 3 else Bn, c, b2)
        return _even_axis(h, R, (np.broadcast_to(c + Bn, R.shape), np.broadcast_to(np.abs(c - Bn), R.shape)), b1, m)

    Rsq = lambda u: np.clip(K[:, None] + H[:, None] * u, 0, None)
    if bu == -0.5:
        u = np.array([-1.0, 1.0])
        vals = inner(np.sqrt(Rsq(u[None, :])))
        return (0.5 * vals.sum(axis=1)).reshape(shape)
    Hs = np.where(H > 0, H, 1.0)
    cand = [((c + B) ** 2 - K) / Hs, ((c - B) ** 2 - K) / Hs]
    br = np.clip(np.stack(cand, axis=1), -1.0, 1.0)
    br = np.where(H[:, None] > 0, br, 1.0)
    u, wu = _piecewise(np.full(T.size, -1.0), br, bu - 0.5, m)
    vals = inner(np.sqrt(Rsq(u)))
    return np.sum(vals * wu, axis=1).reshape(shape)
