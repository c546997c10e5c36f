"""Jacobi and Gegenbauer polynomials, the kernels Z_n, and Gauss-Jacobi rules.

Polynomials use the normalization ``P_n^{(a,b)}(1) = binom(n+a, n)``.  Every
quadrature rule integrates against the *probability* measure
``c'_{a,b} (1-t)^a (1+t)^b dt`` on [-1, 1].
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import betainc, betaln, gammaln

from .errors import DomainError, NumericError, ParameterError

__all__ = [
    "EXACT",
    "JacobiParams",
    "QuadratureRule1D",
    "gegenbauer_measure",
    "eval_jacobi",
    "jacobi_table",
    "jacobi_norm",
    "log_jacobi_norm",
    "log_binom",
    "z_scale",
    "eval_Zn",
    "z_table",
    "jacobi_series",
    "z_scale_product",
    "gegenbauer_Z",
    "gauss_jacobi_rule",
    "gauss_legendre_rule",
    "jacobi_tail_mass",
    "symmetric_cdf",
    "gegenbauer_poisson_sum",
]

#: exactness degree reported by rules that *are* the measure (atomic limits)
EXACT = sys.maxsize

_T_SLACK = 1e-12


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the weight ``w_{a,b}(t) = (1-t)^a (1+t)^b``.

    ``degenerate_beta`` marks the limit measure obtained from
    ``c_b (1-u^2)^(b-1/2) du`` as ``b -> -1/2``: the average of the point
    masses at -1 and 1.  It is only meaningful with ``alpha = beta = -1/2``
    and only changes how quadrature rules are built.
    """

    alpha: float
    beta: float
    degenerate_beta: bool = False

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ParameterError(f"non-finite Jacobi parameters ({a}, {b})")
        if a <= -1 or b <= -1:
            raise ParameterError(f"Jacobi parameters must exceed -1, got ({a}, {b})")
        if self.degenerate_beta and not (a == -0.5 and b == -0.5):
            raise ParameterError("the degenerate limit measure is JacobiParams(-0.5, -0.5, True)")

    @classmethod
    def limit_measure(cls) -> "JacobiParams":
        return cls(-0.5, -0.5, True)

    @property
    def log_c(self) -> float:
        a, b = self.alpha, self.beta
        return float(gammaln(a + b + 2) - gammaln(a + 1) - gammaln(b + 1))

    @property
    def c(self) -> float:
        """``c_{a,b} = Gamma(a+b+2) / (Gamma(a+1) Gamma(b+1))``."""
        return math.exp(self.log_c)

    @property
    def c_prime(self) -> float:
        """``c'_{a,b} = c_{a,b} / 2^(a+b+1)``, the inverse mass of ``w_{a,b}``."""
        return math.exp(self.log_c - (self.alpha + self.beta + 1) * math.log(2.0))

    def weight(self, t):
        t = np.asarray(t, dtype=float)
        return (1 - t) ** self.alpha * (1 + t) ** self.beta


def gegenbauer_measure(index: float) -> JacobiParams:
    """Parameters of the normalized measure ``(1-v^2)^(index-1/2) dv``.

    ``index = -1/2`` gives the two-atom limit measure.
    """
    if index == -0.5:
        return JacobiParams.limit_measure()
    return JacobiParams(index - 0.5, index - 0.5)


def _check_degree(n) -> int:
    if isinstance(n, (bool, np.bool_)) or int(n) != n or n < 0:
        raise ParameterError(f"degree must be a nonnegative integer, got {n!r}")
    return int(n)


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + _T_SLACK) or np.any(np.isnan(t)):
        raise DomainError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def _jacobi_iter(N: int, p: JacobiParams, x: np.ndarray):
    """Yield ``P_0(x), ..., P_N(x)`` by the three-term recurrence."""
    a, b = p.alpha, p.beta
    p0 = np.ones_like(x)
    yield p0
    if N == 0:
        return
    p1 = (a + 1) + 0.5 * (a + b + 2) * (x - 1)
    yield p1
    ab = a + b
    for n in range(2, N + 1):
        s = 2 * n + ab
        c1 = 2 * n * (n + ab) * (s - 2)
        c2 = (s - 1) * (a * a - b * b)
        c3 = (s - 2) * (s - 1) * s
        c4 = 2 * (n + a - 1) * (n + b - 1) * s
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
        yield p1


def jacobi_table(N: int, p: JacobiParams, t) -> np.ndarray:
    """Values ``P_n^{(a,b)}(t)`` for ``n = 0..N``, shape ``(N+1,) + t.shape``."""
    N = _check_degree(N)
    t = _check_t(t)
    return np.stack(list(_jacobi_iter(N, p, t)))


def eval_jacobi(n: int, p: JacobiParams, t):
    """Evaluate ``P_n^{(a,b)}(t)``.

    Examples
    --------
    >>> float(eval_jacobi(2, JacobiParams(0, 0), 0.5))
    -0.125
    """
    n = _check_degree(n)
    t = _check_t(t)
    for value in _jacobi_iter(n, p, t):
        pass
    return value[()] if value.ndim == 0 else value


def log_binom(x, k):
    """``log binom(x, k)`` through log-gamma; requires ``x - k > -1``."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(x + 1) - gammaln(k + 1) - gammaln(x - k + 1)


def log_jacobi_norm(n, p: JacobiParams):
    """``log h_n^{(a,b)}`` for an integer array ``n``."""
    n = np.asarray(n, dtype=float)
    a, b = p.alpha, p.beta
    ab = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            gammaln(a + 1 + n) - gammaln(a + 1)
            + gammaln(b + 1 + n) - gammaln(b + 1)
            - gammaln(n + 1)
            - (gammaln(ab + 2 + n) - gammaln(ab + 2))
            + np.log(ab + n + 1) - np.log(ab + 2 * n + 1)
        )
    return np.where(n == 0, 0.0, out)


def jacobi_norm(n: int, p: JacobiParams) -> float:
    """``h_n = c'_{a,b} int P_n^2 w_{a,b}``, evaluated with log-gamma."""
    n = _check_degree(n)
    return float(np.exp(log_jacobi_norm(n, p)))


def z_scale(N: int, p: JacobiParams) -> np.ndarray:
    """The factors ``P_n(1) / h_n`` for ``n = 0..N``."""
    n = np.arange(_check_degree(N) + 1)
    return np.exp(log_binom(n + p.alpha, n) - log_jacobi_norm(n, p))


def z_table(N: int, p: JacobiParams, t) -> np.ndarray:
    """``Z_n^{(a,b)}(t)`` for ``n = 0..N``, shape ``(N+1,) + t.shape``."""
    table = jacobi_table(N, p, t)
    scale = z_scale(N, p)
    return table * scale.reshape((-1,) + (1,) * (table.ndim - 1))


def eval_Zn(n: int, p: JacobiParams, t):
    """``Z_n^{(a,b)}(t) = P_n(1) P_n(t) / h_n``."""
    n = _check_degree(n)
    return eval_jacobi(n, p, t) * z_scale(n, p)[n]


def z_scale_product(N: int, p: JacobiParams, dtype=np.longdouble) -> np.ndarray:
    """``P_n(1) / h_n`` as a running product, in ``dtype`` arithmetic.

    Uses ``P_n(1) / h_n = (a+b+2)_n (a+b+2n+1) / ((b+1)_n (a+b+n+1))``, which
    avoids the float64 rounding of the log-gamma route.
    """
    N = _check_degree(N)
    ab = dtype(p.alpha) + dtype(p.beta)
    b = dtype(p.beta)
    out = np.ones(N + 1, dtype=dtype)
    run = dtype(1)
    for n in range(1, N + 1):
        run *= (ab + 1 + n) / (b + n)
        out[n] = run * (ab + 2 * n + 1) / (ab + n + 1)
    return out


def jacobi_series(coeffs, p: JacobiParams, t, dtype=float) -> np.ndarray:
    """Evaluate ``sum_k coeffs[..., k] Z_k(t)``.

    ``coeffs`` has shape ``(N+1,)`` or ``(K, N+1)``; the result has shape
    ``t.shape`` or ``t.shape + (K,)`` respectively.  With
    ``dtype=np.longdouble`` the recurrence and the scale factors run in
    extended precision, which helps when the sum cancels to near zero; the
    result is returned as float64 either way.
    """
    extended = np.dtype(dtype) != np.dtype(float)
    coeffs = np.asarray(coeffs, dtype=dtype)
    vector = coeffs.ndim == 2
    C = coeffs if vector else coeffs[None, :]
    N = C.shape[1] - 1
    t = _check_t(t)
    scale = z_scale_product(N, p, dtype) if extended else z_scale(N, p)
    scaled = C * scale[None, :]
    x = t.astype(dtype)
    out = np.zeros(t.shape + (C.shape[0],), dtype=dtype)
    for k, pk in enumerate(_jacobi_iter(N, p, x)):
        out += pk[..., None] * scaled[:, k]
    out = out.astype(float)
    return out if vector else out[..., 0]


def gegenbauer_Z(n: int, lam: float, t):
    """``Z_n^lambda = (n+lambda)/lambda C_n^lambda``, via ``Z_n^{(lambda-1/2, lambda-1/2)}``."""
    return eval_Zn(n, JacobiParams(lam - 0.5, lam - 0.5), t)


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes and weights for the normalized measure of ``params``."""

    nodes: np.ndarray
    weights: np.ndarray
    params: JacobiParams
    exactness_degree: int = field(default=EXACT)

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _recurrence(m: int, a: float, b: float):
    """Monic recurrence coefficients (diagonal, off-diagonal) of ``w_{a,b}``."""
    n = np.arange(m, dtype=float)
    ab = a + b
    diag = np.empty(m)
    diag[0] = (b - a) / (ab + 2)
    if m > 1:
        k = n[1:]
        s = 2 * k + ab
        diag[1:] = (b * b - a * a) / (s * (s + 2))
    off = np.empty(max(m - 1, 0))
    if m > 1:
        off[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
        if m > 2:
            k = n[2:m]
            s = 2 * k + ab
            off[1:] = 4 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1) * (s - 1))
    return diag, np.sqrt(off)


@lru_cache(maxsize=512)
def _golub_welsch(m: int, a: float, b: float):
    diag, off = _recurrence(m, a, b)
    if m == 1:
        nodes, weights = diag.copy(), np.ones(1)
    else:
        try:
            nodes, vecs = eigh_tridiagonal(diag, off)
        except LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NumericError(f"tridiagonal eigensolve failed for m={m}") from exc
        weights = vecs[0] ** 2
        weights /= weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi_rule(m: int, p: JacobiParams) -> QuadratureRule1D:
    """Golub-Welsch rule with ``m`` nodes, exact through degree ``2m - 1``.

    The degenerate limit measure returns the two atoms ``{(-1, 1/2), (1, 1/2)}``
    whatever ``m`` is.
    """
    if int(m) != m or m < 1:
        raise ParameterError(f"node count must be a positive integer, got {m!r}")
    if p.degenerate_beta:
        return QuadratureRule1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]), p, EXACT)
    nodes, weights = _golub_welsch(int(m), p.alpha, p.beta)
    return QuadratureRule1D(nodes, weights, p, 2 * int(m) - 1)


def _jacobi_unnorm_rule(m: int, a: float, b: float):
    """Gauss-Jacobi nodes and weights for the unnormalized weight ``w_{a,b}``."""
    rule = gauss_jacobi_rule(m, JacobiParams(a, b))
    mass = math.exp((a + b + 1) * math.log(2.0) + float(betaln(a + 1, b + 1)))
    return rule.nodes, rule.weights * mass


def gauss_legendre_rule(m: int) -> QuadratureRule1D:
    return gauss_jacobi_rule(m, JacobiParams(0.0, 0.0))


def jacobi_tail_mass(p: JacobiParams, x):
    """``c'_{a,b} int_x^1 w_{a,b}(t) dt`` as a regularized incomplete beta."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return betainc(p.alpha + 1, p.beta + 1, 0.5 * (1 - x))


def symmetric_cdf(index: float, v):
    """CDF on [-1, 1] of the normalized measure ``(1-v^2)^(index-1/2) dv``."""
    v = np.clip(np.asarray(v, dtype=float), -1.0, 1.0)
    if index == -0.5:
        return np.where(v >= 1.0, 1.0, np.where(v >= -1.0, 0.5, 0.0))
    return betainc(index + 0.5, index + 0.5, 0.5 * (1 + v))


def gegenbauer_poisson_sum(lam: float, r: float, u):
    """Closed form of ``sum_n Z_n^lambda(u) r^n = (1-r^2) / (1-2ru+r^2)^(lambda+1)``."""
    if lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    if not 0 <= r < 1:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    u = _check_t(u)
    return (1 - r * r) / (1 - 2 * r * u + r * r) ** (lam + 1)
