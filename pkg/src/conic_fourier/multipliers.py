"""Multiplier sequences, the Marcinkiewicz condition and an L^p harness."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import comb

from .errors import DomainError, ParameterError
from .expansion import SampledFunction, _check_grid, _projections, lp_norm
from .geometry import WeightedGrid
from .kernels import AdditionSpec

__all__ = [
    "MultiplierSequence",
    "difference",
    "difference_binomial",
    "marcinkiewicz_blocks",
    "marcinkiewicz_bound",
    "thresholds",
    "operator_norm_l2",
    "VerdictTable",
    "boundedness_experiment",
    "UNIFORM",
    "NOT_UNIFORM",
]

UNIFORM = "consistent with uniform bound"
NOT_UNIFORM = "not consistent with uniform bound"
DEFAULT_CAP = 1 << 16


@dataclass(frozen=True)
class MultiplierSequence:
    """A real sequence ``mu_0, mu_1, ...`` given by a vectorized rule.

    Values beyond ``length_cap`` are not available; finitely supported
    sequences are zero past their support.
    """

    name: str
    rule: Callable[[np.ndarray], np.ndarray]
    length_cap: int = DEFAULT_CAP
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def head(self, n: int) -> np.ndarray:
        """The first ``n`` values."""
        if n > self.length_cap:
            raise DomainError(f"{self.name} is capped at {self.length_cap} terms, asked for {n}")
        have = self._memo.get("values")
        if have is None or have.size < n:
            size = max(n, 64 if have is None else 2 * have.size)
            size = min(size, self.length_cap)
            have = np.asarray(self.rule(np.arange(size)), dtype=float)
            have.setflags(write=False)
            self._memo["values"] = have
        return have[:n]

    def __getitem__(self, j: int) -> float:
        return float(self.head(j + 1)[j])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.head(min(self.length_cap, 4096)))))

    # generators

    @classmethod
    def from_values(cls, values, name: str = "finite") -> "MultiplierSequence":
        vals = np.asarray(values, dtype=float).copy()

        def rule(j):
            out = np.zeros(j.shape)
            inside = j < vals.size
            out[inside] = vals[j[inside]]
            return out

        return cls(name, rule)

    @classmethod
    def constant(cls, c: float = 1.0) -> "MultiplierSequence":
        return cls(f"const{c:g}", lambda j: np.full(j.shape, float(c)))

    @classmethod
    def riesz(cls, N: int, k: int) -> "MultiplierSequence":
        """``(1 - j/N)_+^k``."""
        return cls(f"riesz_N{N}_k{k}", lambda j: np.clip(1 - j / N, 0, None) ** k)

    @classmethod
    def alternating(cls) -> "MultiplierSequence":
        return cls("alternating", lambda j: np.where(j % 2 == 0, 1.0, -1.0))

    @classmethod
    def geometric(cls, r: float) -> "MultiplierSequence":
        return cls(f"geometric{r:g}", lambda j: float(r) ** j)

    @classmethod
    def delta(cls, m: int) -> "MultiplierSequence":
        return cls(f"delta{m}", lambda j: (j == m).astype(float))

    @classmethod
    def power(cls, p: float) -> "MultiplierSequence":
        return cls(f"power{p:g}", lambda j: j.astype(float) ** p)


def _check_order(k: int, ell: int) -> None:
    if int(k) != k or k < 0 or int(ell) != ell or ell < 0:
        raise DomainError(f"order and index must be nonnegative integers, got k={k}, ell={ell}")


def difference(seq: MultiplierSequence, k: int, ell: int) -> float:
    """``Delta^k mu_ell`` with ``Delta mu_j = mu_j - mu_{j+1}``.

    Examples
    --------
    >>> difference(MultiplierSequence.power(2), 2, 3)
    2.0
    """
    _check_order(k, ell)
    vals = seq.head(ell + k + 1)[ell:]
    for _ in range(k):
        vals = vals[:-1] - vals[1:]
    return float(vals[0])


def difference_binomial(seq: MultiplierSequence, k: int, ell: int) -> float:
    """``sum_i (-1)^i binom(k, i) mu_{ell+i}``, the closed form of ``Delta^k``."""
    _check_order(k, ell)
    vals = seq.head(ell + k + 1)[ell:]
    coeffs = np.array([(-1) ** i * comb(k, i, exact=True) for i in range(k + 1)], dtype=float)
    return float(coeffs @ vals)


def _differences(seq: MultiplierSequence, k: int, n: int) -> np.ndarray:
    vals = seq.head(n + k)
    for _ in range(k):
        vals = vals[:-1] - vals[1:]
    return vals


def marcinkiewicz_blocks(seq: MultiplierSequence, k: int, J: int) -> np.ndarray:
    """``2^{j(k-1)} sum_{ell = 2^j + 1}^{2^{j+1}} |Delta^k mu_ell|`` for ``j = 0..J``."""
    _check_order(k, 0)
    if int(J) != J or J < 0:
        raise DomainError(f"J must be a nonnegative integer, got {J}")
    diffs = np.abs(_differences(seq, k, 2 ** (J + 1) + 1))
    return np.array([2.0 ** (j * (k - 1)) * diffs[2**j + 1: 2 ** (j + 1) + 1].sum() for j in range(J + 1)])


def marcinkiewicz_bound(seq: MultiplierSequence, k: int, J: int) -> float:
    """Largest dyadic block value of the Marcinkiewicz condition up to ``J``."""
    return float(np.max(marcinkiewicz_blocks(seq, k, J)))


def thresholds(spec: AdditionSpec) -> dict:
    """Difference orders required by the general and the domain-specific statements.

    ``general`` is ``floor(delta_0 + 1)`` with ``delta_0 = max(alpha, beta) + 1/2``;
    ``domain`` is ``floor(d + gamma)`` on the surface and
    ``floor(d + gamma + 2 mu)`` on the solid cone.
    """
    delta0 = max(spec.alpha, -0.5) + 0.5
    extra = 0.0 if spec.kind == "surface" else 2 * spec.mu
    return {"general": int(math.floor(delta0 + 1)), "domain": int(math.floor(spec.d + spec.gamma + extra))}


def operator_norm_l2(spec: AdditionSpec, seq, N: int, grid: WeightedGrid) -> float:
    """``L^2(w)`` norm of ``f -> sum_{k <= N} mu_k proj_k f`` on grid functions.

    The operator matrix ``M`` is symmetrized as ``W^{1/2} M W^{-1/2}``.
    """
    _check_grid(spec, grid)
    coeffs = np.asarray(seq.head(N + 1) if hasattr(seq, "head") else seq, dtype=float)[: N + 1]
    n = len(grid)
    vals, _, _ = _projections(spec, np.eye(n), N, None, grid)
    M = np.tensordot(coeffs, vals, axes=(0, 0))
    sw = np.sqrt(grid.weights)
    A = sw[:, None] * M / sw[None, :]
    return float(np.linalg.norm(A, 2))


@dataclass
class VerdictTable:
    """Ratios ``||T_mu f||_p / ||f||_p`` and per-(sequence, p) verdicts."""

    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    spread: float = 0.25

    def to_csv(self, path) -> None:
        cols = ["sequence", "k", "marcinkiewicz", "p", "N", "f", "ratio"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow([r[c] if not isinstance(r[c], float) else repr(float(r[c])) for c in cols])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"spread": self.spread, "verdicts": self.verdicts}, fh, indent=2, sort_keys=True)

    def verdict(self, sequence: str, p: float) -> dict:
        for v in self.verdicts:
            if v["sequence"] == sequence and v["p"] == p:
                return v
        raise KeyError((sequence, p))


def boundedness_experiment(spec: AdditionSpec, families: Mapping[str, Callable[[int], MultiplierSequence]],
                           fs: Sequence[SampledFunction], p_list: Sequence[float], N_list: Sequence[int],
                           grid: WeightedGrid, k: Optional[int] = None, spread: float = 0.25) -> VerdictTable:
    """Empirical ``L^p`` ratios of multiplier operators over a battery.

    ``families`` maps a name to ``N -> MultiplierSequence``.  For each family,
    ``p`` and ``N`` the largest ratio over the battery is recorded; the verdict
    is uniform when these maxima vary by less than ``spread`` (relative to the
    smallest) across ``N_list``.
    """
    k = thresholds(spec)["domain"] if k is None else k
    Nmax = max(N_list)
    F = np.column_stack([f.on(grid) for f in fs])
    vals, _, _ = _projections(spec, F, Nmax, None, grid)
    table = VerdictTable(spread=spread)
    for name, family in families.items():
        for p in p_list:
            maxima = []
            for N in N_list:
                seq = family(N)
                J = max(0, math.ceil(math.log2(max(N, 1))))
                mb = marcinkiewicz_bound(seq, k, J)
                out = np.tensordot(seq.head(N + 1), vals[: N + 1], axes=(0, 0))
                ratios = []
                for i, f in enumerate(fs):
                    num = lp_norm(out[:, i], p, grid)
                    den = lp_norm(F[:, i], p, grid)
                    ratio = num / den
                    ratios.append(ratio)
                    table.rows.append(dict(sequence=name, k=k, marcinkiewicz=mb, p=float(p), N=N,
                                           f=f.name, ratio=float(ratio)))
                maxima.append(max(ratios))
            variation = max(maxima) / min(maxima) - 1
            table.verdicts.append(dict(sequence=name, p=float(p), maxima=[float(m) for m in maxima],
                                       N=list(N_list), variation=float(variation),
                                       verdict=UNIFORM if variation < spread else NOT_UNIFORM))
    return table
