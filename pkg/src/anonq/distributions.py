"""Exact count distributions for anonymous games.

Everything here is double precision.  Mass vectors are clamped at zero
after each dynamic-programming step so that round-off never produces
negative probabilities.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError, ScaleError

PROB_TOL = 1e-12
MAX_PMD_STRATEGIES = 4


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over the counts ``0..len(mass)-1``."""

    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 1 or mass.size == 0:
            raise DomainError("pmf mass must be a non-empty vector")
        if np.any(mass < 0) or np.any(mass > 1 + PROB_TOL):
            raise DomainError("pmf entries must lie in [0, 1]")
        if abs(mass.sum() - 1.0) > 1e-9:
            raise DomainError(f"pmf sums to {mass.sum()!r}, not 1")
        mass = mass.copy()
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def support_size(self) -> int:
        return self.mass.size

    def __len__(self) -> int:
        return self.mass.size

    def __getitem__(self, i):
        return self.mass[i]

    def max_mass(self) -> float:
        return float(self.mass.max())


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise DomainError("probabilities must lie in [0, 1]")
    return p


def pbd_mass(probs) -> np.ndarray:
    """Raw mass vector of a Poisson binomial distribution.

    Adds one coin at a time:
    ``P_m[i] = (1 - p_m) * P_{m-1}[i] + p_m * P_{m-1}[i - 1]``.
    """
    p = _check_probs(probs)
    mass = np.zeros(p.size + 1)
    mass[0] = 1.0
    for m, pm in enumerate(p, start=1):
        # RHS is materialised before assignment, so every cell reads step m - 1
        mass[1 : m + 1] = (1.0 - pm) * mass[1 : m + 1] + pm * mass[0:m]
        mass[0] *= 1.0 - pm
    np.clip(mass, 0.0, 1.0, out=mass)
    return mass


def pbd_pmf(probs: Sequence[float]) -> Pmf:
    """Distribution of the number of successes among independent coins."""
    return Pmf(pbd_mass(probs))


def _binom_mass(m: int, p: float) -> np.ndarray:
    if m == 0:
        return np.ones(1)
    return stats.binom.pmf(np.arange(m + 1), m, p)


def _check_zeta(zeta: float) -> float:
    if not (0.0 < zeta <= 0.5):
        raise DomainError(f"zeta must lie in (0, 1/2], got {zeta!r}")
    return float(zeta)


def two_block_mass(n_high: int, n_low: int, zeta: float) -> np.ndarray:
    """Mass of ``n_high`` coins at ``1 - zeta`` plus ``n_low`` coins at ``zeta``."""
    zeta = _check_zeta(zeta)
    if n_high < 0 or n_low < 0:
        raise DomainError("coin counts must be non-negative")
    mass = np.convolve(_binom_mass(n_high, 1.0 - zeta), _binom_mass(n_low, zeta))
    np.clip(mass, 0.0, 1.0, out=mass)
    return mass


def two_block_pmf(n_high: int, n_low: int, zeta: float) -> Pmf:
    return Pmf(two_block_mass(n_high, n_low, zeta))


@functools.lru_cache(maxsize=16)
def smoothing_matrix(n_others: int, zeta: float) -> np.ndarray:
    """Row ``x`` is the pmf of ``x`` coins at ``1 - zeta`` and the rest at ``zeta``.

    Shape ``(n_others + 1, n_others + 1)``.  Cached and read-only.
    """
    zeta = _check_zeta(zeta)
    size = n_others + 1
    out = np.empty((size, size))
    for x in range(size):
        out[x] = two_block_mass(x, n_others - x, zeta)
    out.setflags(write=False)
    return out


def tv_distance(a, b) -> float:
    """Total variation distance ``0.5 * sum |a - b|``."""
    ma = a.mass if isinstance(a, Pmf) else np.asarray(a, dtype=float)
    mb = b.mass if isinstance(b, Pmf) else np.asarray(b, dtype=float)
    if ma.shape != mb.shape:
        raise DomainError(f"support mismatch: {ma.shape} vs {mb.shape}")
    return float(0.5 * np.abs(ma - mb).sum())


def binomial_mode_bound(n: int, zeta: float) -> float:
    """Upper bound on the largest mass of Binomial(n, p) for p in [zeta, 1 - zeta]."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not (0.0 < zeta < 0.5):
        raise DomainError(f"zeta must lie in (0, 1/2), got {zeta!r}")
    return math.e / (2.0 * math.pi * zeta * math.sqrt(n)) * (1.0 + 1.0 / (zeta * n))


# -- Poisson multinomial ---------------------------------------------------


def partitions(total: int, k: int) -> list[tuple[int, ...]]:
    """All k-tuples of non-negative ints summing to ``total``, lexicographic."""
    if k == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in partitions(total - first, k - 1):
            out.append((first,) + rest)
    return out


@functools.lru_cache(maxsize=64)
def partition_index(total: int, k: int) -> dict[tuple[int, ...], int]:
    return {part: i for i, part in enumerate(partitions(total, k))}


@dataclass(frozen=True)
class PartitionPmf:
    """Distribution over the ways to split ``n`` players among ``k`` strategies."""

    n: int
    k: int
    mass: Mapping[tuple[int, ...], float]

    def __getitem__(self, part) -> float:
        return self.mass[tuple(part)]

    def as_vector(self) -> np.ndarray:
        """Masses ordered like ``partitions(n, k)``."""
        return np.array([self.mass[p] for p in partitions(self.n, self.k)])


def pmd_pmf(prob_vectors) -> PartitionPmf:
    """Exact law of a sum of independent categorical vectors.

    ``prob_vectors`` has one row per player; row ``i`` gives player ``i``'s
    distribution over ``k`` strategies.
    """
    rows = np.asarray(prob_vectors, dtype=float)
    if rows.ndim != 2:
        raise DomainError("prob_vectors must be an (n, k) array")
    n, k = rows.shape
    if k > MAX_PMD_STRATEGIES:
        raise ScaleError(f"pmd_pmf supports k <= {MAX_PMD_STRATEGIES}, got {k}")
    if k < 1:
        raise DomainError("need at least one strategy")
    if np.any(rows < 0) or np.any(rows > 1):
        raise DomainError("probabilities must lie in [0, 1]")
    if n and np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-9:
        raise DomainError("each row must sum to 1")

    # dense table over (x_1, .., x_{k-1}); x_k is implied by the player count
    table = np.zeros((n + 1,) * (k - 1)) if k > 1 else np.ones(1)
    if k > 1:
        table[(0,) * (k - 1)] = 1.0
        for row in rows:
            new = table * row[k - 1]
            for j in range(k - 1):
                shifted = np.zeros_like(table)
                src = [slice(None)] * (k - 1)
                dst = [slice(None)] * (k - 1)
                src[j] = slice(0, n)
                dst[j] = slice(1, n + 1)
                shifted[tuple(dst)] = table[tuple(src)]
                new += row[j] * shifted
            table = new
        np.clip(table, 0.0, 1.0, out=table)

    mass = {}
    for part in partitions(n, k):
        mass[part] = float(table[part[:-1]]) if k > 1 else 1.0
    return PartitionPmf(n=n, k=k, mass=mass)

