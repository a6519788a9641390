"""Exhaustive small-instance oracles.

Nothing here uses the dynamic-programming code in :mod:`anonq.distributions`;
outcome probabilities are multiplied out directly so that these functions
can check that code independently.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import DomainError, ScaleError
from .game import AnonymousGame, MixedProfile

MAX_PURE_PLAYERS = 16
MAX_GRID_PLAYERS = 3
MAX_ENUM_COINS = 20


def enumerate_pbd(probs) -> np.ndarray:
    """Count distribution of independent coins, summed over all 2^n outcomes."""
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size > MAX_ENUM_COINS:
        raise ScaleError(f"enumeration limited to {MAX_ENUM_COINS} coins")
    mass = np.zeros(p.size + 1)
    for outcome in itertools.product((False, True), repeat=p.size):
        o = np.array(outcome, dtype=bool)
        mass[o.sum()] += float(np.prod(np.where(o, p, 1.0 - p)))
    return mass


def pure_regret(game: AnonymousGame, actions) -> np.ndarray:
    """Per-player regret of a pure profile, read straight off the tables."""
    a = np.asarray(actions, dtype=int)
    if a.shape != (game.n,):
        raise DomainError("one action per player required")
    on_first = np.count_nonzero(a == 0)
    seen = on_first - (a == 0)
    idx = np.arange(game.n)
    own = game.payoffs[idx, a, seen]
    best = np.maximum(game.payoffs[idx, 0, seen], game.payoffs[idx, 1, seen])
    return best - own


def _all_pure_profiles(n: int) -> np.ndarray:
    codes = np.arange(2**n)
    return (codes[:, None] >> np.arange(n)[::-1]) & 1


def enumerate_pure_ne(game: AnonymousGame, tol: float = 0.0) -> list[np.ndarray]:
    """Every pure profile in which no player gains more than ``tol`` by switching."""
    if game.k != 2:
        raise DomainError("two-strategy games only")
    if game.n > MAX_PURE_PLAYERS:
        raise ScaleError(f"pure enumeration limited to n <= {MAX_PURE_PLAYERS}")
    profiles = _all_pure_profiles(game.n)
    on_first = (profiles == 0).sum(axis=1, keepdims=True)
    seen = on_first - (profiles == 0)
    idx = np.arange(game.n)[None, :]
    own = game.payoffs[idx, profiles, seen]
    other = game.payoffs[idx, 1 - profiles, seen]
    stable = np.all(other - own <= tol, axis=1)
    return [profiles[r] for r in np.flatnonzero(stable)]


def grid_points(grid_step: float) -> np.ndarray:
    m = int(round(1.0 / grid_step))
    if m < 1 or abs(m * grid_step - 1.0) > 1e-9:
        raise DomainError(f"grid_step must divide 1, got {grid_step!r}")
    return np.arange(m + 1) / m


def grid_regrets(game: AnonymousGame, grid_step: float) -> tuple[np.ndarray, np.ndarray]:
    """Largest regret at every point of the grid ``{0, h, .., 1}^n``.

    Returns ``(points, eps)`` where ``eps`` has one axis per player.
    """
    if game.k != 2:
        raise DomainError("two-strategy games only")
    if game.n > MAX_GRID_PLAYERS:
        raise ScaleError(f"grid search limited to n <= {MAX_GRID_PLAYERS}")
    n = game.n
    points = grid_points(grid_step)
    axes = np.meshgrid(*([points] * n), indexing="ij", sparse=True)
    eps = np.zeros((points.size,) * n)
    for i in range(n):
        others = [axes[l] for l in range(n) if l != i]
        # sparse axes keep each player's values on the others' sub-grid only
        values = [0.0, 0.0]
        for outcome in itertools.product((False, True), repeat=n - 1):
            weight = 1.0
            for took_first, p in zip(outcome, others):
                weight = weight * (p if took_first else 1.0 - p)
            count = sum(outcome)
            for j in (0, 1):
                values[j] = values[j] + weight * game.payoffs[i, j, count]
        p_i = axes[i]
        achieved = p_i * values[0] + (1.0 - p_i) * values[1]
        regret = np.maximum(values[0], values[1]) - achieved
        eps = np.maximum(eps, regret)
    return points, eps


def grid_search_min_regret(game: AnonymousGame, grid_step: float) -> tuple[MixedProfile, float]:
    """Grid profile with the smallest epsilon, and that epsilon."""
    points, eps = grid_regrets(game, grid_step)
    best = np.unravel_index(int(np.argmin(eps)), eps.shape)
    return MixedProfile(points[list(best)]), float(eps[best])
