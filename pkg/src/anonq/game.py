"""Anonymous games, mixed profiles and exact equilibrium verification.

Indexing is zero-based throughout: players are ``0..n-1`` and strategies
``0..k-1``, so the "strategy 1" of the usual notation is index ``0``.  For
two-strategy games a payoff column ``x`` is the number of *other* players
on strategy 0; for ``k > 2`` columns enumerate the partitions of the other
``n - 1`` players in lexicographic order (see
:func:`anonq.distributions.partitions`).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import distributions as dist
from .errors import DomainError, ScaleError

PAYOFF_TOL = 1e-12
DEFAULT_SUPPORT_THRESHOLD = 1e-9

# |partitions of n - 1| must fit in memory for uniform-mix checks
UNIFORM_MIX_MAX_N = {2: None, 3: 80, 4: 40}


@dataclass(frozen=True, eq=False)
class AnonymousGame:
    """Payoff tables ``payoffs[i, j, x]`` for an n-player, k-strategy game.

    Symmetric games can be stored once via :meth:`from_shared`; ``payoffs``
    is then a read-only broadcast view and ``shared`` holds the single table.
    """

    n: int
    k: int
    payoffs: np.ndarray
    shared: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 2:
            raise DomainError("need n >= 1 players and k >= 2 strategies")
        n_cols = self.n if self.k == 2 else math.comb(self.n - 1 + self.k - 1, self.k - 1)
        table = np.asarray(self.payoffs, dtype=float)
        if table.shape != (self.n, self.k, n_cols):
            raise DomainError(
                f"payoffs must have shape {(self.n, self.k, n_cols)}, got {table.shape}"
            )
        check = self.shared if self.shared is not None else table
        if np.any(~np.isfinite(check)):
            raise DomainError("payoffs must be finite")
        if check.min() < -PAYOFF_TOL or check.max() > 1 + PAYOFF_TOL:
            raise DomainError("payoffs must lie in [0, 1]")
        if self.shared is None:
            table = np.clip(table, 0.0, 1.0)
            table.setflags(write=False)
            object.__setattr__(self, "payoffs", table)

    @classmethod
    def from_shared(cls, table, n: int | None = None) -> "AnonymousGame":
        """Symmetric game in which every player uses ``table[j, x]``."""
        shared = np.clip(np.asarray(table, dtype=float), 0.0, 1.0)
        if shared.ndim != 2:
            raise DomainError("shared table must be (k, columns)")
        k = shared.shape[0]
        if n is None:
            if k != 2:
                raise DomainError("n is required for k > 2 shared tables")
            n = shared.shape[1]
        shared.setflags(write=False)
        view = np.broadcast_to(shared, (n,) + shared.shape)
        return cls(n=n, k=k, payoffs=view, shared=shared)

    @property
    def n_columns(self) -> int:
        return self.payoffs.shape[2]

    def partitions(self) -> list[tuple[int, ...]]:
        return dist.partitions(self.n - 1, self.k)

    def payoff(self, player: int, strategy: int, column: int) -> float:
        return float(self.payoffs[player, strategy, column])

    def is_shared(self) -> bool:
        return self.shared is not None


@dataclass(frozen=True)
class MixedProfile:
    """Two-strategy mixed profile: ``probs[i]`` is P(player i plays strategy 0)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise DomainError("profile probabilities must lie in [0, 1]")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_pure(cls, strategies) -> "MixedProfile":
        a = np.asarray(strategies)
        if np.any((a != 0) & (a != 1)):
            raise DomainError("pure two-strategy profiles use indices 0 and 1")
        return cls((a == 0).astype(float))

    @property
    def n(self) -> int:
        return self.probs.size

    def is_pure(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def to_pure(self) -> np.ndarray:
        if not self.is_pure():
            raise DomainError("profile is not pure")
        return np.where(self.probs == 1.0, 0, 1)


@dataclass(frozen=True)
class EquilibriumReport:
    regret: np.ndarray
    ws_slack: np.ndarray
    eps_ne: float
    eps_wsne: float
    support_threshold: float
    # expected payoff of each pure strategy, shape (n, 2)
    strategy_values: np.ndarray = field(repr=False)

    def is_eps_ne(self, eps: float) -> bool:
        return self.eps_ne <= eps

    def is_eps_wsne(self, eps: float) -> bool:
        return self.eps_wsne <= eps

    def to_json(self) -> dict:
        return {
            "regret": self.regret.tolist(),
            "ws_slack": self.ws_slack.tolist(),
            "eps_ne": self.eps_ne,
            "eps_wsne": self.eps_wsne,
            "support_threshold": self.support_threshold,
        }


@dataclass(frozen=True)
class GameClassFlags:
    symmetric: bool
    self_anonymous: bool
    self_symmetric: bool
    step_lipschitz: float


def expected_payoff(game: AnonymousGame, player: int, strategy: int, opponent_pmf) -> float:
    """Expected payoff of a pure strategy against a distribution of opponent counts."""
    mass = opponent_pmf.mass if isinstance(opponent_pmf, dist.Pmf) else np.asarray(opponent_pmf)
    if mass.shape != (game.n_columns,):
        raise DomainError(
            f"opponent pmf has support {mass.shape[0]}, game expects {game.n_columns}"
        )
    return float(np.clip(game.payoffs[player, strategy] @ mass, 0.0, 1.0))


def _strategy_values(game: AnonymousGame, probs: np.ndarray) -> np.ndarray:
    """Expected payoff of each strategy for each player, shape (n, 2).

    Players with the same mixing probability share one leave-one-out pmf,
    so pure profiles and two-level profiles cost two PBD computations.
    """
    n = game.n
    values = np.empty((n, 2))
    levels, inverse = np.unique(probs, return_inverse=True)
    for g, level in enumerate(levels):
        members = np.flatnonzero(inverse == g)
        others = np.delete(probs, members[0])
        mass = dist.pbd_mass(others)
        if game.is_shared():
            values[members] = game.shared @ mass
        else:
            values[members] = game.payoffs[members] @ mass
    np.clip(values, 0.0, 1.0, out=values)
    return values


def evaluate_profile(
    game: AnonymousGame,
    profile: MixedProfile,
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> EquilibriumReport:
    """Per-player regret and well-supported slack of a two-strategy profile."""
    if game.k != 2:
        raise DomainError("evaluate_profile handles two-strategy games")
    if profile.n != game.n:
        raise DomainError(f"profile has {profile.n} players, game has {game.n}")
    if support_threshold < 0:
        raise DomainError("support_threshold must be non-negative")
    p = profile.probs
    values = _strategy_values(game, p)
    best = values.max(axis=1)
    achieved = p * values[:, 0] + (1.0 - p) * values[:, 1]
    regret = np.maximum(best - achieved, 0.0)
    gaps = best[:, None] - values
    supported = np.stack([p > support_threshold, (1.0 - p) > support_threshold], axis=1)
    ws_slack = np.where(supported, gaps, 0.0).max(axis=1)
    return EquilibriumReport(
        regret=regret,
        ws_slack=ws_slack,
        eps_ne=float(regret.max()),
        eps_wsne=float(ws_slack.max()),
        support_threshold=float(support_threshold),
        strategy_values=values,
    )


def _neighbour_pairs(n_others: int, k: int):
    """Column index pairs of partitions one player-move apart."""
    if k == 2:
        x = np.arange(n_others)
        return x, x + 1
    index = dist.partition_index(n_others, k)
    left, right = [], []
    for part, i in index.items():
        for a in range(k):
            if part[a] == 0:
                continue
            for b in range(k):
                if b == a:
                    continue
                moved = list(part)
                moved[a] -= 1
                moved[b] += 1
                j = index[tuple(moved)]
                if i < j:
                    left.append(i)
                    right.append(j)
    return np.array(left, dtype=int), np.array(right, dtype=int)


def step_lipschitz_constant(game: AnonymousGame) -> float:
    """Largest payoff change when one opponent switches strategy."""
    if game.n == 1:
        return 0.0
    table = game.shared[None] if game.is_shared() else game.payoffs
    left, right = _neighbour_pairs(game.n - 1, game.k)
    if left.size == 0:
        return 0.0
    return float(np.abs(table[:, :, right] - table[:, :, left]).max())


def _is_self_anonymous(game: AnonymousGame, tol: float) -> bool:
    table = game.shared[None] if game.is_shared() else game.payoffs
    if game.k == 2:
        if game.n == 1:
            return True
        return bool(np.all(np.abs(table[:, 0, :-1] - table[:, 1, 1:]) <= tol))
    index = dist.partition_index(game.n - 1, game.k)
    for part, col in index.items():
        for l in range(game.k):
            if part[l] == 0:
                continue
            for j in range(game.k):
                if j == l:
                    continue
                moved = list(part)
                moved[j] += 1
                moved[l] -= 1
                other = index[tuple(moved)]
                if np.any(np.abs(table[:, j, col] - table[:, l, other]) > tol):
                    return False
    return True


def classify(game: AnonymousGame, tol: float = PAYOFF_TOL) -> GameClassFlags:
    if game.is_shared():
        symmetric = True
    else:
        symmetric = bool(np.all(np.abs(game.payoffs - game.payoffs[0]) <= tol))
    self_anon = _is_self_anonymous(game, tol)
    return GameClassFlags(
        symmetric=symmetric,
        self_anonymous=self_anon,
        self_symmetric=symmetric and self_anon,
        step_lipschitz=step_lipschitz_constant(game),
    )


def smoothed_game_exact(game: AnonymousGame, zeta: float) -> AnonymousGame:
    """Game whose payoff at count x averages the original over the two-block PBD.

    Row ``x`` of the smoothing matrix is the law of the other players' count
    when ``x`` of them play strategy 0 w.p. ``1 - zeta`` and the rest w.p.
    ``zeta``.
    """
    if game.k != 2:
        raise DomainError("smoothing is defined for two-strategy games")
    weights = dist.smoothing_matrix(game.n - 1, zeta)
    if game.is_shared():
        return AnonymousGame.from_shared(np.clip(game.shared @ weights.T, 0.0, 1.0), n=game.n)
    # a 2-D product hits BLAS directly; batched 3-D matmul is much slower
    flat = game.payoffs.reshape(-1, game.n_columns) @ weights.T
    smoothed = flat.reshape(game.payoffs.shape)
    np.clip(smoothed, 0.0, 1.0, out=smoothed)
    return AnonymousGame(n=game.n, k=2, payoffs=smoothed)


def uniform_mix_regret_k(game: AnonymousGame) -> float:
    """Largest payoff gap between two strategies when everyone mixes uniformly.

    Under full support this equals the profile's well-supported epsilon.
    """
    k, n = game.k, game.n
    if k > dist.MAX_PMD_STRATEGIES:
        raise ScaleError(f"uniform-mix check supports k <= {dist.MAX_PMD_STRATEGIES}")
    limit = UNIFORM_MIX_MAX_N[k]
    if limit is not None and n > limit:
        raise ScaleError(f"k={k} uniform-mix check supports n <= {limit}, got {n}")
    if k == 2:
        mass = dist.pbd_mass(np.full(n - 1, 0.5))
    else:
        mass = dist.pmd_pmf(np.full((n - 1, k), 1.0 / k)).as_vector()
    table = game.shared[None] if game.is_shared() else game.payoffs
    values = table @ mass
    return float((values.max(axis=1) - values.min(axis=1)).max())


# -- JSON ------------------------------------------------------------------


def game_to_json(game: AnonymousGame, compact: bool = False) -> dict:
    """``{"n", "k", "payoffs"}`` with ``payoffs[i][j][x]``.

    ``compact=True`` on a shared-table game writes a single player table
    (``payoffs`` of length 1) plus ``"shared": true``.
    """
    if compact and game.is_shared():
        return {"n": game.n, "k": game.k, "shared": True, "payoffs": [game.shared.tolist()]}
    return {"n": game.n, "k": game.k, "payoffs": np.asarray(game.payoffs).tolist()}


def game_from_json(data: dict) -> AnonymousGame:
    try:
        n, k, payoffs = int(data["n"]), int(data["k"]), data["payoffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed game JSON: {exc}") from exc
    if data.get("shared"):
        if len(payoffs) != 1:
            raise DomainError("shared game JSON must hold exactly one table")
        return AnonymousGame.from_shared(payoffs[0], n=n)
    return AnonymousGame(n=n, k=k, payoffs=np.asarray(payoffs, dtype=float))


def profile_to_json(profile: MixedProfile) -> dict:
    return {"probs": profile.probs.tolist()}


def profile_from_json(data: dict) -> MixedProfile:
    try:
        return MixedProfile(np.asarray(data["probs"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed profile JSON: {exc}") from exc


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
