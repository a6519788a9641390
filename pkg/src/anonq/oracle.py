"""Black-box payoff queries with exact cost accounting.

Three query kinds are supported:

* single payoff (SP): one player's payoff for one strategy and opponent count;
* all players (AP): every player's payoff for one strategy and opponent count;
* profile (PR): every player's payoff under a pure action profile.

An SP query costs one payoff unit; AP and PR queries cost ``n``.  Every call
is charged, including repeats of an earlier query.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .errors import DomainError
from .game import AnonymousGame, smoothed_game_exact


@dataclass
class QueryLedger:
    n: int
    single_payoff_count: int = 0
    all_players_count: int = 0
    profile_count: int = 0

    @property
    def payoff_units(self) -> int:
        return self.single_payoff_count + self.n * (self.all_players_count + self.profile_count)

    def to_json(self) -> dict:
        return {
            "sp": self.single_payoff_count,
            "ap": self.all_players_count,
            "pr": self.profile_count,
            "payoff_units": self.payoff_units,
        }

    def snapshot(self) -> tuple[int, int, int]:
        return (self.single_payoff_count, self.all_players_count, self.profile_count)


class TableOracle:
    """Answers queries from a full payoff table, two-strategy games only."""

    def __init__(self, game: AnonymousGame):
        if game.k != 2:
            raise DomainError("oracles are implemented for two-strategy games")
        self.game = game
        self.n = game.n
        self.k = game.k
        self.ledger = QueryLedger(n=game.n)

    def _check(self, strategy: int, count) -> None:
        if not 0 <= strategy < self.k:
            raise DomainError(f"strategy index {strategy} out of range")
        c = np.asarray(count)
        if np.any(c < 0) or np.any(c > self.n - 1):
            raise DomainError(f"opponent count {count} outside 0..{self.n - 1}")

    def single_payoff(self, player: int, strategy: int, count: int) -> float:
        if not 0 <= player < self.n:
            raise DomainError(f"player {player} out of range")
        self._check(strategy, count)
        self.ledger.single_payoff_count += 1
        return float(self.game.payoffs[player, strategy, count])

    def all_players(self, strategy: int, count: int) -> np.ndarray:
        self._check(strategy, count)
        self.ledger.all_players_count += 1
        return np.array(self.game.payoffs[:, strategy, count])

    def all_players_many(self, strategy: int, counts) -> np.ndarray:
        """One AP query per entry of ``counts``; rows of the result follow ``counts``."""
        counts = np.asarray(counts, dtype=int)
        self._check(strategy, counts)
        self.ledger.all_players_count += counts.size
        return np.array(self.game.payoffs[:, strategy, counts].T)

    def profile(self, actions) -> np.ndarray:
        a = np.asarray(actions, dtype=int)
        if a.shape != (self.n,) or np.any((a < 0) | (a >= self.k)):
            raise DomainError("profile must assign a strategy index to every player")
        self.ledger.profile_count += 1
        on_first = int(np.count_nonzero(a == 0))
        # a player on strategy 0 excludes itself from the count it sees
        counts = on_first - (a == 0)
        return np.array(self.game.payoffs[np.arange(self.n), a, counts])


def table_oracle(game: AnonymousGame) -> TableOracle:
    return TableOracle(game)


def exact_smoothed_oracle(game: AnonymousGame, zeta: float) -> TableOracle:
    """Table oracle over the exactly smoothed game (zero query error)."""
    return TableOracle(smoothed_game_exact(game, zeta))


def profile_via_all_players(oracle, actions) -> np.ndarray:
    """Answer a profile query with one AP query per strategy in use."""
    a = np.asarray(actions, dtype=int)
    on_first = int(np.count_nonzero(a == 0))
    out = np.empty(a.size)
    for j in (0, 1):
        members = a == j
        if not members.any():
            continue
        count = on_first - 1 if j == 0 else on_first
        out[members] = oracle.all_players(j, count)[members]
    return out


def all_players_via_profiles(oracle, strategy: int, count: int) -> np.ndarray:
    """Answer an AP query ``(strategy, count)`` with rotating profile queries.

    Each profile places a block of players on ``strategy`` so that every
    block member sees exactly ``count`` others on strategy 0.  For strategy 0
    the block has ``count + 1`` players; for strategy 1 it has ``n - count``
    players and ``count`` of the remaining players sit on strategy 0.
    """
    n = oracle.n
    if not 0 <= count <= n - 1:
        raise DomainError(f"opponent count {count} outside 0..{n - 1}")
    block = count + 1 if strategy == 0 else n - count
    out = np.empty(n)
    for start in range(0, n, block):
        members = (start + np.arange(block)) % n
        actions = np.full(n, 1 - strategy)
        actions[members] = strategy
        answer = oracle.profile(actions)
        out[members] = answer[members]
    return out


@dataclass(frozen=True)
class AccurateQueryConfig:
    delta: float
    tau: float
    samples_per_query: int

    @classmethod
    def for_game(cls, n: int, delta: float, tau: float) -> "AccurateQueryConfig":
        """Hoeffding sample size for ``2n`` estimates within ``delta`` w.p. ``1 - tau``."""
        if not (0 < delta < 1 and 0 < tau < 1):
            raise DomainError("delta and tau must lie in (0, 1)")
        samples = math.ceil(math.log(4 * n / tau) / (2 * delta**2))
        return cls(delta=delta, tau=tau, samples_per_query=samples)


def sampled_smoothed_all_players(
    oracle,
    strategy: int,
    count: int,
    zeta: float,
    cfg: AccurateQueryConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Estimate every player's smoothed payoff at ``count`` from sampled AP queries.

    Each sample sums ``n - 1`` coin flips: ``count`` at ``1 - zeta`` and the
    rest at ``zeta``.  The estimate is the per-player mean over samples.
    """
    n = oracle.n
    if not 0 < zeta <= 0.5:
        raise DomainError(f"zeta must lie in (0, 1/2], got {zeta!r}")
    biases = np.where(np.arange(n - 1) < count, 1.0 - zeta, zeta)
    flips = rng.random((cfg.samples_per_query, n - 1)) < biases
    samples = flips.sum(axis=1)
    if hasattr(oracle, "all_players_many"):
        answers = oracle.all_players_many(strategy, samples)
    else:
        answers = np.stack([oracle.all_players(strategy, int(y)) for y in samples])
    return answers.mean(axis=0)


class SampledSmoothedOracle:
    """delta-accurate (w.h.p.) all-players access to the smoothed game.

    Every call draws fresh samples and charges ``samples_per_query`` AP
    queries to the wrapped oracle.
    """

    def __init__(self, oracle, zeta: float, cfg: AccurateQueryConfig, rng: np.random.Generator):
        self.inner = oracle
        self.n = oracle.n
        self.zeta = zeta
        self.cfg = cfg
        self.rng = rng
        self.simulated_queries = 0

    @property
    def ledger(self) -> QueryLedger:
        return self.inner.ledger

    def all_players(self, strategy: int, count: int) -> np.ndarray:
        self.simulated_queries += 1
        return sampled_smoothed_all_players(
            self.inner, strategy, count, self.zeta, self.cfg, self.rng
        )


class NoisyOracle:
    """AP answers perturbed by independent uniform noise in ``[-delta, delta]``."""

    def __init__(self, oracle, delta: float, rng: np.random.Generator):
        self.inner = oracle
        self.n = oracle.n
        self.delta = delta
        self.rng = rng

    @property
    def ledger(self) -> QueryLedger:
        return self.inner.ledger

    def all_players(self, strategy: int, count: int) -> np.ndarray:
        exact = self.inner.all_players(strategy, count)
        return exact + self.rng.uniform(-self.delta, self.delta, size=exact.shape)
