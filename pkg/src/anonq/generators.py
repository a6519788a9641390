"""Constructors for named instances and random game families.

All constructors are deterministic given their arguments; randomness comes
from ``numpy.random.default_rng(seed)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .errors import ConstructionError, DomainError, ScaleError
from .game import AnonymousGame

MAX_LCP_K = 14

FAMILIES = (
    "majority-minority",
    "irrational3",
    "hidden-minority",
    "lcp",
    "random-general",
    "random-symmetric",
    "random-selfanon",
    "random-lipschitz",
    "step-selfanon",
)


def gen_majority_minority(n: int) -> AnonymousGame:
    """Half the players want to join the majority on strategy 0, half avoid it.

    Strategy 1 always pays 1/2.  Strategy 0 pays ``(2x + 1) / (2n)`` to
    majority seekers (players ``0..n/2-1``) and one minus that to the rest.
    """
    if n < 2 or n % 2:
        raise DomainError(f"majority-minority needs an even n >= 2, got {n}")
    ramp = (2 * np.arange(n) + 1) / (2 * n)
    payoffs = np.empty((n, 2, n))
    payoffs[:, 1, :] = 0.5
    payoffs[: n // 2, 0, :] = ramp
    payoffs[n // 2 :, 0, :] = 1.0 - ramp
    return AnonymousGame(n=n, k=2, payoffs=payoffs)


IRRATIONAL_EQUILIBRIUM = (
    (np.sqrt(241) - 7) / 12,
    (np.sqrt(241) - 7) / 16,
    (23 - np.sqrt(241)) / 36,
)


def gen_irrational3() -> AnonymousGame:
    """Three-player game whose only equilibrium mixes with irrational weights."""
    payoffs = np.array(
        [
            [[0, 1, 1], [1, 0.5, 0]],
            [[1, 0, 0], [0, 0.25, 0.5]],
            [[0, 0, 1], [1, 0.5, 0]],
        ],
        dtype=float,
    )
    return AnonymousGame(n=3, k=2, payoffs=payoffs)


def gen_hidden_minority(n: int, hidden: int) -> AnonymousGame:
    """Everyone gets 1/2 on strategy 0; only ``hidden`` profits from strategy 1.

    Strategy 1 pays 0 except to player ``hidden`` when all ``n - 1`` others
    play strategy 0, where it pays 1.
    """
    if n < 1 or not 0 <= hidden < n:
        raise DomainError(f"hidden player {hidden} outside 0..{n - 1}")
    payoffs = np.zeros((n, 2, n))
    payoffs[:, 0, :] = 0.5
    payoffs[hidden, 1, n - 1] = 1.0
    return AnonymousGame(n=n, k=2, payoffs=payoffs)


# -- lcp family ------------------------------------------------------------


@dataclass(frozen=True)
class LcpGameSpec:
    """Hidden preference bits of a game from the lcp family.

    ``group_bits[j - 1][l]`` is 1 when group ``j`` prefers strategy 0 for
    opponent counts in block ``l`` (blocks of length ``n / 2**(j - 1)``).
    """

    k: int
    group_bits: tuple[tuple[int, ...], ...]
    last_player_bits: tuple[int, ...]
    seed: int

    @property
    def n(self) -> int:
        return 2**self.k

    def group_sizes(self) -> list[int]:
        return [self.n >> j for j in range(1, self.k + 1)]

    def group_members(self, j: int) -> np.ndarray:
        """Player indices of group ``j`` (1-based group number)."""
        sizes = self.group_sizes()
        start = sum(sizes[: j - 1])
        return np.arange(start, start + sizes[j - 1])

    def block_length(self, j: int) -> int:
        return self.n >> (j - 1)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "group_bits": [list(b) for b in self.group_bits],
            "last_player_bits": list(self.last_player_bits),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LcpGameSpec":
        return cls(
            k=int(data["k"]),
            group_bits=tuple(tuple(int(b) for b in row) for row in data["group_bits"]),
            last_player_bits=tuple(int(b) for b in data["last_player_bits"]),
            seed=int(data["seed"]),
        )


def gen_lcp_game(k: int, seed: int) -> tuple[AnonymousGame, LcpGameSpec]:
    """Game with a unique pure equilibrium that encodes ``k`` hidden bits.

    ``n = 2**k``.  Players ``0..n-2`` form groups of sizes ``n/2, n/4, .., 1``;
    group ``j`` flips one fair coin per block of ``n / 2**(j-1)`` consecutive
    opponent counts.  The last player flips a coin for every count.  Payoffs
    are 0/1 with ``u_0 = 1 - u_1``.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if k > MAX_LCP_K:
        raise ScaleError(f"lcp games limited to k <= {MAX_LCP_K}")
    rng = np.random.default_rng(seed)
    group_bits = tuple(
        tuple(int(b) for b in rng.integers(0, 2, size=2 ** (j - 1))) for j in range(1, k + 1)
    )
    n = 2**k
    last_bits = tuple(int(b) for b in rng.integers(0, 2, size=n))
    spec = LcpGameSpec(k=k, group_bits=group_bits, last_player_bits=last_bits, seed=seed)

    prefers_first = np.empty((n, n), dtype=bool)
    x = np.arange(n)
    for j in range(1, k + 1):
        bits = np.array(group_bits[j - 1], dtype=bool)
        prefers_first[spec.group_members(j)] = bits[x // spec.block_length(j)]
    prefers_first[n - 1] = np.array(last_bits, dtype=bool)

    payoffs = np.empty((n, 2, n))
    payoffs[:, 0, :] = prefers_first
    payoffs[:, 1, :] = ~prefers_first
    return AnonymousGame(n=n, k=2, payoffs=payoffs), spec


def lcp_equilibrium(spec: LcpGameSpec) -> np.ndarray:
    """Unique pure equilibrium of an lcp game, by iterated dominance.

    Group ``j`` sees the counts fixed by groups ``1..j-1`` plus at most
    ``n / 2**(j-1) - 1`` further players, which always stays inside one of
    its blocks; so its preference there is dominant.
    """
    n = spec.n
    actions = np.empty(n, dtype=int)
    fixed = 0
    for j in range(1, spec.k + 1):
        length = spec.block_length(j)
        members = spec.group_members(j)
        others_left = n - 1 - members[0]
        if fixed % length or others_left != length - 1:
            raise ConstructionError(f"group {j} view is not confined to one block")
        prefers_first = spec.group_bits[j - 1][fixed // length]
        actions[members] = 0 if prefers_first else 1
        if prefers_first:
            fixed += members.size
    actions[n - 1] = 0 if spec.last_player_bits[fixed] else 1
    return actions


def lcp_signature(spec: LcpGameSpec, actions) -> tuple[int, ...]:
    """Bit ``j`` is 1 when group ``j`` plays strategy 0 in ``actions``."""
    actions = np.asarray(actions)
    return tuple(int(actions[spec.group_members(j)[0]] == 0) for j in range(1, spec.k + 1))


# -- reduction -------------------------------------------------------------


def self_anonymize(game: AnonymousGame) -> AnonymousGame:
    """Self-anonymous game with every incentive scaled down by ``2n``.

    Strategy 1 pays 1/2 at count 0, strategy 0 pays strategy 1's payoff plus
    ``(u_0 - u_1) / (2n)``, and strategy 1 at ``x + 1`` copies strategy 0 at
    ``x``.
    """
    if game.k != 2:
        raise DomainError("the reduction is defined for two strategies only")
    n = game.n
    scaled = (np.asarray(game.payoffs[:, 0, :]) - np.asarray(game.payoffs[:, 1, :])) / (2 * n)
    running = np.cumsum(scaled, axis=1)
    payoffs = np.empty((n, 2, n))
    payoffs[:, 0, :] = 0.5 + running
    payoffs[:, 1, :] = 0.5 + running - scaled
    return AnonymousGame(n=n, k=2, payoffs=payoffs)


# -- random families -------------------------------------------------------


def _from_potential(values: np.ndarray) -> np.ndarray:
    """Two-strategy tables from per-player values over all-player counts.

    ``values[i, c]`` is player ``i``'s payoff when ``c`` players in total
    (self included) play strategy 0.
    """
    n = values.shape[0]
    payoffs = np.empty((n, 2, n))
    payoffs[:, 0, :] = values[:, 1:]
    payoffs[:, 1, :] = values[:, :-1]
    return payoffs


def gen_random(n: int, family: str, seed: int, lam: float | None = None) -> AnonymousGame:
    """Seeded random game.

    Families: ``general`` (i.i.d. uniform payoffs), ``symmetric`` (one shared
    uniform table), ``self_anonymous`` (uniform values over total counts),
    ``lipschitz`` (random walks with steps in ``[-lam, lam]``, clipped to
    [0, 1]) and ``step_selfanon`` (deterministic worst case for uniform
    mixing, odd ``n``).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if family == "general":
        return AnonymousGame(n=n, k=2, payoffs=rng.random((n, 2, n)))
    if family == "symmetric":
        return AnonymousGame.from_shared(rng.random((2, n)))
    if family == "self_anonymous":
        return AnonymousGame(n=n, k=2, payoffs=_from_potential(rng.random((n, n + 1))))
    if family == "lipschitz":
        if lam is None or lam < 0:
            raise DomainError("lipschitz family needs lam >= 0")
        walk = np.empty((n, 2, n))
        walk[:, :, 0] = rng.random((n, 2))
        steps = rng.uniform(-lam, lam, size=(n, 2, n - 1))
        for x in range(1, n):
            walk[:, :, x] = np.clip(walk[:, :, x - 1] + steps[:, :, x - 1], 0.0, 1.0)
        return AnonymousGame(n=n, k=2, payoffs=walk)
    if family == "step_selfanon":
        if n % 2 == 0:
            raise DomainError("step_selfanon needs odd n")
        values = (np.arange(n + 1) > (n - 1) // 2).astype(float)
        return AnonymousGame(n=n, k=2, payoffs=_from_potential(np.tile(values, (n, 1))))
    raise DomainError(f"unknown random family {family!r}")


def gen_selfanon_k(n: int, k: int, seed: int) -> AnonymousGame:
    """Random k-strategy self-anonymous game: ``u_j(x) = v(x + e_j)``.

    ``v`` assigns each player an i.i.d. uniform value to every partition of
    all ``n`` players.
    """
    if k < 2 or k > dist.MAX_PMD_STRATEGIES:
        raise ScaleError(f"k must lie in 2..{dist.MAX_PMD_STRATEGIES}")
    rng = np.random.default_rng(seed)
    full_index = dist.partition_index(n, k)
    values = rng.random((n, len(full_index)))
    cols = dist.partitions(n - 1, k)
    payoffs = np.empty((n, k, len(cols)))
    for c, part in enumerate(cols):
        for j in range(k):
            bumped = list(part)
            bumped[j] += 1
            payoffs[:, j, c] = values[:, full_index[tuple(bumped)]]
    return AnonymousGame(n=n, k=k, payoffs=payoffs)


def generate(family: str, n: int | None = None, seed: int = 0, **options):
    """Dispatch on CLI family names.

    Returns ``(game, extra)`` where ``extra`` is the :class:`LcpGameSpec`
    for the lcp family and ``None`` otherwise.
    """
    if family == "majority-minority":
        return gen_majority_minority(_need(n, family)), None
    if family == "irrational3":
        return gen_irrational3(), None
    if family == "hidden-minority":
        n = _need(n, family)
        hidden = options.get("hidden")
        if hidden is None:
            hidden = int(np.random.default_rng(seed).integers(n))
        return gen_hidden_minority(n, hidden), None
    if family == "lcp":
        k = options.get("k")
        if k is None:
            n = _need(n, family)
            k = int(n).bit_length() - 1
            if 2**k != n:
                raise DomainError("lcp games need n to be a power of two")
        return gen_lcp_game(k, seed)
    if family == "random-lipschitz":
        n = _need(n, family)
        lam = options.get("lam")
        if lam is None:
            lam = 1.0 / n
        return gen_random(n, "lipschitz", seed, lam=lam), None
    simple = {
        "random-general": "general",
        "random-symmetric": "symmetric",
        "random-selfanon": "self_anonymous",
        "step-selfanon": "step_selfanon",
    }
    if family in simple:
        return gen_random(_need(n, family), simple[family], seed), None
    raise DomainError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def _need(n, family: str) -> int:
    if n is None:
        raise DomainError(f"family {family} needs --n")
    return int(n)
