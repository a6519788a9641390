"""Equilibrium-finding algorithms for two-strategy anonymous games.

* :func:`symmetric_pne` -- pure equilibrium of a symmetric game by bisection
  with O(log n) single-payoff queries.
* :func:`lipschitz_pure_ne` -- pure approximate equilibrium of a Lipschitz
  game from O(log n) (possibly noisy) all-players queries.
* :func:`smoothed_approx_ne` -- approximate equilibrium of an arbitrary game
  by running the Lipschitz search on its smoothed version, each smoothed
  query simulated by sampling.
* :func:`uniform_mix` -- the zero-query profile for self-anonymous games.

Strategy indices are zero-based; a pure profile is an int array of 0/1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NotFoundError
from .game import MixedProfile
from .oracle import AccurateQueryConfig, SampledSmoothedOracle


def ceil_log2(n: int) -> int:
    return max(0, math.ceil(math.log2(n))) if n >= 1 else 0


# -- symmetric games -------------------------------------------------------


def symmetric_pne(oracle, n: int) -> int:
    """Number of players on strategy 0 in a pure equilibrium of a symmetric game.

    Players ``0..m-1`` play strategy 0 and the rest strategy 1.  The search
    checks ``m = 0`` and ``m = n`` first, then bisects on the sign of
    ``g(x) = u_0(x) - u_1(x)`` keeping ``g(lo) >= 0 >= g(hi)``.  The final
    answer is re-checked against the first and last players' tables; a
    failed check raises :class:`NotFoundError`.
    """
    def g(x: int) -> float:
        return oracle.single_payoff(0, 0, x) - oracle.single_payoff(0, 1, x)

    if n == 1:
        return 0 if g(0) <= 0 else 1
    if g(0) <= 0:
        m = 0
    elif g(n - 1) >= 0:
        m = n
    else:
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if g(mid) >= 0:
                lo = mid
            else:
                hi = mid
        m = hi
    _verify_symmetric_count(oracle, n, m)
    return m


def _verify_symmetric_count(oracle, n: int, m: int) -> None:
    ok = True
    if m > 0:
        ok &= oracle.single_payoff(0, 0, m - 1) >= oracle.single_payoff(0, 1, m - 1)
    if m < n:
        ok &= oracle.single_payoff(n - 1, 1, m) >= oracle.single_payoff(n - 1, 0, m)
    if not ok:
        raise NotFoundError(
            f"count {m} failed equilibrium verification; is the game symmetric?"
        )


def symmetric_profile(n: int, m: int) -> np.ndarray:
    """Pure profile with players ``0..m-1`` on strategy 0."""
    return np.where(np.arange(n) < m, 0, 1)


# -- Lipschitz games -------------------------------------------------------


@dataclass
class LipschitzTrace:
    """Record of a :func:`lipschitz_pure_ne` run, for diagnostics and tests."""

    candidates: int = 0
    # (lo, hi, phi(lo), phi(hi)) after each bisection step
    intervals: list = field(default_factory=list)
    outcome: str = ""
    crossing: int | None = None
    fill_rule: str = ""


def _best_response_first(f0: np.ndarray, f1: np.ndarray) -> np.ndarray:
    """Players whose estimated best response is strategy 0 (ties go to 0)."""
    return f0 >= f1


def lipschitz_pure_ne(oracle, n: int, delta: float, trace: LipschitzTrace | None = None) -> np.ndarray:
    """Pure approximate well-supported equilibrium of a Lipschitz game.

    ``oracle.all_players(j, x)`` must be within ``delta`` of the true payoffs.
    With ``BR(x)`` the number of players preferring strategy 0 when ``x``
    others play it, and ``phi(x) = BR(x) - x``, the search finds ``x`` with
    ``phi(x) > 0 >= phi(x + 1)``.  Each candidate costs four AP queries.
    """
    if trace is None:
        trace = LipschitzTrace()

    def probe(x: int, y: int):
        trace.candidates += 1
        vx = (oracle.all_players(0, x), oracle.all_players(1, x))
        vy = (oracle.all_players(0, y), oracle.all_players(1, y))
        return vx, vy

    def phi(x: int, v) -> int:
        return int(np.count_nonzero(_best_response_first(*v))) - x

    v_first, v_last = probe(0, n - 1)
    if n == 1:
        trace.outcome = "single-player"
        return np.where(_best_response_first(*v_first), 0, 1)
    br_first = phi(0, v_first)
    br_last = phi(n - 1, v_last) + (n - 1)
    if br_first == 0:
        trace.outcome = "all-second"
        return np.ones(n, dtype=int)
    if br_last == n:
        trace.outcome = "all-first"
        return np.zeros(n, dtype=int)

    lo, hi = 0, n - 1
    held = {lo: v_first, hi: v_last}
    phi_lo, phi_hi = phi(lo, v_first), phi(hi, v_last)
    trace.intervals.append((lo, hi, phi_lo, phi_hi))
    pair = None
    while pair is None:
        width = hi - lo
        if width == 1:
            pair = (lo, held[lo], held[hi])
        elif width == 2:
            # middle point plus a fresh look at hi; pair with held values on conflict
            mid = lo + 1
            v_mid, v_hi = probe(mid, hi)
            if phi(mid, v_mid) <= 0:
                pair = (lo, held[lo], v_mid)
            elif phi(hi, v_hi) <= 0:
                pair = (mid, v_mid, v_hi)
            else:
                pair = (mid, v_mid, held[hi])
        else:
            x = lo + (width - 1) // 2
            vx, vy = probe(x, x + 1)
            px, py = phi(x, vx), phi(x + 1, vy)
            if px > 0 and py <= 0:
                pair = (x, vx, vy)
            elif px <= 0:
                hi, held[x], phi_hi = x, vx, px
            else:
                lo, held[x + 1], phi_lo = x + 1, vy, py
            trace.intervals.append((lo, hi, phi_lo, phi_hi))

    x, vx, vy = pair
    trace.crossing = x
    trace.outcome = "bisection"
    return _build_profile(n, x, vx, vy, delta, trace)


def _build_profile(n, x, vx, vy, delta, trace) -> np.ndarray:
    """Pure profile with ``x`` or ``x + 1`` players on strategy 0.

    Players whose estimated advantage at ``x`` exceeds ``2 * delta`` are
    pinned to that strategy; the rest fill in ascending index order up to
    the smallest feasible total.  If more than ``x + 1`` players are pinned
    to strategy 0 (possible once payoffs move between counts), fall back to
    taking everyone who prefers strategy 0 at ``x + 1`` and topping up with
    players who prefer it at ``x`` only.  Only players preferring strategy 0
    at ``x + 1`` but not at ``x`` can end up off their estimated best
    response, so the result is a ``(lambda + 2 delta)``-WSNE.
    """
    diff = vx[0] - vx[1]
    pinned_first = diff > 2 * delta
    pinned_second = -diff > 2 * delta
    free = np.flatnonzero(~pinned_first & ~pinned_second)
    for target in (x, x + 1):
        need = target - int(pinned_first.sum())
        if 0 <= need <= free.size:
            on_first = pinned_first.copy()
            on_first[free[:need]] = True
            trace.fill_rule = "pinned"
            return np.where(on_first, 0, 1)

    prefers_next = _best_response_first(*vy)
    prefers_here = _best_response_first(*vx)
    top_up = np.flatnonzero(prefers_here & ~prefers_next)
    # phi(x) > 0 >= phi(x + 1) gives |prefers_here| >= x + 1 >= |prefers_next|,
    # so 0 <= need <= |prefers_here - prefers_next| and this always succeeds
    need = x + 1 - int(prefers_next.sum())
    on_first = prefers_next.copy()
    on_first[top_up[:need]] = True
    trace.fill_rule = "fallback"
    return np.where(on_first, 0, 1)


# -- general games ---------------------------------------------------------


@dataclass(frozen=True)
class SmoothedParams:
    zeta: float
    delta: float
    tau: float
    epsilon_target: float | None = None

    def __post_init__(self):
        if not 0 < self.zeta <= 0.5:
            raise DomainError(f"zeta must lie in (0, 1/2], got {self.zeta!r}")
        if not 0 < self.delta <= 0.5:
            raise DomainError(f"delta must lie in (0, 1/2], got {self.delta!r}")
        if not 0 < self.tau < 1:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau!r}")

    def guarantee(self, n: int) -> float:
        """``zeta + delta + 1 / (zeta * sqrt(n))``, the target the parameters satisfy."""
        return self.zeta + self.delta + 1.0 / (self.zeta * math.sqrt(n))


def default_params(n: int) -> SmoothedParams:
    """``zeta = delta = n^(-1/4)`` and ``tau = 1 / (16 log2 n)``."""
    if n < 2:
        raise DomainError("need n >= 2")
    base = n ** -0.25
    return SmoothedParams(zeta=min(base, 0.5), delta=min(base, 0.5), tau=1.0 / (16 * math.log2(n)))


def derive_params(n: int, epsilon: float) -> SmoothedParams:
    """Parameters with ``zeta + delta + 1/(zeta sqrt n) <= epsilon``.

    Uses ``zeta = max(eps/3, 3/(eps sqrt n))`` (capped at 1/2), ``delta =
    eps/3``.  When that choice overshoots, falls back to the minimiser
    ``zeta = n^(-1/4)`` with ``delta`` taking the remaining budget.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    root = math.sqrt(n)
    tau = 1.0 / (16 * math.log2(n))
    zeta = min(max(epsilon / 3, 3 / (epsilon * root)), 0.5)
    delta = epsilon / 3
    if zeta + delta + 1 / (zeta * root) <= epsilon + 1e-12:
        return SmoothedParams(zeta=zeta, delta=delta, tau=tau, epsilon_target=epsilon)
    zeta = min(n ** -0.25, 0.5)
    delta = min(epsilon - zeta - 1 / (zeta * root), 0.5)
    if delta <= 0:
        raise DomainError(
            f"epsilon={epsilon} is infeasible for n={n}; need more than {2 * n ** -0.25:.4f}"
        )
    return SmoothedParams(zeta=zeta, delta=delta, tau=tau, epsilon_target=epsilon)


def smoothed_approx_ne(
    oracle,
    n: int,
    params: SmoothedParams,
    rng: np.random.Generator,
    trace: LipschitzTrace | None = None,
) -> MixedProfile:
    """Approximate (not well-supported) equilibrium of any two-strategy game.

    Runs :func:`lipschitz_pure_ne` on the ``zeta``-smoothed game with every
    all-players query estimated from
    ``ceil(ln(4n/tau) / (2 delta^2))`` sampled AP queries, then maps
    strategy 0 to probability ``1 - zeta`` and strategy 1 to ``zeta``.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    cfg = AccurateQueryConfig.for_game(n, params.delta, params.tau)
    simulated = SampledSmoothedOracle(oracle, params.zeta, cfg, rng)
    pure = lipschitz_pure_ne(simulated, n, params.delta, trace=trace)
    return smoothed_profile(pure, params.zeta)


def smoothed_profile(pure: np.ndarray, zeta: float) -> MixedProfile:
    return MixedProfile(np.where(np.asarray(pure) == 0, 1.0 - zeta, zeta))


def uniform_mix(n: int, k: int = 2):
    """Everybody uniform over ``k`` strategies; issues no queries.

    Returns a :class:`MixedProfile` for ``k = 2`` and an ``(n, k)`` array
    otherwise.
    """
    if k == 2:
        return MixedProfile(np.full(n, 0.5))
    return np.full((n, k), 1.0 / k)


# -- reference strategies for the hidden-minority instance ------------------


def ap_probe(oracle) -> np.ndarray:
    """One AP query for strategy 1 with everybody else on strategy 0.

    The player gaining most from strategy 1 there is put on it and
    everyone else on strategy 0.
    """
    n = oracle.n
    payoffs = oracle.all_players(1, n - 1)
    actions = np.zeros(n, dtype=int)
    actions[int(np.argmax(payoffs))] = 1
    return actions


def profile_scan(oracle) -> np.ndarray:
    """Profile-query scan for a single profitable deviation from all-0.

    Queries the all-0 profile, then the profiles with exactly one player on
    strategy 1 in index order, stopping at the first player who does at
    least as well on strategy 1.
    """
    n = oracle.n
    baseline = oracle.profile(np.zeros(n, dtype=int))
    for i in range(n):
        actions = np.zeros(n, dtype=int)
        actions[i] = 1
        if oracle.profile(actions)[i] >= baseline[i]:
            return actions
    return np.zeros(n, dtype=int)
