import math

import numpy as np
import pytest
from conftest import enumerate_expected_payoffs
from hypothesis import given, settings
from hypothesis import strategies as st

from anonq import distributions as dist
from anonq import game as gc
from anonq import generators as gen
from anonq.bruteforce import pure_regret
from anonq.errors import DomainError, ScaleError


def constant_game(n, value=0.7, k=2):
    cols = n if k == 2 else math.comb(n - 1 + k - 1, k - 1)
    return gc.AnonymousGame(n=n, k=k, payoffs=np.full((n, k, cols), value))


# -- construction and JSON -------------------------------------------------


def test_rejects_bad_shape_and_range():
    with pytest.raises(DomainError):
        gc.AnonymousGame(n=3, k=2, payoffs=np.zeros((3, 2, 2)))
    with pytest.raises(DomainError):
        gc.AnonymousGame(n=2, k=2, payoffs=np.full((2, 2, 2), 1.5))
    with pytest.raises(DomainError):
        gc.AnonymousGame(n=2, k=2, payoffs=np.full((2, 2, 2), np.nan))


def test_tiny_roundoff_is_clipped():
    table = np.full((2, 2, 2), 0.5)
    table[0, 0, 0] = 1 + 1e-13
    assert gc.AnonymousGame(n=2, k=2, payoffs=table).payoffs.max() == 1.0


def test_json_round_trip(tmp_path):
    game = gen.gen_random(5, "general", 3)
    path = tmp_path / "g.json"
    gc.save_json(gc.game_to_json(game), path)
    data = gc.load_json(path)
    assert set(data) == {"n", "k", "payoffs"}
    assert np.array_equal(gc.game_from_json(data).payoffs, game.payoffs)


def test_compact_shared_json():
    game = gen.gen_random(6, "symmetric", 1)
    data = gc.game_to_json(game, compact=True)
    assert data["shared"] is True and len(data["payoffs"]) == 1
    back = gc.game_from_json(data)
    assert back.is_shared()
    assert np.array_equal(back.payoffs, game.payoffs)
    assert np.array_equal(gc.game_from_json(gc.game_to_json(game)).payoffs, game.payoffs)


def test_malformed_json():
    with pytest.raises(DomainError):
        gc.game_from_json({"n": 2})
    with pytest.raises(DomainError):
        gc.profile_from_json({"p": [0.5]})


def test_profile_validation_and_pure_round_trip():
    with pytest.raises(DomainError):
        gc.MixedProfile([0.5, 1.2])
    prof = gc.MixedProfile.from_pure([0, 1, 1])
    assert prof.probs.tolist() == [1.0, 0.0, 0.0]
    assert prof.is_pure() and prof.to_pure().tolist() == [0, 1, 1]
    assert gc.profile_from_json(gc.profile_to_json(prof)).probs.tolist() == [1.0, 0.0, 0.0]


# -- expected payoffs ------------------------------------------------------


def test_expected_payoff_examples():
    assert gc.expected_payoff(constant_game(4), 1, 0, dist.pbd_pmf([0.2, 0.9, 0.4])) == pytest.approx(0.7)
    n, h = 6, 2
    hidden = gen.gen_hidden_minority(n, h)
    point = np.zeros(n)
    point[-1] = 1.0
    assert gc.expected_payoff(hidden, h, 1, point) == 1.0
    mm = gen.gen_majority_minority(4)
    assert gc.expected_payoff(mm, 0, 0, dist.pbd_pmf([0.5] * 3)) == pytest.approx(0.5, abs=1e-12)


def test_expected_payoff_support_mismatch():
    with pytest.raises(DomainError):
        gc.expected_payoff(constant_game(4), 0, 0, [0.5, 0.5])


# -- evaluate_profile ------------------------------------------------------


def test_majority_minority_uniform_is_exact_ne():
    for n in (4, 10, 32):
        rep = gc.evaluate_profile(gen.gen_majority_minority(n), gc.MixedProfile(np.full(n, 0.5)))
        assert rep.eps_ne <= 1e-12


def test_irrational_profile():
    rep = gc.evaluate_profile(gen.gen_irrational3(), gc.MixedProfile(gen.IRRATIONAL_EQUILIBRIUM))
    assert rep.eps_ne <= 1e-9


def test_hidden_minority_equilibrium():
    n, h = 9, 4
    actions = np.zeros(n, dtype=int)
    actions[h] = 1
    rep = gc.evaluate_profile(gen.gen_hidden_minority(n, h), gc.MixedProfile.from_pure(actions))
    assert rep.eps_ne == 0 and rep.eps_wsne == 0


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        gc.evaluate_profile(constant_game(3), gc.MixedProfile([0.5, 0.5]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000), st.data())
def test_strategy_values_match_enumeration(n, seed, data):
    game = gen.gen_random(n, "general", seed)
    # include repeated levels so the grouping fast path is exercised
    pool = [0.0, 1.0, 0.5, 0.3]
    probs = data.draw(st.lists(st.sampled_from(pool) | st.floats(0, 1), min_size=n, max_size=n))
    rep = gc.evaluate_profile(game, gc.MixedProfile(probs))
    assert np.allclose(rep.strategy_values, enumerate_expected_payoffs(game, probs), atol=1e-12)
    assert np.all(rep.regret <= rep.ws_slack + 1e-12)
    assert rep.eps_ne == rep.regret.max() and rep.eps_wsne == rep.ws_slack.max()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000), st.data())
def test_pure_regret_matches_table(n, seed, data):
    game = gen.gen_random(n, "general", seed)
    actions = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    rep = gc.evaluate_profile(game, gc.MixedProfile.from_pure(actions))
    assert np.allclose(rep.regret, pure_regret(game, actions), atol=1e-12)


def test_full_support_slack_is_value_spread(rng):
    game = gen.gen_random(8, "general", 11)
    probs = rng.uniform(0.05, 0.95, size=8)
    rep = gc.evaluate_profile(game, gc.MixedProfile(probs), support_threshold=0.0)
    v = rep.strategy_values
    assert np.allclose(rep.ws_slack, v.max(axis=1) - v.min(axis=1), atol=1e-15)


def test_support_threshold_drops_tiny_mass():
    game = gen.gen_majority_minority(4)
    probs = np.array([1.0, 1.0, 1e-12, 1e-12])
    loose = gc.evaluate_profile(game, gc.MixedProfile(probs))
    strict = gc.evaluate_profile(game, gc.MixedProfile(probs), support_threshold=0.0)
    assert strict.eps_wsne >= loose.eps_wsne
    with pytest.raises(DomainError):
        gc.evaluate_profile(game, gc.MixedProfile(probs), support_threshold=-1)


def test_monte_carlo_agreement():
    n = 12
    game = gen.gen_random(n, "general", 5)
    mc_rng = np.random.default_rng(77)
    probs = mc_rng.uniform(0.1, 0.9, size=n)
    rep = gc.evaluate_profile(game, gc.MixedProfile(probs))
    samples = 1_000_000
    plays_first = mc_rng.random((samples, n)) < probs
    total = plays_first.sum(axis=1)
    for i in range(n):
        seen = total - plays_first[:, i]
        for j in (0, 1):
            draws = game.payoffs[i, j, seen]
            se = draws.std() / math.sqrt(samples)
            assert abs(draws.mean() - rep.strategy_values[i, j]) <= 3 * se + 1e-12


# -- Lipschitz, classes, smoothing ----------------------------------------


def test_step_lipschitz_examples():
    assert gc.step_lipschitz_constant(constant_game(5)) == 0
    for n in (4, 16):
        assert gc.step_lipschitz_constant(gen.gen_majority_minority(n)) == pytest.approx(1 / n)
    assert gc.step_lipschitz_constant(gen.gen_hidden_minority(8, 2)) == 1.0


def test_classify_examples():
    mm = gc.classify(gen.gen_majority_minority(6))
    assert not mm.symmetric
    const = gc.classify(constant_game(5))
    assert const.symmetric and const.self_anonymous and const.self_symmetric
    selfanon = gc.classify(gen.self_anonymize(gen.gen_random(7, "general", 2)))
    assert selfanon.self_anonymous
    assert gc.classify(gen.gen_random(7, "general", 2)).self_anonymous is False


def test_classify_k3():
    game = gen.gen_selfanon_k(5, 3, 1)
    flags = gc.classify(game)
    assert flags.self_anonymous and not flags.symmetric
    rng = np.random.default_rng(0)
    noisy = gc.AnonymousGame(n=5, k=3, payoffs=rng.random(game.payoffs.shape))
    assert not gc.classify(noisy).self_anonymous


def test_smoothed_examples():
    const = gc.smoothed_game_exact(constant_game(6, 0.3), 0.2)
    assert np.allclose(const.payoffs, 0.3, atol=1e-12)
    table = np.array([[[0.0, 1.0], [0.5, 0.5]], [[0.2, 0.2], [0.2, 0.2]]])
    sm = gc.smoothed_game_exact(gc.AnonymousGame(n=2, k=2, payoffs=table), 0.25)
    assert sm.payoffs[0, 0, 0] == pytest.approx(0.25, abs=1e-12)
    assert sm.payoffs[0, 0, 1] == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(DomainError):
        gc.smoothed_game_exact(constant_game(3), 0.0)


def test_smoothed_matches_expected_payoff_and_shared_path():
    game = gen.gen_random(9, "general", 4)
    zeta = 0.3
    sm = gc.smoothed_game_exact(game, zeta)
    for x in range(9):
        pmf = dist.two_block_pmf(x, 8 - x, zeta)
        assert sm.payoffs[3, 1, x] == pytest.approx(gc.expected_payoff(game, 3, 1, pmf), abs=1e-12)
    sym = gen.gen_random(9, "symmetric", 4)
    smoothed_sym = gc.smoothed_game_exact(sym, zeta)
    assert smoothed_sym.is_shared()
    full = gc.AnonymousGame(n=9, k=2, payoffs=np.array(sym.payoffs))
    assert np.allclose(smoothed_sym.payoffs, gc.smoothed_game_exact(full, zeta).payoffs, atol=1e-14)


def test_smoothed_step_bounded_by_twice_tv():
    for n, zeta in [(16, 0.1), (40, 0.25), (64, 0.4)]:
        game = gen.gen_random(n, "general", n)
        sm = gc.smoothed_game_exact(game, zeta)
        tv = max(
            dist.tv_distance(dist.two_block_pmf(x - 1, n - x, zeta), dist.two_block_pmf(x, n - 1 - x, zeta))
            for x in range(1, n)
        )
        assert gc.step_lipschitz_constant(sm) <= 2 * tv + 1e-12


def test_uniform_mix_regret_examples():
    assert gc.uniform_mix_regret_k(constant_game(5, 0.4, k=3)) == pytest.approx(0.0, abs=1e-12)
    for seed in range(5):
        value = gc.uniform_mix_regret_k(gen.gen_random(25, "self_anonymous", seed))
        assert value <= math.e / math.pi / math.sqrt(24)
    step = gen.gen_random(5, "step_selfanon", 0)
    assert gc.uniform_mix_regret_k(step) == pytest.approx(0.375, abs=1e-12)


def test_uniform_mix_regret_agrees_with_evaluate_profile():
    game = gen.gen_random(15, "self_anonymous", 8)
    rep = gc.evaluate_profile(game, gc.MixedProfile(np.full(15, 0.5)))
    assert gc.uniform_mix_regret_k(game) == pytest.approx(rep.eps_wsne, abs=1e-12)


def test_uniform_mix_regret_guards():
    with pytest.raises(ScaleError):
        gc.uniform_mix_regret_k(constant_game(81, k=3))
    with pytest.raises(ScaleError):
        gc.uniform_mix_regret_k(constant_game(41, k=4))
