import numpy as np
import pytest

from anonq import bruteforce as bf
from anonq import game as gc
from anonq import generators as gen
from anonq.errors import DomainError, ScaleError


def test_enumerate_pbd_small():
    assert np.allclose(bf.enumerate_pbd([0.5, 0.5]), [0.25, 0.5, 0.25])
    with pytest.raises(ScaleError):
        bf.enumerate_pbd(np.full(21, 0.5))


def test_pure_ne_examples():
    assert bf.enumerate_pure_ne(gen.gen_irrational3()) == []
    found = bf.enumerate_pure_ne(gen.gen_hidden_minority(8, 3))
    assert len(found) == 1 and found[0].tolist() == [0, 0, 0, 1, 0, 0, 0, 0]
    const = gc.AnonymousGame(n=4, k=2, payoffs=np.full((4, 2, 4), 0.2))
    assert len(bf.enumerate_pure_ne(const)) == 16


def test_pure_ne_guards():
    with pytest.raises(ScaleError):
        bf.enumerate_pure_ne(gen.gen_random(17, "general", 0))
    with pytest.raises(DomainError):
        bf.enumerate_pure_ne(gen.gen_selfanon_k(3, 3, 0))
    with pytest.raises(DomainError):
        bf.pure_regret(gen.gen_random(3, "general", 0), [0, 1])


def test_pure_ne_consistent_with_evaluate_profile():
    for seed in range(20):
        n = 2 + seed % 7
        game = gen.gen_random(n, "symmetric" if seed % 2 else "general", seed)
        accepted = {tuple(p) for p in bf.enumerate_pure_ne(game)}
        for code in range(2**n):
            actions = (code >> np.arange(n)[::-1]) & 1
            rep = gc.evaluate_profile(game, gc.MixedProfile.from_pure(actions))
            if tuple(actions) in accepted:
                assert rep.eps_ne <= 1e-12
            else:
                assert rep.eps_ne > 0


def test_grid_search_irrational():
    prof, eps = bf.grid_search_min_regret(gen.gen_irrational3(), 0.01)
    assert np.max(np.abs(prof.probs - [0.7104, 0.5328, 0.2077])) <= 0.01
    assert eps <= 0.02


def test_grid_constant_game():
    const = gc.AnonymousGame(n=3, k=2, payoffs=np.full((3, 2, 3), 0.6))
    _, eps = bf.grid_regrets(const, 0.1)
    assert np.allclose(eps, 0.0, atol=1e-12)


def test_grid_matching_pennies():
    # player 0 wants to match player 1, player 1 wants to mismatch
    payoffs = np.array([[[0.0, 1.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]])
    game = gc.AnonymousGame(n=2, k=2, payoffs=payoffs)
    prof, eps = bf.grid_search_min_regret(game, 0.05)
    assert np.allclose(prof.probs, 0.5) and eps == pytest.approx(0.0, abs=1e-12)


def test_grid_matches_evaluate_profile(rng):
    game = gen.gen_random(3, "general", 4)
    points, eps = bf.grid_regrets(game, 0.25)
    for _ in range(20):
        idx = tuple(rng.integers(0, points.size, size=3))
        rep = gc.evaluate_profile(game, gc.MixedProfile(points[list(idx)]))
        assert eps[idx] == pytest.approx(rep.eps_ne, abs=1e-12)


def test_grid_refinement_monotone():
    for seed in range(5):
        game = gen.gen_random(3, "general", seed)
        _, coarse = bf.grid_search_min_regret(game, 0.1)
        _, fine = bf.grid_search_min_regret(game, 0.05)
        assert fine <= coarse + 1e-12


def test_grid_guards():
    with pytest.raises(DomainError):
        bf.grid_points(0.3)
    with pytest.raises(ScaleError):
        bf.grid_regrets(gen.gen_random(4, "general", 0), 0.5)
