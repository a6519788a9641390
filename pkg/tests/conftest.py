import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def enumerate_expected_payoffs(game, probs):
    """Reference strategy values by summing over every pure outcome.

    Independent of the DP code: each opponent outcome's probability is a
    plain product of coin probabilities.
    """
    n = game.n
    p = np.asarray(probs, dtype=float)
    values = np.zeros((n, 2))
    for i in range(n):
        others = [l for l in range(n) if l != i]
        for outcome in itertools.product((0, 1), repeat=n - 1):
            weight = 1.0
            for l, a in zip(others, outcome):
                weight *= p[l] if a == 0 else 1.0 - p[l]
            count = outcome.count(0)
            values[i] += weight * np.asarray(game.payoffs[i, :, count])
    return values


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
