import functools
import itertools
from fractions import Fraction

import pytest

from fpsynth.game import Game
from fpsynth.gamefile import bundled_game
from fpsynth.oracle import random_validated_game

RANDOM_SEEDS = range(200)


@functools.lru_cache(maxsize=None)
def table(name):
    return bundled_game(name)


@functools.lru_cache(maxsize=None)
def random_games():
    return tuple(random_validated_game(seed) for seed in RANDOM_SEEDS)


def make_game(actions, payoff_fn):
    """Build a game from label lists and a function of the index profile."""
    payoffs = {
        p: tuple(Fraction(v) for v in payoff_fn(p))
        for p in itertools.product(*(range(len(a)) for a in actions))
    }
    return Game(tuple(tuple(a) for a in actions), payoffs)


@pytest.fixture
def table1():
    return table("table1")


@pytest.fixture
def table2():
    return table("table2")


@pytest.fixture
def table3():
    return table("table3")


@pytest.fixture
def pennies():
    # IP has one dummy action; opponents play matching pennies
    def pay(p):
        _, a, b = p
        return (0, 1, -1) if a == b else (0, -1, 1)

    return make_game([["X"], ["H", "T"], ["H", "T"]], pay)
