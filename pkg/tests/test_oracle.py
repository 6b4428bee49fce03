from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fpsynth.game import MixedStrategy, TieRule, best_response, check_ordinal_potential, extract_subgame
from fpsynth.oracle import (
    OracleSizeError,
    best_response_oracle,
    exhaustive_synthesis_oracle,
    lp_vertex_oracle,
    optimal_vertices,
    random_game,
    random_validated_game,
)
from fpsynth.synthesis import LinearProgram, build_lp, build_two_player_lp, synthesize

from conftest import make_game, random_games, table


class TestVertexOracle:
    def test_eq6(self, table2):
        best, vertices = lp_vertex_oracle(build_lp(extract_subgame(table2, 2), (0, 2)))
        assert best.q.probs == (F(1, 9), F(1, 3), F(5, 9))
        assert best.value == F(52, 9)
        assert all(v.value <= best.value for v in vertices)

    def test_table1_column_b_vertices(self, table1):
        best, vertices = lp_vertex_oracle(build_two_player_lp(table1, 1))
        assert sorted(v.q.probs[0] for v in vertices) == [F(1, 6), F(7, 10)]
        assert best.q.probs == (F(1, 6), F(5, 6)) and best.value == F(85, 6)
        assert best.active_rows  # the lower bound on prob(U) is tight

    def test_vacuous_rows(self):
        lp = LinearProgram((F(1), F(0)), ((F(-1), F(-1)),))
        best, vertices = lp_vertex_oracle(lp)
        assert best.q.probs == (1, 0) and best.value == 1
        assert len(vertices) == 2

    def test_infeasible(self):
        best, vertices = lp_vertex_oracle(LinearProgram((F(1), F(1)), ((F(1), F(1)),)))
        assert best is None and vertices == []

    def test_size_limit(self):
        with pytest.raises(OracleSizeError):
            lp_vertex_oracle(LinearProgram(tuple(F(1) for _ in range(9)), ()))

    def test_optimal_face(self):
        lp = LinearProgram((F(2), F(2), F(1)), ())
        assert [v.q.probs for v in optimal_vertices(lp)] == [(0, 1, 0), (1, 0, 0)]


class TestExhaustiveSynthesis:
    @pytest.mark.parametrize(
        "name,y0,value", [("table2", 2, F(52, 9)), ("table3", 0, F(60, 7)), ("table1", 0, F(85, 6))]
    )
    def test_tables(self, name, y0, value):
        r = exhaustive_synthesis_oracle(table(name))
        assert (r.chosen_y0, r.value) == (y0, value)

    def test_single_ip_action(self):
        g = make_game([["only"], ["a", "b"], ["c", "d"]], lambda p: (3 + p[1] + 2 * p[2], 5 * (p[1] == 1), 5 * (p[2] == 0)))
        r = exhaustive_synthesis_oracle(g)
        assert r.value == g.payoffs[(0, 1, 0)][0] == 4

    def test_size_limit(self):
        g = make_game([list("abcde"), ["x", "y"]], lambda p: (p[0], p[1]))
        with pytest.raises(OracleSizeError):
            exhaustive_synthesis_oracle(g)

    def test_agrees_with_simplex_path_on_random_games(self):
        for g in random_games():
            fast, slow = synthesize(g), exhaustive_synthesis_oracle(g)
            assert (fast.chosen_y0, fast.value, fast.mix) == (slow.chosen_y0, slow.value, slow.mix)
            assert fast.baseline_pure == slow.baseline_pure


class TestBestResponseOracle:
    def test_table1_boundary_tie(self, table1):
        assert best_response_oracle(table1, 1, [MixedStrategy(0, (F(7, 10), F(3, 10))), None]) == {0, 1}

    def test_dominant_singleton(self):
        g = make_game([["x", "y"], ["a", "b", "c"]], lambda p: (0, 9 if p[1] == 1 else p[0]))
        assert best_response_oracle(g, 1, [MixedStrategy(0, (F(1, 2), F(1, 2))), None]) == {1}

    def test_table2_subgame_c(self, table2):
        others = [MixedStrategy(0, (0, 0, 1)), None, MixedStrategy(2, (0, 0, 1))]
        assert best_response_oracle(table2, 1, others) == {0}


def _mixes(owner, n):
    return st.lists(st.integers(0, 4), min_size=n, max_size=n).filter(any).map(
        lambda c: MixedStrategy.from_counts(owner, c)
    )


@st.composite
def beliefs(draw):
    g = draw(st.sampled_from([table("table1"), table("table2"), table("table3")] + list(random_games()[:30])))
    player = draw(st.integers(0, g.player_count - 1))
    others = [None if i == player else draw(_mixes(i, n)) for i, n in enumerate(g.shape())]
    current = draw(st.integers(0, g.shape()[player] - 1))
    return g, player, others, current


@settings(max_examples=200, deadline=None)
@given(beliefs(), st.sampled_from(list(TieRule)))
def test_best_response_is_in_oracle_set(case, rule):
    g, player, others, current = case
    assert best_response(g, player, others, rule, current) in best_response_oracle(g, player, others)


def test_random_generator_is_seeded_and_validated():
    assert random_validated_game(7) == random_validated_game(7)
    for g in random_games()[:50]:
        assert all(1 <= v <= 9 for vec in g.payoffs.values() for v in vec)
        assert all(check_ordinal_potential(extract_subgame(g, y0)).passed for y0 in range(g.shape()[0]))


def test_random_game_shape():
    import random

    g = random_game(random.Random(3), 2, [3, 2])
    assert g.shape() == (2, 3, 2)
    assert len(g.payoffs) == 12
