"""Exact LP synthesis of the IP's convergence-based mixed strategy.

For every IP action ``y0`` the opponents' subgame has a unique pure
equilibrium; an LP over IP mixtures keeps every opponent's equilibrium
action a (weak) best response while maximizing the IP's payoff.  The best
subgame wins.  Two-player games use one LP per opponent column instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .game import (
    Game,
    MixedStrategy,
    Profile,
    Subgame,
    TieRule,
    best_response,
    expected_ip_utility,
    extract_subgame,
    payoff,
    pure_nash,
    unique_nash,
)
from .lp import OPTIMAL, simplex

TWO_PLAYER = "two-player"
N_PLAYER = "n-player"


class SynthesisError(RuntimeError):
    """An LP that should be solvable was not (internal invariant broken)."""


@dataclass(frozen=True)
class LinearProgram:
    """``max objective @ q`` s.t. ``rows @ q <= 0``, ``sum(q) == 1``, ``q >= 0``.

    ``row_labels[r]`` is ``(opponent, deviation_action)``.  ``anchor`` is an
    IP action whose point mass is known to be feasible, if any.
    """

    objective: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    row_labels: tuple[tuple[int, int], ...] = ()
    anchor: Optional[int] = None

    @property
    def columns(self) -> int:
        return len(self.objective)

    def value(self, q: Sequence[Fraction]) -> Fraction:
        return sum((c * x for c, x in zip(self.objective, q)), Fraction(0))

    def row_values(self, q: Sequence) -> list[Fraction]:
        return [sum((a * x for a, x in zip(row, q)), Fraction(0)) for row in self.rows]

    def is_feasible(self, q: Sequence[Fraction]) -> bool:
        return (
            all(x >= 0 for x in q)
            and sum(q) == 1
            and all(v <= 0 for v in self.row_values(q))
        )


@dataclass(frozen=True)
class Candidate:
    """One LP of the search: a subgame (n-player) or an opponent column."""

    ip_action: Optional[int]
    target: Profile
    lp: LinearProgram
    mix: Optional[MixedStrategy]
    value: Optional[Fraction]


@dataclass(frozen=True)
class SynthesisResult:
    mode: str
    chosen_y0: int
    target_profile: Profile
    mix: MixedStrategy
    value: Fraction
    lp: LinearProgram
    per_candidate: tuple[Candidate, ...]
    baseline_pure: tuple[int, Fraction]
    nash_fp_payoff: Optional[Fraction] = field(default=None, compare=False)
    game: Optional[Game] = field(default=None, compare=False, repr=False)


def build_lp(subgame: Subgame, nash: Sequence[int]) -> LinearProgram:
    """LP keeping the opponents at ``nash`` while the IP mixes over all actions."""
    game = subgame.base
    nash = tuple(nash)
    if len(nash) != game.opponent_count:
        raise ValueError("equilibrium profile has the wrong length")
    if nash not in pure_nash(subgame):
        raise ValueError(
            f"({','.join(subgame.labels(nash))}) is not an equilibrium "
            f"of subgame {subgame.label}"
        )
    ip_actions = range(len(game.actions[0]))
    objective = tuple(game.payoffs[(k, *nash)][0] for k in ip_actions)
    rows, labels = [], []
    for j in range(1, game.player_count):
        for alt in range(len(game.actions[j])):
            if alt == nash[j - 1]:
                continue
            dev = list(nash)
            dev[j - 1] = alt
            rows.append(
                tuple(
                    game.payoffs[(k, *dev)][j] - game.payoffs[(k, *nash)][j]
                    for k in ip_actions
                )
            )
            labels.append((j, alt))
    return LinearProgram(objective, tuple(rows), tuple(labels), subgame.fixed_ip_action)


def build_two_player_lp(game: Game, column: int) -> LinearProgram:
    """LP keeping the single opponent's best response at ``column``."""
    if game.player_count != 2:
        raise ValueError("two-player LP needs exactly two players")
    ip_actions = range(len(game.actions[0]))
    objective = tuple(game.payoffs[(k, column)][0] for k in ip_actions)
    rows, labels = [], []
    for alt in range(len(game.actions[1])):
        if alt == column:
            continue
        rows.append(
            tuple(
                game.payoffs[(k, alt)][1] - game.payoffs[(k, column)][1]
                for k in ip_actions
            )
        )
        labels.append((1, alt))
    anchor = next(
        (k for k in ip_actions if all(row[k] <= 0 for row in rows)), None
    )
    return LinearProgram(objective, tuple(rows), tuple(labels), anchor)


class InfeasibleLP(ValueError):
    pass


def solve_lp(lp: LinearProgram) -> tuple[MixedStrategy, Fraction]:
    """Exact optimum; among optimal vertices the lexicographically smallest ``q``."""
    n = lp.columns
    ones = [[Fraction(1)] * n]
    start = [lp.anchor] if lp.anchor is not None else []
    if lp.anchor is not None:
        point = [Fraction(int(k == lp.anchor)) for k in range(n)]
        if not lp.is_feasible(point):
            raise SynthesisError(f"point mass on column {lp.anchor} is infeasible")
    sol = simplex(lp.objective, lp.rows, [0] * len(lp.rows), ones, [1], start=start)
    if sol.status != OPTIMAL:
        raise InfeasibleLP(f"LP is {sol.status}")
    best = sol.value

    # lexicographic tie-break over the optimal face
    fixed_rows = [list(lp.objective)]
    fixed_rhs = [best]
    q = list(sol.x)
    for k in range(n):
        unit = [Fraction(-1) if i == k else Fraction(0) for i in range(n)]
        sub = simplex(
            unit, lp.rows, [0] * len(lp.rows), ones + fixed_rows, [1] + fixed_rhs
        )
        if sub.status != OPTIMAL:
            raise SynthesisError("optimal face became infeasible during tie-break")
        q = list(sub.x)
        fixed_rows.append([Fraction(int(i == k)) for i in range(n)])
        fixed_rhs.append(q[k])
    if lp.value(q) != best or not lp.is_feasible(q):
        raise SynthesisError("tie-break left the optimal face")
    return MixedStrategy(0, tuple(q)), best


def pure_baseline(game: Game) -> tuple[int, Fraction]:
    """Best payoff from repeating a single pure IP action (ties: lowest index)."""
    best = None
    for y0 in range(len(game.actions[0])):
        if game.player_count == 2:
            others = [MixedStrategy.pure(0, len(game.actions[0]), y0), None]
            reply = best_response(game, 1, others, TieRule.LOWEST)
            value = payoff(game, (y0, reply))[0]
        else:
            nash = unique_nash(extract_subgame(game, y0))
            value = payoff(game, (y0, *nash))[0]
        if best is None or value > best[1]:
            best = (y0, value)
    return best


def synthesize_n_player(game: Game) -> SynthesisResult:
    candidates = []
    for y0 in range(len(game.actions[0])):
        sub = extract_subgame(game, y0)
        nash = unique_nash(sub)
        lp = build_lp(sub, nash)
        if any(row[y0] > 0 for row in lp.rows):
            raise SynthesisError(f"equilibrium column of subgame {sub.label} has a positive entry")
        mix, value = solve_lp(lp)
        candidates.append(Candidate(y0, nash, lp, mix, value))
    chosen = max(candidates, key=lambda c: (c.value, -c.ip_action))
    baseline = pure_baseline(game)
    result = SynthesisResult(
        N_PLAYER,
        chosen.ip_action,
        chosen.target,
        chosen.mix,
        chosen.value,
        chosen.lp,
        tuple(candidates),
        baseline,
        game=game,
    )
    _check_result(game, result)
    return result


def synthesize_two_player(game: Game) -> SynthesisResult:
    if game.player_count != 2:
        raise ValueError("two-player synthesis needs exactly two players")
    candidates = []
    for column in range(len(game.actions[1])):
        lp = build_two_player_lp(game, column)
        try:
            mix, value = solve_lp(lp)
        except InfeasibleLP:
            candidates.append(Candidate(None, (column,), lp, None, None))
            continue
        candidates.append(Candidate(None, (column,), lp, mix, value))
    feasible = [c for c in candidates if c.value is not None]
    if not feasible:
        raise SynthesisError("every opponent column is infeasible")
    chosen = max(feasible, key=lambda c: (c.value, -c.target[0]))
    result = SynthesisResult(
        TWO_PLAYER,
        chosen.mix.support[0],
        chosen.target,
        chosen.mix,
        chosen.value,
        chosen.lp,
        tuple(candidates),
        pure_baseline(game),
        game=game,
    )
    _check_result(game, result)
    return result


def synthesize(game: Game) -> SynthesisResult:
    """Route two-player games to the column LPs and larger games to subgames."""
    if game.player_count == 2:
        return synthesize_two_player(game)
    return synthesize_n_player(game)


def _check_result(game: Game, result: SynthesisResult) -> None:
    if expected_ip_utility(game, result.mix, result.target_profile) != result.value:
        raise SynthesisError("reported value does not match the mixture's payoff")
    if not result.lp.is_feasible(result.mix.probs):
        raise SynthesisError("optimal mixture violates its own constraints")
    if result.value < result.baseline_pure[1]:
        raise SynthesisError("LP value fell below the pure-action baseline")
