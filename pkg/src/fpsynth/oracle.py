"""Brute-force cross-checks for the fast paths.

Everything here is deliberately naive and shares no code with the simplex,
the equilibrium search or the expected-utility routine it checks.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .game import Game, MixedStrategy, Profile, check_ordinal_potential, extract_subgame
from .synthesis import (
    N_PLAYER,
    TWO_PLAYER,
    Candidate,
    LinearProgram,
    SynthesisResult,
)

MAX_COLUMNS = 8


class OracleSizeError(ValueError):
    pass


@dataclass(frozen=True)
class VertexSolution:
    q: MixedStrategy
    value: Fraction
    active_rows: frozenset[int]


def _solve_square(matrix: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """Gauss-Jordan elimination; ``None`` when the system is singular."""
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def lp_vertex_oracle(lp: LinearProgram) -> tuple[Optional[VertexSolution], list[VertexSolution]]:
    """Enumerate every basic feasible point of ``{rows @ q <= 0, sum q = 1, q >= 0}``.

    Returns the best vertex (ties: lexicographically smallest ``q``) and the
    full vertex list; the best is ``None`` when the region is empty.
    """
    n = len(lp.objective)
    if n > MAX_COLUMNS:
        raise OracleSizeError(f"{n} columns exceeds the oracle limit of {MAX_COLUMNS}")
    rows = [[Fraction(a) for a in row] for row in lp.rows]
    # candidate tight constraints: LP rows, then q_k >= 0 written as -q_k <= 0
    tight_pool = rows + [[Fraction(-int(i == k)) for i in range(n)] for k in range(n)]
    seen = {}
    for subset in itertools.combinations(range(len(tight_pool)), n - 1):
        matrix = [tight_pool[i] for i in subset] + [[Fraction(1)] * n]
        rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
        q = _solve_square(matrix, rhs)
        if q is None or any(x < 0 for x in q):
            continue
        activity = [sum(a * x for a, x in zip(row, q)) for row in rows]
        if any(v > 0 for v in activity):
            continue
        key = tuple(q)
        if key not in seen:
            value = sum(c * x for c, x in zip(lp.objective, q))
            active = frozenset(r for r, v in enumerate(activity) if v == 0)
            seen[key] = VertexSolution(MixedStrategy(0, key), Fraction(value), active)
    vertices = list(seen.values())
    if not vertices:
        return None, []
    best = min(vertices, key=lambda v: (-v.value, v.q.probs))
    return best, vertices


def optimal_vertices(lp: LinearProgram) -> list[VertexSolution]:
    best, vertices = lp_vertex_oracle(lp)
    if best is None:
        return []
    return sorted((v for v in vertices if v.value == best.value), key=lambda v: v.q.probs)


def _expected(game: Game, player: int, action: int, others: Sequence[Optional[MixedStrategy]]):
    total = Fraction(0)
    for profile in itertools.product(*(range(len(a)) for a in game.actions)):
        if profile[player] != action:
            continue
        w = Fraction(1)
        for i, a in enumerate(profile):
            if i != player:
                w *= others[i].probs[a]
        total += w * game.payoffs[profile][player]
    return total


def best_response_oracle(
    game: Game, player: int, others: Sequence[Optional[MixedStrategy]]
) -> set[int]:
    """The full argmax set, by enumerating every joint profile."""
    values = {a: _expected(game, player, a, others) for a in range(len(game.actions[player]))}
    top = max(values.values())
    return {a for a, v in values.items() if v == top}


def _is_equilibrium(game: Game, y0: int, opp: Profile) -> bool:
    here = game.payoffs[(y0, *opp)]
    for j in range(1, game.player_count):
        for alt in range(len(game.actions[j])):
            dev = list(opp)
            dev[j - 1] = alt
            if game.payoffs[(y0, *dev)][j] > here[j]:
                return False
    return True


def _oracle_lp(game: Game, target: Profile) -> LinearProgram:
    cols = range(len(game.actions[0]))
    rows = []
    labels = []
    for j in range(1, game.player_count):
        for alt in range(len(game.actions[j])):
            if alt == target[j - 1]:
                continue
            dev = list(target)
            dev[j - 1] = alt
            rows.append(
                tuple(
                    game.payoffs[(k, *dev)][j] - game.payoffs[(k, *target)][j] for k in cols
                )
            )
            labels.append((j, alt))
    objective = tuple(game.payoffs[(k, *target)][0] for k in cols)
    return LinearProgram(objective, tuple(rows), tuple(labels))


def exhaustive_synthesis_oracle(game: Game) -> SynthesisResult:
    """Recompute the synthesis from pure enumeration and vertex enumeration."""
    if any(len(a) > 4 for a in game.actions) or game.opponent_count > 3:
        raise OracleSizeError("oracle synthesis is limited to 4 actions and 3 opponents")
    opp_space = list(itertools.product(*(range(len(a)) for a in game.actions[1:])))
    candidates = []
    if game.player_count == 2:
        mode = TWO_PLAYER
        for column in range(len(game.actions[1])):
            lp = _oracle_lp(game, (column,))
            best, _ = lp_vertex_oracle(lp)
            candidates.append(
                Candidate(None, (column,), lp, best and best.q, best and best.value)
            )
        baseline = max(
            (
                (y0, game.payoffs[(y0, reply)][0])
                for y0 in range(len(game.actions[0]))
                for reply in [
                    min(
                        range(len(game.actions[1])),
                        key=lambda b: (-game.payoffs[(y0, b)][1], b),
                    )
                ]
            ),
            key=lambda t: (t[1], -t[0]),
        )
    else:
        mode = N_PLAYER
        for y0 in range(len(game.actions[0])):
            eq = [opp for opp in opp_space if _is_equilibrium(game, y0, opp)]
            if len(eq) != 1:
                raise ValueError(f"subgame {game.actions[0][y0]} has {len(eq)} pure equilibria")
            lp = _oracle_lp(game, eq[0])
            best, _ = lp_vertex_oracle(lp)
            candidates.append(Candidate(y0, eq[0], lp, best.q, best.value))
        baseline = max(
            ((c.ip_action, game.payoffs[(c.ip_action, *c.target)][0]) for c in candidates),
            key=lambda t: (t[1], -t[0]),
        )
    feasible = [c for c in candidates if c.value is not None]
    chosen = max(feasible, key=lambda c: (c.value, -(c.ip_action if mode == N_PLAYER else c.target[0])))
    y0 = chosen.ip_action if mode == N_PLAYER else chosen.mix.support[0]
    return SynthesisResult(
        mode,
        y0,
        chosen.target,
        chosen.mix,
        chosen.value,
        chosen.lp,
        tuple(candidates),
        baseline,
        game=game,
    )


def random_game(
    rng: random.Random,
    ip_actions: int,
    opponent_actions: Sequence[int],
    low: int = 1,
    high: int = 9,
) -> Game:
    sizes = (ip_actions, *opponent_actions)
    labels = tuple(tuple(f"a{i}{k}" for k in range(n)) for i, n in enumerate(sizes))
    payoffs = {
        profile: tuple(rng.randint(low, high) for _ in sizes)
        for profile in itertools.product(*(range(n) for n in sizes))
    }
    return Game(labels, payoffs)


def random_validated_game(
    seed: int,
    max_ip_actions: int = 3,
    max_opponents: int = 2,
    max_actions: int = 3,
    max_tries: int = 10_000,
) -> Game:
    """Uniform integer payoffs in [1, 9], resampled until every subgame is
    acyclic with a unique pure equilibrium.  Deterministic in ``seed``."""
    rng = random.Random(seed)
    for _ in range(max_tries):
        ip = rng.randint(2, max_ip_actions)
        opponents = rng.randint(1, max_opponents)
        sizes = [rng.randint(2, max_actions) for _ in range(opponents)]
        game = random_game(rng, ip, sizes)
        if all(
            check_ordinal_potential(extract_subgame(game, y0)).passed for y0 in range(ip)
        ):
            return Game(game.actions, game.payoffs, title=f"random seed {seed}")
    raise RuntimeError(f"no validated game found for seed {seed}")
