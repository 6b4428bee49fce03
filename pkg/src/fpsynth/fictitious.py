"""Alternating fictitious play with a pluggable policy for the IP.

Within a stage the IP moves first, then opponents 1..n in index order.  Each
opponent best-responds to empirical marginals that already include the
same-stage moves of lower-indexed players.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .game import (
    DimensionError,
    Game,
    MixedStrategy,
    Profile,
    TieRule,
    argmax_set,
    resolve_tie,
)


@dataclass
class EmpiricalState:
    """Per-player action counts; ``counts[i][a]`` is how often ``i`` played ``a``."""

    counts: list[list[int]]
    steps_counted: list[int]
    last_actions: Profile

    def marginal(self, player: int) -> MixedStrategy:
        return MixedStrategy.from_counts(player, self.counts[player])

    def copy(self) -> "EmpiricalState":
        return EmpiricalState(
            [list(c) for c in self.counts], list(self.steps_counted), self.last_actions
        )


@dataclass(frozen=True)
class FictitiousPlay:
    """The IP best-responds to the opponents' marginals through ``t - 1``.

    ``tie_rule=None`` uses the same rule as the opponents.
    """

    tie_rule: Optional[TieRule] = None


@dataclass(frozen=True)
class FixedAction:
    action: int


@dataclass(frozen=True)
class ScriptedSequence:
    """Play ``warmup`` once, then cycle ``repeat`` forever."""

    warmup: tuple[int, ...]
    repeat: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "warmup", tuple(self.warmup))
        object.__setattr__(self, "repeat", tuple(self.repeat))
        if not self.repeat:
            raise ValueError("scripted sequence needs a non-empty repeating block")

    def action_at(self, t: int) -> int:
        if t <= len(self.warmup):
            return self.warmup[t - 1]
        return self.repeat[(t - len(self.warmup) - 1) % len(self.repeat)]


IpPolicy = Union[FictitiousPlay, FixedAction, ScriptedSequence]


@dataclass(frozen=True)
class StepRecord:
    t: int
    profile: Profile
    payoffs: tuple[Fraction, ...]
    ip_total: Fraction

    @property
    def ip_average(self) -> Fraction:
        return self.ip_total / self.t


@dataclass
class SimulationTrace:
    steps: list[StepRecord]
    final_state: EmpiricalState
    game: Game = field(repr=False)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def ip_average(self) -> Fraction:
        return self.steps[-1].ip_average

    def profiles(self) -> list[Profile]:
        return [s.profile for s in self.steps]


class _Scorer:
    """Integer-only expected-utility scores used inside the simulation loop.

    Each player's payoffs are scaled by a positive integer to clear
    denominators, and beliefs are raw counts, so scores differ from the exact
    expected utilities by a positive factor common to all of that player's
    actions.  Argmax sets are therefore identical.
    """

    def __init__(self, game: Game):
        self.game = game
        self.sizes = game.shape()
        self.tables: list[dict[tuple[int, ...], list[int]]] = []
        for i in range(game.player_count):
            scale = math.lcm(*(vec[i].denominator for vec in game.payoffs.values()))
            table: dict[tuple[int, ...], list[int]] = {}
            for profile, vec in game.payoffs.items():
                others = profile[:i] + profile[i + 1 :]
                row = table.setdefault(others, [0] * self.sizes[i])
                row[profile[i]] = int(vec[i] * scale)
            self.tables.append(table)

    def scores(self, player: int, counts: Sequence[Sequence[int]]) -> list[int]:
        supports = [
            [(a, c) for a, c in enumerate(counts[k]) if c]
            for k in range(len(self.sizes))
            if k != player
        ]
        table = self.tables[player]
        acc = [0] * self.sizes[player]
        for combo in itertools.product(*supports):
            weight = 1
            for _, c in combo:
                weight *= c
            row = table[tuple(a for a, _ in combo)]
            for a, u in enumerate(row):
                acc[a] += weight * u
        return acc

    def respond(self, player, counts, tie_rule, current):
        return resolve_tie(argmax_set(self.scores(player, counts)), tie_rule, current)


def _check_profile(game: Game, profile: Sequence[int]) -> Profile:
    profile = tuple(profile)
    game._check_profile(profile)
    return profile


def init_state(game: Game, initial_actions: Sequence[int]) -> EmpiricalState:
    """One observation per player at ``initial_actions``."""
    profile = _check_profile(game, initial_actions)
    counts = [[0] * n for n in game.shape()]
    for i, a in enumerate(profile):
        counts[i][a] = 1
    return EmpiricalState(counts, [1] * game.player_count, profile)


def _step_in_place(
    scorer: _Scorer, state: EmpiricalState, ip_action: int, tie_rule: TieRule
) -> Profile:
    counts = state.counts
    counts[0][ip_action] += 1
    profile = [ip_action]
    for j in range(1, len(counts)):
        a = scorer.respond(j, counts, tie_rule, state.last_actions[j])
        counts[j][a] += 1
        profile.append(a)
    for i in range(len(counts)):
        state.steps_counted[i] += 1
    state.last_actions = tuple(profile)
    return state.last_actions


def alternating_step(
    game: Game,
    state: EmpiricalState,
    ip_action: int,
    tie_rule: TieRule = TieRule.INERTIA,
) -> tuple[Profile, EmpiricalState]:
    """Play one stage; returns the realized profile and a new state."""
    if not 0 <= ip_action < len(game.actions[0]):
        raise DimensionError(f"IP action {ip_action} out of range")
    if min(state.steps_counted) < 1:
        raise ValueError("state needs at least one observation per player")
    new = state.copy()
    profile = _step_in_place(_Scorer(game), new, ip_action, TieRule(tie_rule))
    return profile, new


def default_tie_rule(game: Game) -> TieRule:
    """Lowest index for a single opponent, inertia with several."""
    return TieRule.LOWEST if game.player_count == 2 else TieRule.INERTIA


def simulate(
    game: Game,
    policy: IpPolicy,
    horizon: int,
    tie_rule: Optional[TieRule] = None,
    initial_actions: Optional[Sequence[int]] = None,
) -> SimulationTrace:
    """Run ``horizon`` stages of alternating FP.

    Stage 1 is the initial profile.  Under :class:`FixedAction` and
    :class:`ScriptedSequence` the IP's stage-1 action comes from the policy,
    overriding the IP entry of ``initial_actions``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    tie_rule = TieRule(tie_rule) if tie_rule is not None else default_tie_rule(game)
    if initial_actions is None:
        initial_actions = (0,) * game.player_count
    initial = list(initial_actions)
    if isinstance(policy, FixedAction):
        initial[0] = policy.action
    elif isinstance(policy, ScriptedSequence):
        initial[0] = policy.action_at(1)
    elif not isinstance(policy, FictitiousPlay):
        raise TypeError(f"unknown policy {policy!r}")
    for a in _policy_actions(policy):
        if not 0 <= a < len(game.actions[0]):
            raise DimensionError(f"policy uses IP action {a}, out of range")

    ip_rule = tie_rule
    if isinstance(policy, FictitiousPlay) and policy.tie_rule is not None:
        ip_rule = TieRule(policy.tie_rule)

    scorer = _Scorer(game)
    state = init_state(game, initial)
    profile = state.last_actions
    vec = game.payoffs[profile]
    total = vec[0]
    steps = [StepRecord(1, profile, vec, total)]
    for t in range(2, horizon + 1):
        if isinstance(policy, FixedAction):
            ip_action = policy.action
        elif isinstance(policy, ScriptedSequence):
            ip_action = policy.action_at(t)
        else:
            ip_action = scorer.respond(0, state.counts, ip_rule, state.last_actions[0])
        profile = _step_in_place(scorer, state, ip_action, tie_rule)
        vec = game.payoffs[profile]
        total += vec[0]
        steps.append(StepRecord(t, profile, vec, total))
    return SimulationTrace(steps, state, game)


def _policy_actions(policy: IpPolicy) -> tuple[int, ...]:
    if isinstance(policy, FixedAction):
        return (policy.action,)
    if isinstance(policy, ScriptedSequence):
        return policy.warmup + policy.repeat
    return ()


def detect_absorption(
    trace: SimulationTrace, window: int = 1
) -> Optional[tuple[Profile, int]]:
    """Earliest time after which the realized profile never changes.

    Returns ``None`` unless that final constant run lasts at least ``window``
    steps.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    steps = trace.steps
    if not steps:
        return None
    last = steps[-1].profile
    first = len(steps)
    while first > 1 and steps[first - 2].profile == last:
        first -= 1
    if len(steps) - first + 1 < window:
        return None
    return last, first
