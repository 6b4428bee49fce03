"""Compile a synthesized mixture into a pure-action schedule and verify it.

The schedule is a warm-up ``X'`` played once and a block ``X*`` repeated
forever.  In n-player games ``X'`` repeats the equilibrium IP action until
the opponents are absorbed at the subgame equilibrium; ``X*`` realizes the
mixture with exact integer counts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .fictitious import FixedAction, ScriptedSequence, default_tie_rule, simulate
from .game import Game, MixedStrategy, Profile, Subgame, TieRule, extract_subgame
from .synthesis import N_PLAYER, TWO_PLAYER, LinearProgram, SynthesisResult


class NonConvergenceError(RuntimeError):
    """Opponents did not settle at the subgame equilibrium within the cap."""


class PlanningError(RuntimeError):
    """No block ordering keeps every constraint satisfied."""

    def __init__(self, message: str, violation: Optional["Violation"] = None):
        super().__init__(message)
        self.violation = violation


@dataclass(frozen=True)
class Violation:
    """First broken constraint: ``row`` is an LP row label or ``("frequency", action)``."""

    time: int
    opponent: Optional[int]
    row: tuple
    value: Fraction


@dataclass(frozen=True)
class TrajectoryPlan:
    warmup: tuple[int, ...]
    block: tuple[int, ...]
    tau_star: int
    tau_zero: int
    tau_prime: int
    epsilon: int
    source: SynthesisResult = field(repr=False)
    reorders: tuple[str, ...] = ()

    @property
    def policy(self) -> ScriptedSequence:
        return ScriptedSequence(self.warmup, self.block)


@dataclass(frozen=True)
class MonitorReport:
    ok: bool
    first_violation: Optional[Violation]
    steps_checked: int


@dataclass(frozen=True)
class VerificationReport:
    held: bool
    first_violation: Optional[Violation]
    absorption_time: Optional[int]
    first_deviation: Optional[tuple[int, int]]
    payoff_after: tuple[Fraction, ...]
    expected_after: tuple[Fraction, ...]
    limit_gap: Fraction
    rate_constant: Fraction
    final_average: Fraction
    steps: int

    @property
    def averages_match(self) -> bool:
        return self.payoff_after == self.expected_after


def tau_star(mix: MixedStrategy) -> int:
    """Shortest block length giving every action an integer count."""
    return math.lcm(*(p.denominator for p in mix.probs if p))


def block_counts(mix: MixedStrategy) -> list[int]:
    n = tau_star(mix)
    return [int(p * n) for p in mix.probs]


def tau_zero(
    subgame: Subgame,
    target: Sequence[int],
    tie_rule: Optional[TieRule] = None,
    cap: Optional[int] = None,
) -> int:
    """Worst-case absorption time at ``target`` with the IP frozen.

    Every initial opponent profile is simulated for ``cap`` stages (default
    ten times the number of opponent profiles).  Stage 1 is the initial
    profile, so an opponent profile that starts at ``target`` and stays
    there scores 1.
    """
    game = subgame.base
    target = tuple(target)
    space = list(subgame.profiles())
    cap = cap or 10 * len(space)
    y0 = subgame.fixed_ip_action
    worst = 0
    for opp in space:
        trace = simulate(game, FixedAction(y0), cap, tie_rule, (y0, *opp))
        first = _locked_since(trace.profiles(), target)
        if first is None:
            raise NonConvergenceError(
                f"subgame {subgame.label}: start ({','.join(subgame.labels(opp))}) "
                f"not absorbed at ({','.join(subgame.labels(target))}) "
                f"within {cap} stages"
            )
        worst = max(worst, first)
    return worst


def _locked_since(profiles: Sequence[Profile], target: Profile) -> Optional[int]:
    if not profiles or profiles[-1][1:] != target:
        return None
    first = len(profiles)
    while first > 1 and profiles[first - 2][1:] == target:
        first -= 1
    return first


class _Monitor:
    """Incremental exact check of the LP rows (and, for n-player plans, the
    per-action frequency bounds) against the IP's empirical counts."""

    def __init__(self, lp: LinearProgram, mix: MixedStrategy, y0: int, frequencies: bool):
        self.lp = lp
        self.mix = mix
        self.y0 = y0
        self.frequencies = frequencies

    def check(self, counts: Sequence[int], time: int) -> Optional[Violation]:
        for label, row in zip(self.lp.row_labels, self.lp.rows):
            value = sum((a * c for a, c in zip(row, counts)), Fraction(0))
            if value > 0:
                return Violation(time, label[0], label, value / sum(counts))
        if self.frequencies:
            total = sum(counts)
            for k in self.mix.support:
                freq = Fraction(counts[k], total)
                if k == self.y0 and freq < self.mix[k]:
                    return Violation(time, None, ("frequency", k), freq)
                if k != self.y0 and freq > self.mix[k]:
                    return Violation(time, None, ("frequency", k), freq)
        return None


def _monitor_for(synth: SynthesisResult) -> _Monitor:
    return _Monitor(synth.lp, synth.mix, synth.chosen_y0, synth.mode == N_PLAYER)


def _order_block(
    monitor: _Monitor, history: Sequence[int], quota: Sequence[int], start_time: int
) -> Optional[list[int]]:
    """Depth-first search for an order meeting every constraint, trying the
    lowest-index action with remaining quota first."""
    quota = list(quota)
    counts = list(history)
    order: list[int] = []
    total = sum(quota)
    budget = 100_000
    k = 0
    while len(order) < total:
        budget -= 1
        if budget < 0:
            return None
        placed = False
        for a in range(k, len(quota)):
            if quota[a] == 0:
                continue
            counts[a] += 1
            if monitor.check(counts, start_time + len(order)) is None:
                quota[a] -= 1
                order.append(a)
                k = 0
                placed = True
                break
            counts[a] -= 1
        if not placed:
            if not order:
                return None
            a = order.pop()
            counts[a] -= 1
            quota[a] += 1
            k = a + 1
    return order


def algorithm_block(synth: SynthesisResult) -> list[int]:
    """Equilibrium action first, then the rest of the support in ascending order."""
    counts = block_counts(synth.mix)
    y0 = synth.chosen_y0
    block = [y0] * counts[y0]
    for k, c in enumerate(counts):
        if k != y0:
            block.extend([k] * c)
    return block


def build_plan(
    synth: SynthesisResult,
    tie_rule: Optional[TieRule] = None,
    game: Optional[Game] = None,
) -> TrajectoryPlan:
    game = game or synth.game
    if game is None:
        raise ValueError("synthesis result carries no game; pass one explicitly")
    tie_rule = TieRule(tie_rule) if tie_rule is not None else default_tie_rule(game)
    n_star = tau_star(synth.mix)
    counts = block_counts(synth.mix)
    monitor = _monitor_for(synth)
    block = algorithm_block(synth)
    reorders = []

    if synth.mode == N_PLAYER:
        sub = extract_subgame(game, synth.chosen_y0)
        t0 = tau_zero(sub, synth.target_profile, tie_rule)
        t_prime = max(t0, n_star)
        warmup = [synth.chosen_y0] * t_prime
        history = [0] * len(counts)
        history[synth.chosen_y0] = t_prime
    else:
        # no absorbing warm-up exists: the target column need not be an
        # equilibrium of any subgame, so the warm-up is whole copies of the block
        history = list(counts)
        warmup = None
        t0 = None
        t_prime = n_star

    violation = _first_violation(monitor, history, block, t_prime + 1)
    if violation is not None:
        ordered = _order_block(monitor, history, counts, t_prime + 1)
        if ordered is None:
            raise PlanningError(
                "no block order keeps every constraint satisfied", violation
            )
        reorders.append(
            f"default order broke {violation.row} at step {violation.time}; "
            f"reordered block to {ordered}"
        )
        block = ordered

    if synth.mode == TWO_PLAYER:
        t0 = _two_player_absorption(game, block, synth.target_profile, tie_rule)
        copies = max(1, -(-t0 // n_star))
        warmup = block * copies
        t_prime = len(warmup)

    return TrajectoryPlan(
        tuple(warmup),
        tuple(block),
        n_star,
        t0,
        t_prime,
        t_prime - n_star,
        synth,
        tuple(reorders),
    )


def _first_violation(monitor, history, block, start_time) -> Optional[Violation]:
    counts = list(history)
    for i, a in enumerate(block):
        counts[a] += 1
        v = monitor.check(counts, start_time + i)
        if v is not None:
            return v
    return None


def _two_player_absorption(game, block, target, tie_rule) -> int:
    """Worst first time the opponent settles at ``target`` under the cycled block."""
    horizon = max(4 * len(block), 10 * len(game.actions[1]) + len(block))
    worst = 0
    for opp in range(len(game.actions[1])):
        trace = simulate(
            game, ScriptedSequence((), tuple(block)), horizon, tie_rule, (block[0], opp)
        )
        first = _locked_since(trace.profiles(), tuple(target))
        # the locked run must span at least two whole blocks to rule out a
        # deviation that recurs once per block
        if first is None or first > horizon // 2:
            raise PlanningError(
                f"opponent starting at {game.actions[1][opp]} is not locked "
                f"at {game.actions[1][target[0]]} within {horizon} stages"
            )
        worst = max(worst, first)
    return worst


def custom_plan(
    synth: SynthesisResult, warmup: Sequence[int], block: Sequence[int], tau_zero: int = 0
) -> TrajectoryPlan:
    """A plan with caller-chosen sequences and no repair, for what-if checks."""
    return TrajectoryPlan(
        tuple(warmup),
        tuple(block),
        len(block),
        tau_zero,
        len(warmup),
        len(warmup) - len(block),
        synth,
        ("custom",),
    )


def monitor_constraints(plan: TrajectoryPlan, upto_reps: int) -> MonitorReport:
    """Walk ``X'`` then ``upto_reps`` copies of ``X*``, checking every step.

    Two-player warm-ups are the transient and are exempt.
    """
    synth = plan.source
    monitor = _monitor_for(synth)
    counts = [0] * len(synth.mix)
    exempt = synth.mode == TWO_PLAYER
    steps = 0
    seq = itertools.chain(plan.warmup, itertools.chain.from_iterable([plan.block] * upto_reps))
    for t, a in enumerate(seq, start=1):
        counts[a] += 1
        if exempt and t <= len(plan.warmup):
            continue
        steps += 1
        v = monitor.check(counts, t)
        if v is not None:
            return MonitorReport(False, v, steps)
    return MonitorReport(True, None, steps)


def verify_plan(
    game: Game,
    plan: TrajectoryPlan,
    reps: int,
    tie_rule: Optional[TieRule] = None,
    initial_actions: Optional[Sequence[int]] = None,
) -> VerificationReport:
    """Closed-loop run of the plan against fictitious-play opponents."""
    if reps < 1:
        raise ValueError("need at least one repetition")
    synth = plan.source
    target = tuple(synth.target_profile)
    horizon = plan.tau_prime + reps * plan.tau_star
    if initial_actions is None:
        initial_actions = (0,) * game.player_count
    trace = simulate(game, plan.policy, horizon, tie_rule, initial_actions)
    profiles = trace.profiles()
    absorbed = _locked_since(profiles, target)
    first_dev = None
    for t in range(max(plan.tau_zero, 1) + 1, horizon + 1):
        opp = profiles[t - 1][1:]
        if opp != target:
            j = next(i for i, (a, b) in enumerate(zip(opp, target), 1) if a != b)
            first_dev = (t, j)
            break
    held = (
        absorbed is not None
        and absorbed <= max(plan.tau_zero, 1)
        and first_dev is None
    )

    value = synth.value
    warm_total = trace.steps[plan.tau_prime - 1].ip_total if plan.tau_prime else Fraction(0)
    payoff_after, expected_after = [], []
    for p in range(1, reps + 1):
        T = plan.tau_prime + p * plan.tau_star
        payoff_after.append(trace.steps[T - 1].ip_average)
        expected_after.append((warm_total + p * plan.tau_star * value) / T)
    final = trace.ip_average
    spread = max(
        (abs(s.payoffs[0] - value) for s in trace.steps[: plan.tau_prime]),
        default=Fraction(0),
    )
    monitor = monitor_constraints(plan, reps)
    return VerificationReport(
        held=held,
        first_violation=monitor.first_violation,
        absorption_time=absorbed,
        first_deviation=first_dev,
        payoff_after=tuple(payoff_after),
        expected_after=tuple(expected_after),
        limit_gap=abs(final - value),
        rate_constant=plan.tau_prime * spread,
        final_average=final,
        steps=horizon,
    )
