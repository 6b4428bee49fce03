"""Finite normal-form games with exact rational payoffs.

Player 0 is the intelligent player (IP); players 1..n are the opponents that
run fictitious play.  Every payoff is a :class:`fractions.Fraction`, so
expected utilities, best responses and equilibrium checks are exact.
"""
from __future__ import annotations

import enum
import graphlib
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

Profile = tuple[int, ...]


class DimensionError(ValueError):
    """A profile, strategy or index does not fit the game's dimensions."""


class TieRule(str, enum.Enum):
    """How a best-responding player breaks ties inside the argmax set."""

    LOWEST = "lowest"
    INERTIA = "inertia"


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions or ``"p/q"`` strings; floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            if sep:
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational literal: {value!r}") from None
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


@dataclass(frozen=True)
class Game:
    """An (n+1)-player game stored as a dense payoff table.

    Parameters
    ----------
    actions : sequence of sequences of str
        Ordered action labels for each player; index 0 is the IP.
    payoffs : mapping
        Maps every joint profile (tuple of action indices) to the payoff
        vector ``(U_0, ..., U_n)``.
    names : sequence of str, optional
        Display names of the players.
    """

    actions: tuple[tuple[str, ...], ...]
    payoffs: Mapping[Profile, tuple[Fraction, ...]]
    names: tuple[str, ...] = ()
    title: str = ""
    source: str = ""

    def __post_init__(self):
        actions = tuple(tuple(str(a) for a in acts) for acts in self.actions)
        object.__setattr__(self, "actions", actions)
        if len(actions) < 2:
            raise DimensionError("a game needs at least two players")
        for i, acts in enumerate(actions):
            if not acts:
                raise DimensionError(f"player {i} has no actions")
            if len(set(acts)) != len(acts):
                raise DimensionError(f"player {i} has duplicate action labels")
        names = tuple(self.names) or tuple(
            ["IP"] + [f"P{i}" for i in range(1, len(actions))]
        )
        if len(names) != len(actions):
            raise DimensionError("one name per player is required")
        object.__setattr__(self, "names", names)

        table = {}
        for profile, vec in self.payoffs.items():
            profile = tuple(int(a) for a in profile)
            self._check_profile(profile)
            vec = tuple(as_fraction(v) for v in vec)
            if len(vec) != len(actions):
                raise DimensionError(
                    f"payoff vector at {profile} has {len(vec)} entries, "
                    f"expected {len(actions)}"
                )
            table[profile] = vec
        expected = 1
        for acts in actions:
            expected *= len(acts)
        if len(table) != expected:
            missing = [p for p in self.profiles() if p not in table]
            raise DimensionError(
                f"payoff table has {len(table)} profiles, expected {expected}; "
                f"missing e.g. {self.profile_labels(missing[0]) if missing else '?'}"
            )
        object.__setattr__(self, "payoffs", table)

    @property
    def player_count(self) -> int:
        return len(self.actions)

    @property
    def opponent_count(self) -> int:
        return len(self.actions) - 1

    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*(range(len(a)) for a in self.actions))

    def _check_profile(self, profile: Sequence[int]) -> None:
        if len(profile) != len(self.actions):
            raise DimensionError(
                f"profile {tuple(profile)} has length {len(profile)}, "
                f"expected {len(self.actions)}"
            )
        for i, a in enumerate(profile):
            if not 0 <= a < len(self.actions[i]):
                raise DimensionError(f"action {a} out of range for player {i}")

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.actions[player].index(label)
        except ValueError:
            raise DimensionError(
                f"player {player} has no action {label!r}; "
                f"choices are {list(self.actions[player])}"
            ) from None

    def profile_from_labels(self, labels: Sequence[str]) -> Profile:
        if len(labels) != self.player_count:
            raise DimensionError(
                f"expected {self.player_count} labels, got {len(labels)}"
            )
        return tuple(self.action_index(i, lab) for i, lab in enumerate(labels))

    def profile_labels(self, profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.actions[i][a] for i, a in enumerate(profile))

    def with_payoffs(self, payoffs: Mapping[Profile, Sequence]) -> "Game":
        return Game(self.actions, payoffs, self.names, self.title, self.source)


def payoff(game: Game, profile: Sequence[int]) -> tuple[Fraction, ...]:
    """Return the stored payoff vector at a pure profile."""
    game._check_profile(profile)
    return game.payoffs[tuple(profile)]


@dataclass(frozen=True)
class MixedStrategy:
    """An exact probability vector over one player's actions."""

    owner: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(as_fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise DimensionError("empty mixed strategy")
        if any(p < 0 for p in probs):
            raise ValueError(f"negative probability in {probs}")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    @classmethod
    def pure(cls, owner: int, size: int, action: int) -> "MixedStrategy":
        if not 0 <= action < size:
            raise DimensionError(f"action {action} out of range 0..{size - 1}")
        return cls(owner, tuple(Fraction(int(k == action)) for k in range(size)))

    @classmethod
    def from_counts(cls, owner: int, counts: Sequence[int]) -> "MixedStrategy":
        total = sum(counts)
        return cls(owner, tuple(Fraction(c, total) for c in counts))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, p in enumerate(self.probs) if p)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, k: int) -> Fraction:
        return self.probs[k]


def _check_others(game: Game, player: int, others: Sequence[Optional[MixedStrategy]]):
    if not 0 <= player < game.player_count:
        raise DimensionError(f"no player {player}")
    if len(others) != game.player_count:
        raise DimensionError(
            f"need one strategy slot per player ({game.player_count}), got {len(others)}"
        )
    for i, strat in enumerate(others):
        if i == player:
            continue
        if strat is None or len(strat) != len(game.actions[i]):
            raise DimensionError(f"bad strategy for player {i}")


def expected_utility_vs_mix(
    game: Game,
    player: int,
    own_action: int,
    others: Sequence[Optional[MixedStrategy]],
) -> Fraction:
    """Expected payoff of a pure action against independent mixed strategies.

    ``others`` has one slot per player; the slot of ``player`` is ignored.
    """
    _check_others(game, player, others)
    if not 0 <= own_action < len(game.actions[player]):
        raise DimensionError(f"action {own_action} out of range for player {player}")
    supports = [
        [own_action] if i == player else list(others[i].support)
        for i in range(game.player_count)
    ]
    total = Fraction(0)
    for profile in itertools.product(*supports):
        weight = Fraction(1)
        for i, a in enumerate(profile):
            if i != player:
                weight *= others[i].probs[a]
        total += weight * game.payoffs[profile][player]
    return total


def expected_ip_utility(
    game: Game, ip_mix: MixedStrategy, opp_profile: Sequence[int]
) -> Fraction:
    """IP payoff of a mixture against opponents frozen at a pure profile."""
    if len(ip_mix) != len(game.actions[0]):
        raise DimensionError("IP mixture has the wrong length")
    if len(opp_profile) != game.opponent_count:
        raise DimensionError("opponent profile has the wrong length")
    return sum(
        (q * payoff(game, (k, *opp_profile))[0] for k, q in enumerate(ip_mix.probs)),
        Fraction(0),
    )


def resolve_tie(argmax: Sequence[int], tie_rule: TieRule, current: Optional[int]) -> int:
    if tie_rule is TieRule.INERTIA and current is not None and current in argmax:
        return current
    return min(argmax)


def argmax_set(values: Sequence) -> list[int]:
    best = max(values)
    return [k for k, v in enumerate(values) if v == best]


def best_response(
    game: Game,
    player: int,
    others: Sequence[Optional[MixedStrategy]],
    tie_rule: TieRule = TieRule.LOWEST,
    current: Optional[int] = None,
) -> int:
    """Pick one action from the exact argmax set, breaking ties by ``tie_rule``.

    Under ``INERTIA`` the player keeps ``current`` when it is still optimal,
    i.e. it only moves for a strictly higher expected payoff.
    """
    values = [
        expected_utility_vs_mix(game, player, a, others)
        for a in range(len(game.actions[player]))
    ]
    return resolve_tie(argmax_set(values), TieRule(tie_rule), current)


@dataclass(frozen=True)
class Subgame:
    """The opponents' game left after freezing the IP at ``fixed_ip_action``."""

    base: Game
    fixed_ip_action: int

    def __post_init__(self):
        if not 0 <= self.fixed_ip_action < len(self.base.actions[0]):
            raise DimensionError(f"IP action {self.fixed_ip_action} out of range")

    @property
    def opponent_count(self) -> int:
        return self.base.opponent_count

    @property
    def label(self) -> str:
        return self.base.actions[0][self.fixed_ip_action]

    def opponent_actions(self) -> tuple[tuple[str, ...], ...]:
        return self.base.actions[1:]

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*(range(len(a)) for a in self.base.actions[1:]))

    def utility(self, opponent: int, opp_profile: Sequence[int]) -> Fraction:
        """``U_opponent(y0, opp_profile)``; ``opponent`` counts from 1."""
        return self.base.payoffs[(self.fixed_ip_action, *opp_profile)][opponent]

    def ip_utility(self, opp_profile: Sequence[int]) -> Fraction:
        return self.base.payoffs[(self.fixed_ip_action, *opp_profile)][0]

    def deviations(self, opp_profile: Profile) -> Iterator[tuple[int, Profile]]:
        """Yield ``(opponent, new_profile)`` for every unilateral deviation."""
        for j in range(1, self.opponent_count + 1):
            for alt in range(len(self.base.actions[j])):
                if alt != opp_profile[j - 1]:
                    new = list(opp_profile)
                    new[j - 1] = alt
                    yield j, tuple(new)

    def labels(self, opp_profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.base.actions[j + 1][a] for j, a in enumerate(opp_profile))


def extract_subgame(game: Game, y0: int) -> Subgame:
    return Subgame(game, y0)


def pure_nash(subgame: Subgame) -> list[Profile]:
    """All opponent profiles with no strictly improving unilateral deviation."""
    return [
        prof
        for prof in subgame.profiles()
        if not any(
            subgame.utility(j, dev) > subgame.utility(j, prof)
            for j, dev in subgame.deviations(prof)
        )
    ]


@dataclass(frozen=True)
class Finding:
    check: str
    location: str
    message: str
    severity: str = "failure"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    findings: tuple[Finding, ...] = field(default_factory=tuple)

    @classmethod
    def from_findings(cls, findings: Iterable[Finding]) -> "ValidationReport":
        findings = tuple(findings)
        return cls(not any(f.severity == "failure" for f in findings), findings)

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport.from_findings(self.findings + other.findings)

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def failures(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "failure"]


def check_nondegenerate(game: Game) -> ValidationReport:
    """Literal degeneracy scan: equal opponent payoffs at distinct profiles.

    Every tie is reported as a warning grouped by payoff value.  This never
    fails a game; the hard gate is :func:`check_ordinal_potential`.
    """
    findings = []
    for y0 in range(len(game.actions[0])):
        sub = Subgame(game, y0)
        for j in range(1, game.player_count):
            by_value: dict[Fraction, list[Profile]] = {}
            for prof in sub.profiles():
                by_value.setdefault(sub.utility(j, prof), []).append(prof)
            for value, profs in by_value.items():
                if len(profs) > 1:
                    where = ", ".join(
                        "(" + ",".join(game.profile_labels((y0, *p))) + ")" for p in profs
                    )
                    findings.append(
                        Finding(
                            "nondegenerate",
                            f"subgame {sub.label}, player {game.names[j]}",
                            f"payoff {value} repeated at {where}",
                            "warning",
                        )
                    )
    return ValidationReport.from_findings(findings)


def better_response_graph(subgame: Subgame) -> dict[Profile, set[Profile]]:
    """Strict better-response edges between opponent profiles."""
    graph: dict[Profile, set[Profile]] = {}
    for prof in subgame.profiles():
        graph[prof] = {
            dev
            for j, dev in subgame.deviations(prof)
            if subgame.utility(j, dev) > subgame.utility(j, prof)
        }
    return graph


def find_cycle(graph: Mapping[Profile, set[Profile]]) -> Optional[list[Profile]]:
    # graphlib wants predecessor sets; reversing edges keeps cycles as cycles
    preds: dict[Profile, set[Profile]] = {node: set() for node in graph}
    for node, succ in graph.items():
        for s in succ:
            preds[s].add(node)
    try:
        tuple(graphlib.TopologicalSorter(preds).static_order())
    except graphlib.CycleError as err:
        return list(reversed(err.args[1]))
    return None


def check_ordinal_potential(subgame: Subgame) -> ValidationReport:
    """Pass iff the better-response graph is acyclic with exactly one sink."""
    where = f"subgame {subgame.label}"
    findings = []
    cycle = find_cycle(better_response_graph(subgame))
    if cycle is not None:
        path = " -> ".join("(" + ",".join(subgame.labels(p)) + ")" for p in cycle)
        findings.append(Finding("ordinal_potential", where, f"better-response cycle {path}"))
    nash = pure_nash(subgame)
    if len(nash) != 1:
        found = ", ".join("(" + ",".join(subgame.labels(p)) + ")" for p in nash) or "none"
        findings.append(
            Finding(
                "unique_pure_nash", where, f"expected one pure Nash equilibrium, found {found}"
            )
        )
    return ValidationReport.from_findings(findings)


def validate_game(game: Game) -> ValidationReport:
    """Degeneracy warnings plus the per-subgame ordinal-potential gate."""
    report = check_nondegenerate(game)
    for y0 in range(len(game.actions[0])):
        report = report.merge(check_ordinal_potential(Subgame(game, y0)))
    return report


def unique_nash(subgame: Subgame) -> Profile:
    """The unique pure equilibrium of a validated subgame."""
    report = check_ordinal_potential(subgame)
    if not report.passed:
        raise InvalidGameError(subgame.label, report)
    return pure_nash(subgame)[0]


class InvalidGameError(ValueError):
    """A subgame fails the acyclic / unique-equilibrium requirement."""

    def __init__(self, subgame: str, report: ValidationReport):
        self.subgame = subgame
        self.report = report
        msgs = "; ".join(f.message for f in report.failures)
        super().__init__(f"subgame {subgame}: {msgs}")
