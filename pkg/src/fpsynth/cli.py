"""Command-line entry point: ``fpsynth {validate,simulate,synthesize,plan,verify}``.

Exit codes: 0 ok, 1 parse or configuration error, 2 validation failure,
3 planning failure, 4 oracle mismatch.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from decimal import Context, Decimal
from fractions import Fraction
from typing import Any, Optional, Sequence, TextIO

from .fictitious import (
    FictitiousPlay,
    FixedAction,
    ScriptedSequence,
    default_tie_rule,
    detect_absorption,
    simulate,
)
from .game import (
    Game,
    InvalidGameError,
    MixedStrategy,
    TieRule,
    best_response,
    validate_game,
)
from .gamefile import GameFileError, load_game
from .oracle import (
    OracleSizeError,
    best_response_oracle,
    exhaustive_synthesis_oracle,
    lp_vertex_oracle,
)
from .synthesis import N_PLAYER, SynthesisResult, solve_lp, synthesize
from .trajectory import NonConvergenceError, PlanningError, build_plan, verify_plan

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_PLANNING = 3
EXIT_ORACLE = 4

JSON_MARKER = "--- json ---"


class ConfigError(ValueError):
    pass


class _Fmt:
    def __init__(self, precision: int):
        self.ctx = Context(prec=precision)

    def dec(self, x) -> str:
        x = Fraction(x)
        d = self.ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
        return format(d.normalize(self.ctx), "f")

    def num(self, x) -> str:
        x = Fraction(x)
        if x.denominator == 1:
            return str(x)
        return f"{x} ≈ {self.dec(x)}"

    def vec(self, xs) -> str:
        return "(" + ", ".join(str(Fraction(x)) for x in xs) + ")"


def _exact(x) -> str:
    return str(Fraction(x))


def _labels(game: Game, profile: Sequence[int]) -> str:
    return "(" + ",".join(game.profile_labels(profile)) + ")"


def _parse_init(game: Game, text: Optional[str]) -> Optional[tuple[int, ...]]:
    if text is None:
        return None
    labels = [s.strip() for s in text.split(",")]
    try:
        return game.profile_from_labels(labels)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"--init {text!r}: {exc}") from exc


def _ip_actions(game: Game, text: str) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(game.action_index(0, s.strip()) for s in text.split(","))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"policy: {exc}") from exc


def parse_policy(game: Game, spec: str):
    """``fp``, ``fixed:LABEL`` or ``script:WARMUP/REPEAT`` with comma-separated labels."""
    kind, _, rest = spec.partition(":")
    if kind == "fp" and not rest:
        return FictitiousPlay()
    if kind == "fixed" and rest:
        actions = _ip_actions(game, rest)
        if len(actions) != 1:
            raise ConfigError("fixed policy takes exactly one IP action label")
        return FixedAction(actions[0])
    if kind == "script" and rest:
        warm, slash, repeat = rest.partition("/")
        if not slash:
            warm, repeat = "", warm
        repeat_actions = _ip_actions(game, repeat)
        if not repeat_actions:
            raise ConfigError("script policy needs a non-empty repeating part")
        return ScriptedSequence(_ip_actions(game, warm), repeat_actions)
    raise ConfigError(f"bad policy spec {spec!r}; use fp, fixed:LABEL or script:W,.../R,...")


def _emit(args, text_lines: list[str], payload: dict) -> None:
    doc = "\n".join(text_lines) + f"\n{JSON_MARKER}\n" + json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(doc)


def _tie_rule(args, game: Game) -> TieRule:
    return TieRule(args.tie_rule) if args.tie_rule else default_tie_rule(game)


def _require_valid(game: Game) -> None:
    report = validate_game(game)
    if not report.passed:
        raise InvalidGameError(
            "; ".join(sorted({f.location for f in report.failures})), report
        )


def cmd_validate(args, game: Game) -> int:
    report = validate_game(game)
    lines = [f"game: {game.title or args.game}", f"status: {'pass' if report.passed else 'FAIL'}"]
    for f in report.findings:
        lines.append(f"  [{f.severity}] {f.check} @ {f.location}: {f.message}")
    payload = {
        "passed": report.passed,
        "findings": [dataclasses.asdict(f) for f in report.findings],
    }
    _emit(args, lines, payload)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_simulate(args, game: Game) -> int:
    fmt = _Fmt(args.precision)
    policy = parse_policy(game, args.policy)
    tie_rule = _tie_rule(args, game)
    trace = simulate(game, policy, args.horizon, tie_rule, _parse_init(game, args.init))

    out: TextIO = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for s in trace.steps:
            record = {
                "t": s.t,
                "actions": list(game.profile_labels(s.profile)),
                "payoffs": [_exact(v) for v in s.payoffs],
                "ip_average": _exact(s.ip_average),
                "ip_average_decimal": fmt.dec(s.ip_average),
            }
            out.write(json.dumps(record) + "\n")
    finally:
        if args.out:
            out.close()

    window = args.window or max(1, args.horizon // 2)
    absorbed = detect_absorption(trace, window)
    summary = sys.stderr if not args.out else sys.stdout
    if absorbed:
        profile, first = absorbed
        print(
            f"absorbed at {_labels(game, profile)} from t={first}, "
            f"IP payoff there {fmt.num(game.payoffs[profile][0])}, "
            f"IP avg {fmt.dec(trace.ip_average)} after {args.horizon} stages",
            file=summary,
        )
    else:
        print(
            f"no pure absorption (window {window}), "
            f"IP avg {fmt.dec(trace.ip_average)} after {args.horizon} stages",
            file=summary,
        )
    return EXIT_OK


def _fp_absorbed_payoff(game: Game, horizon: int, tie_rule) -> Optional[Fraction]:
    trace = simulate(game, FictitiousPlay(), horizon, tie_rule)
    absorbed = detect_absorption(trace, max(1, horizon // 2))
    return None if absorbed is None else game.payoffs[absorbed[0]][0]


def _synthesis_lines(game: Game, synth: SynthesisResult, fmt: _Fmt) -> list[str]:
    ip = game.actions[0]
    lines = [f"game: {game.title or '(untitled)'}", f"mode: {synth.mode}"]
    if synth.mode == N_PLAYER:
        lines.append(f"y0* = {ip[synth.chosen_y0]}")
    else:
        lines.append(f"j* = {game.actions[1][synth.target_profile[0]]}")
    lines += [
        f"target profile: ({','.join(game.actions[j + 1][a] for j, a in enumerate(synth.target_profile))})",
        f"z = {fmt.vec(synth.mix.probs)} over ({','.join(ip)})",
        f"value = {fmt.num(synth.value)}",
        f"pure baseline: {ip[synth.baseline_pure[0]]} -> {fmt.num(synth.baseline_pure[1])}",
    ]
    if synth.nash_fp_payoff is not None:
        lines.append(f"all-FP run settled at IP payoff {fmt.num(synth.nash_fp_payoff)}")
    lines.append("candidates:")
    for c in synth.per_candidate:
        name = ip[c.ip_action] if c.ip_action is not None else game.actions[1][c.target[0]]
        if c.value is None:
            lines.append(f"  {name}: infeasible")
        else:
            lines.append(f"  {name}: z = {fmt.vec(c.mix.probs)}, value {fmt.num(c.value)}")
    return lines


def _synthesis_payload(game: Game, synth: SynthesisResult) -> dict[str, Any]:
    return {
        "mode": synth.mode,
        "chosen_y0": game.actions[0][synth.chosen_y0],
        "target_profile": [game.actions[j + 1][a] for j, a in enumerate(synth.target_profile)],
        "mix": [_exact(p) for p in synth.mix.probs],
        "value": _exact(synth.value),
        "baseline_pure": [game.actions[0][synth.baseline_pure[0]], _exact(synth.baseline_pure[1])],
        "nash_fp_payoff": None if synth.nash_fp_payoff is None else _exact(synth.nash_fp_payoff),
        "lp": {
            "objective": [_exact(c) for c in synth.lp.objective],
            "rows": [[_exact(a) for a in row] for row in synth.lp.rows],
        },
        "candidates": [
            {
                "ip_action": None if c.ip_action is None else game.actions[0][c.ip_action],
                "target": list(c.target),
                "mix": None if c.mix is None else [_exact(p) for p in c.mix.probs],
                "value": None if c.value is None else _exact(c.value),
            }
            for c in synth.per_candidate
        ],
    }


def _synthesize(args, game: Game) -> SynthesisResult:
    _require_valid(game)
    synth = synthesize(game)
    fp = _fp_absorbed_payoff(game, args.horizon, _tie_rule(args, game))
    return dataclasses.replace(synth, nash_fp_payoff=fp)


def cmd_synthesize(args, game: Game) -> int:
    fmt = _Fmt(args.precision)
    synth = _synthesize(args, game)
    _emit(args, _synthesis_lines(game, synth, fmt), _synthesis_payload(game, synth))
    return EXIT_OK


def cmd_plan(args, game: Game) -> int:
    fmt = _Fmt(args.precision)
    synth = _synthesize(args, game)
    tie_rule = _tie_rule(args, game)
    plan = build_plan(synth, tie_rule, game)
    report = verify_plan(game, plan, args.reps, tie_rule, _parse_init(game, args.init))
    ip = game.actions[0]

    def seq(xs):
        return "(" + ", ".join(ip[a] for a in xs) + ")"

    lines = _synthesis_lines(game, synth, fmt) + [
        "plan:",
        f"  X' = {seq(plan.warmup)}",
        f"  X* = {seq(plan.block)}",
        f"  tau* = {plan.tau_star}, tau0 = {plan.tau_zero}, tau' = {plan.tau_prime}, eps = {plan.epsilon}",
    ]
    lines += [f"  reorder: {r}" for r in plan.reorders]
    lines += [
        f"verification over {args.reps} repetitions ({report.steps} stages):",
        f"  held = {str(report.held).lower()}",
        f"  absorbed at t = {report.absorption_time}",
        f"  block-boundary averages match closed form: {str(report.averages_match).lower()}",
        f"  final IP avg {fmt.num(report.final_average)}, limit {fmt.num(synth.value)}, "
        f"gap {fmt.dec(report.limit_gap)}",
    ]
    if report.first_deviation:
        t, j = report.first_deviation
        lines.append(f"  first deviation: opponent {game.names[j]} at t = {t}")
    if report.first_violation:
        v = report.first_violation
        lines.append(f"  monitor violation: row {v.row} at t = {v.time}, value {fmt.num(v.value)}")
    payload = _synthesis_payload(game, synth)
    payload["plan"] = {
        "warmup": [ip[a] for a in plan.warmup],
        "block": [ip[a] for a in plan.block],
        "tau_star": plan.tau_star,
        "tau_zero": plan.tau_zero,
        "tau_prime": plan.tau_prime,
        "epsilon": plan.epsilon,
        "reorders": list(plan.reorders),
    }
    payload["verification"] = {
        "held": report.held,
        "absorption_time": report.absorption_time,
        "first_deviation": report.first_deviation,
        "first_violation": None
        if report.first_violation is None
        else {
            "time": report.first_violation.time,
            "row": list(report.first_violation.row),
            "value": _exact(report.first_violation.value),
        },
        "averages_match": report.averages_match,
        "final_average": _exact(report.final_average),
        "limit_gap": _exact(report.limit_gap),
        "rate_constant": _exact(report.rate_constant),
        "steps": report.steps,
    }
    _emit(args, lines, payload)
    if not report.held or report.first_violation is not None:
        return EXIT_PLANNING
    return EXIT_OK


def _oracle_checks(game: Game) -> list[tuple[str, Any, Any]]:
    """Pairs of (check name, fast-path value, oracle value)."""
    checks = []
    fast = synthesize(game)
    slow = exhaustive_synthesis_oracle(game)
    for name in ("chosen_y0", "target_profile", "value", "mix", "baseline_pure"):
        checks.append((f"synthesis.{name}", getattr(fast, name), getattr(slow, name)))
    for k, c in enumerate(fast.per_candidate):
        best, _ = lp_vertex_oracle(c.lp)
        try:
            _, value = solve_lp(c.lp)
        except ValueError:
            value = None
        checks.append((f"lp[{k}].value", value, None if best is None else best.value))
    # pure beliefs plus the synthesized mixture for the IP
    sizes = game.shape()
    for player in range(game.player_count):
        for profile in game.profiles():
            others = [
                None if i == player else MixedStrategy.pure(i, sizes[i], a)
                for i, a in enumerate(profile)
            ]
            if player != 0:
                others[0] = fast.mix
            allowed = best_response_oracle(game, player, others)
            for rule in TieRule:
                got = best_response(game, player, others, rule, profile[player])
                checks.append(
                    (f"best_response[{player},{profile},{rule.value}]", got in allowed, True)
                )
    return checks


def cmd_verify(args, game: Game) -> int:
    _require_valid(game)
    checks = _oracle_checks(game)
    bad = [(n, a, b) for n, a, b in checks if a != b]
    lines = [f"game: {game.title or args.game}", f"checks: {len(checks)}, mismatches: {len(bad)}"]
    lines += [f"  MISMATCH {n}: fast={a!r} oracle={b!r}" for n, a, b in bad]
    lines.append("status: agree" if not bad else "status: DISAGREE")
    payload = {
        "checks": len(checks),
        "agree": not bad,
        "mismatches": [{"check": n, "fast": repr(a), "oracle": repr(b)} for n, a, b in bad],
    }
    _emit(args, lines, payload)
    return EXIT_OK if not bad else EXIT_ORACLE


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "synthesize": cmd_synthesize,
    "plan": cmd_plan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpsynth",
        description="Fictitious-play simulation and LP synthesis for an informed player.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("game", help="game file (YAML) or bundled name: table1, table2, table3")
        p.add_argument("--tie-rule", choices=[r.value for r in TieRule], default=None,
                       help="opponent tie rule (default: lowest for 2 players, inertia otherwise)")
        p.add_argument("--init", default=None, help="initial profile as comma-separated labels")
        p.add_argument("--horizon", type=int, default=1000, help="simulation stages (default 1000)")
        p.add_argument("--reps", type=int, default=50, help="block repetitions to verify (default 50)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--precision", type=int, default=6,
                       help="significant digits in decimal renderings (default 6)")
        if name == "simulate":
            p.add_argument("--policy", default="fp", help="fp | fixed:LABEL | script:W,.../R,...")
            p.add_argument("--window", type=int, default=None,
                           help="final constant run needed to call absorption (default horizon/2)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.horizon < 1 or args.reps < 1 or args.precision < 1:
            raise ConfigError("--horizon, --reps and --precision must be positive")
        game = load_game(args.game)
        return COMMANDS[args.command](args, game)
    except GameFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, OracleSizeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidGameError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PlanningError, NonConvergenceError) as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        if getattr(exc, "violation", None) is not None:
            print(f"  first violation: {exc.violation}", file=sys.stderr)
        return EXIT_PLANNING


if __name__ == "__main__":
    sys.exit(main())
