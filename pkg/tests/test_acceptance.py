"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines print even
without ``-s``.
"""
import functools
from fractions import Fraction as F

import pytest

from fpsynth.cli import main as cli_main
from fpsynth.fictitious import FictitiousPlay, FixedAction, detect_absorption, simulate
from fpsynth.game import extract_subgame, unique_nash
from fpsynth.gamefile import bundled_path
from fpsynth.oracle import lp_vertex_oracle
from fpsynth.synthesis import build_lp, build_two_player_lp, solve_lp, synthesize
from fpsynth.trajectory import (
    build_plan,
    custom_plan,
    monitor_constraints,
    verify_plan,
)

from conftest import random_games, table


@pytest.fixture
def report(capsys):
    """Collect named checks, print one verdict line, then assert."""

    class Report:
        def __init__(self):
            self.failed = []

        def check(self, label, ok, detail=""):
            if not ok:
                self.failed.append(f"{label}{': ' + detail if detail else ''}")

        def finish(self, number, title):
            verdict = "PASS" if not self.failed else "FAIL"
            line = f"[{verdict}] criterion {number}: {title}"
            if self.failed:
                line += " -- " + "; ".join(self.failed)
            with capsys.disabled():
                print("\n" + line)
            assert not self.failed, line

    return Report()


@functools.lru_cache(maxsize=None)
def synth(name):
    return synthesize(table(name))


def _converges_to(trace, value):
    """Absorbed from ``first`` on, the gap times T is bounded by the transient."""
    profile, first = detect_absorption(trace, len(trace) // 2)
    transient = sum(abs(s.payoffs[0] - value) for s in trace.steps[: first - 1])
    return abs(trace.ip_average - value) * len(trace) <= transient


def test_criterion_1_table1(report):
    g = table("table1")
    fp = simulate(g, FictitiousPlay(), 1000)
    absorbed = detect_absorption(fp, 500)
    report.check("all-FP absorbs at (U,L)", absorbed and absorbed[0] == (0, 0), str(absorbed))
    report.check("all-FP average is 6", fp.ip_average == 6, str(fp.ip_average))
    fixed = simulate(g, FixedAction(1), 1000)
    absorbed = detect_absorption(fixed, 500)
    report.check("fixed-D absorbs at (D,R)", absorbed and absorbed[0] == (1, 2), str(absorbed))
    report.check("fixed-D payoff 7 at absorption", g.payoffs[absorbed[0]][0] == 7)
    report.check("fixed-D average tends to 7", _converges_to(fixed, 7))
    r = synth("table1")
    report.check("z = (1/6, 5/6)", r.mix.probs == (F(1, 6), F(5, 6)), str(r.mix.probs))
    report.check("value 85/6", r.value == F(85, 6), str(r.value))
    _, vertices = lp_vertex_oracle(build_two_player_lp(g, 1))
    interval = sorted(v.q.probs[0] for v in vertices)
    report.check("prob(U) interval [1/6, 7/10]", interval == [F(1, 6), F(7, 10)], str(interval))
    report.finish(1, "Table 1 reproduction")


def test_criterion_2_table2(report):
    g = table("table2")
    fp = simulate(g, FictitiousPlay(), 2000)
    absorbed = detect_absorption(fp, 1000)
    report.check("all-FP absorbs at (B,D,L)", absorbed and absorbed[0] == (1, 2, 0), str(absorbed))
    report.check("absorbed IP payoff 3", absorbed and g.payoffs[absorbed[0]][0] == 3)
    report.check("all-FP average tends to 3", _converges_to(fp, 3))
    lp = build_lp(extract_subgame(g, 2), (0, 2))
    report.check("objective (6,7,5)", lp.objective == (6, 7, 5), str(lp.objective))
    rows = ((-1, 2, -1), (1, 3, -2), (-1, -7, -2), (1, -6, -1))
    report.check("four constraint rows", lp.rows == rows, str(lp.rows))
    mix, value = solve_lp(lp)
    report.check("q = (1/9, 3/9, 5/9)", mix.probs == (F(1, 9), F(3, 9), F(5, 9)), str(mix.probs))
    report.check("value 52/9", value == F(52, 9), str(value))
    plan = build_plan(synth("table2"))
    taus = (plan.tau_star, plan.tau_zero, plan.tau_prime)
    report.check("tau*, tau0, tau' = 9, 4, 9", taus == (9, 4, 9), str(taus))
    v = verify_plan(g, plan, 50)
    report.check("verify_plan holds", v.held)
    T = v.steps
    report.check("gap <= tau'*9/T", v.limit_gap <= F(plan.tau_prime * 9, T), f"{float(v.limit_gap):.5f} at T={T}")
    report.finish(2, "Table 2 reproduction")


def test_criterion_3_table3(report):
    g = table("table3")
    r = synth("table3")
    report.check("y0* = A", r.chosen_y0 == 0)
    report.check("z0* = (0, 1/7, 6/7)", r.mix.probs == (0, F(1, 7), F(6, 7)), str(r.mix.probs))
    report.check("value 60/7", r.value == F(60, 7), str(r.value))
    plan = build_plan(r)
    report.check("tau* = 7", plan.tau_star == 7, str(plan.tau_star))
    report.check("tau0 = 4", plan.tau_zero == 4, f"measured {plan.tau_zero}")
    report.check("tau' = 7", plan.tau_prime == 7, str(plan.tau_prime))
    report.check("X' = A x 7", plan.warmup == (0,) * 7, str(plan.warmup))
    report.check("X* = (B, C x 6)", plan.block == (1,) + (2,) * 6, str(plan.block))
    v = verify_plan(g, plan, 50)
    report.check("verify_plan holds", v.held)
    report.check("block-boundary averages match the closed form", v.averages_match)
    report.check("average tends to 60/7", v.limit_gap * v.steps <= v.rate_constant, str(v.limit_gap))
    report.finish(3, "Table 3 reproduction")


def test_criterion_4_table3_all_fp(report):
    g = table("table3")
    horizon = 100_000
    trace = simulate(g, FictitiousPlay(), horizon, initial_actions=g.profile_from_labels(["C", "D", "L"]))
    absorbed = detect_absorption(trace, horizon // 2)
    report.check("no pure absorption", absorbed is None, str(absorbed))
    avg = float(trace.ip_average)
    report.check("IP average in 3.89 +- 0.10", abs(avg - 3.89) <= 0.10, f"{avg:.4f}")
    # reported limiting marginals, two decimals
    reported = [(0.45, 0, 0.55), (0.35, 0, 0.65), (0, 0.2, 0.8)]
    for player, probs in enumerate(reported):
        got = [float(p) for p in trace.final_state.marginal(player).probs]
        close = all(abs(a - b) <= 0.01 for a, b in zip(got, probs))
        report.check(f"player {player} marginal near {probs}", close, str([round(x, 3) for x in got]))
    report.finish(4, f"Table 3 all-FP soft check (avg {avg:.4f})")


def test_criterion_5_fixed_action_absorbs(report):
    games = [table("table2"), table("table3")] + list(random_games())
    subgames = 0
    for g in games:
        for y0 in range(g.shape()[0]):
            sub = extract_subgame(g, y0)
            nash = unique_nash(sub)
            space = list(sub.profiles())
            cap = 10 * len(space)
            for opp in space:
                trace = simulate(g, FixedAction(y0), cap, None, (y0, *opp))
                profiles = [p[1:] for p in trace.profiles()]
                first = next((t for t, p in enumerate(profiles) if p == nash), None)
                ok = first is not None and all(p == nash for p in profiles[first:])
                report.check(f"{g.title or 'game'} subgame {sub.label} from {opp}", ok)
            subgames += 1
    report.finish(5, f"FixedAction absorption on {subgames} subgames, every initial profile")


def test_criterion_6_lp_oracle_equivalence(report):
    games = [table(n) for n in ("table1", "table2", "table3")] + list(random_games())
    count = 0
    for g in games:
        for c in synthesize(g).per_candidate:
            best, _ = lp_vertex_oracle(c.lp)
            oracle = None if best is None else best.value
            report.check(f"{g.title} LP {count}", oracle == c.value, f"{c.value} vs {oracle}")
            count += 1
    report.finish(6, f"simplex equals vertex enumeration on {count} LPs")


def test_criterion_7_trajectory_invariants(report):
    for name in ("table2", "table3"):
        plan = build_plan(synth(name))
        m = monitor_constraints(plan, 50)
        report.check(f"{name} monitor over p = 1..50", m.ok, str(m.first_violation))
    r = synth("table2")
    adversarial = custom_plan(r, (2, 2, 2), (0, 1, 1, 1, 2, 2, 2, 2, 2))
    m = monitor_constraints(adversarial, 1)
    report.check("A-first order reports a violation", not m.ok)
    v = verify_plan(table("table2"), adversarial, 50)
    report.check("A-first order falls short of 52/9", v.final_average < r.value, str(float(v.final_average)))
    report.finish(7, "trajectory invariants and adversarial ordering")


def test_criterion_8_ordering_chain(report):
    strict = {
        "table1": (F(85, 6), 7, 6),
        "table2": (F(52, 9), 5, 3),
        "table3": (F(60, 7), 5, None),
    }
    for name, expected in strict.items():
        g = table(name)
        r = synth(name)
        trace = simulate(g, FictitiousPlay(), 2000, initial_actions=(2, 2, 0) if name == "table3" else None)
        absorbed = detect_absorption(trace, 1000)
        fp_payoff = None if absorbed is None else g.payoffs[absorbed[0]][0]
        got = (r.value, r.baseline_pure[1], fp_payoff)
        report.check(f"{name} chain", got == expected, str(got))
        report.check(f"{name} strict", got[0] > got[1] and (got[2] is None or got[1] > got[2]))
    for g in random_games():
        r = synthesize(g)
        absorbed = detect_absorption(simulate(g, FictitiousPlay(), 400), 200)
        ok = r.value >= r.baseline_pure[1]
        if absorbed:
            ok = ok and r.baseline_pure[1] >= g.payoffs[absorbed[0]][0]
        report.check(f"{g.title} chain", ok)
    report.finish(8, "LP value >= pure baseline >= all-FP payoff")


def test_cli_runs_against_bundled_tables(report, capsys):
    for name in ("table1", "table2", "table3"):
        for cmd in ("validate", "synthesize", "plan", "verify"):
            code = cli_main([cmd, str(bundled_path(name))])
            report.check(f"{cmd} {name}", code == 0, f"exit {code}")
    capsys.readouterr()
    report.finish("cli", "bundled tables through every subcommand")
