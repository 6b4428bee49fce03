import itertools
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from fpsynth.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, simplex


def test_textbook_max():
    # max 3x + 5y; x <= 4, 2y <= 12, 3x + 2y <= 18
    sol = simplex([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert sol.status == OPTIMAL
    assert sol.x == (2, 6) and sol.value == 36


def test_beale_cycling_example_terminates():
    # cycles under the textbook largest-coefficient rule
    c = [F(3, 4), -20, F(1, 2), -6]
    A = [[F(1, 4), -8, -1, 9], [F(1, 2), -12, F(-1, 2), 3], [0, 0, 1, 0]]
    sol = simplex(c, A, [0, 0, 1])
    assert sol.status == OPTIMAL
    assert sol.value == F(5, 4)
    assert sol.x == (1, 0, 1, 0)


def test_infeasible():
    sol = simplex([1, 1], [[1, 1]], [1], [[1, 1]], [3])
    assert sol.status == INFEASIBLE


def test_unbounded():
    assert simplex([1, 0], [[-1, 1]], [0]).status == UNBOUNDED


def test_negative_rhs_row():
    # x + y >= 2 written as -x - y <= -2; minimize x + 2y
    sol = simplex([-1, -2], [[-1, -1]], [-2])
    assert sol.status == OPTIMAL and sol.value == -2 and sol.x == (2, 0)


def test_redundant_equalities():
    sol = simplex([1, 2, 3], [], [], [[1, 1, 1], [2, 2, 2]], [1, 2])
    assert sol.status == OPTIMAL and sol.value == 3


def test_warm_start_skips_phase_one():
    rows = [[-1, 2, -1], [1, 3, -2], [-1, -7, -2], [1, -6, -1]]
    cold = simplex([6, 7, 5], rows, [0] * 4, [[1, 1, 1]], [1])
    warm = simplex([6, 7, 5], rows, [0] * 4, [[1, 1, 1]], [1], start=[2])
    assert cold.value == warm.value == F(52, 9)
    assert warm.pivots <= cold.pivots


def _brute_force(c, A, b):
    """Max over all basic solutions of {A x <= b, x >= 0} in two variables."""
    lines = [(row, rhs) for row, rhs in zip(A, b)] + [([1, 0], 0), ([0, 1], 0)]
    best = None
    for (r1, b1), (r2, b2) in itertools.combinations(lines, 2):
        det = r1[0] * r2[1] - r1[1] * r2[0]
        if det == 0:
            continue
        x = (F(b1 * r2[1] - b2 * r1[1], det), F(r1[0] * b2 - r2[0] * b1, det))
        if min(x) < 0 or any(r[0] * x[0] + r[1] * x[1] > rhs for r, rhs in zip(A, b)):
            continue
        v = c[0] * x[0] + c[1] * x[1]
        best = v if best is None else max(best, v)
    return best


small = st.integers(-5, 5)


@settings(max_examples=150, deadline=None)
@given(
    st.tuples(small, small),
    st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10)), min_size=1, max_size=4),
)
def test_bounded_two_variable_lps_match_brute_force(c, rows):
    # positive coefficients with a non-negative RHS keep the region bounded and non-empty
    A = [[a, b] for a, b, _ in rows]
    b = [r for _, _, r in rows]
    sol = simplex(c, A, b)
    assert sol.status == OPTIMAL
    assert sol.value == _brute_force(c, A, b)
    assert all(sum(a * x for a, x in zip(row, sol.x)) <= r for row, r in zip(A, b))
