"""Dense exact-rational simplex with Bland's anti-cycling rule.

Solves::

    maximize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

All arithmetic is on :class:`fractions.Fraction`; sizes here are a handful
of variables, so a full tableau is fine.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPSolution:
    status: str
    x: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None
    pivots: int = 0


class _Tableau:
    # rows[i] = coefficients over all columns followed by the RHS
    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        p = row[c]
        if p != 1:
            row = [v / p for v in row]
            self.rows[r] = row
        for i, other in enumerate(self.rows):
            if i != r and other[c]:
                f = other[c]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = c
        self.pivots += 1

    def run(self, cost: Sequence[Fraction], allowed: Sequence[bool]) -> str:
        """Maximize ``cost @ x`` over columns flagged in ``allowed``."""
        ncols = len(cost)
        while True:
            # reduced cost of column j is cost_j - sum_i cost_basis(i) * a_ij
            entering = None
            for j in range(ncols):
                if not allowed[j] or j in self.basis:
                    continue
                red = cost[j] - sum(
                    (cost[b] * row[j] for b, row in zip(self.basis, self.rows) if row[j]),
                    Fraction(0),
                )
                if red > 0:
                    entering = j
                    break
            if entering is None:
                return OPTIMAL
            leave, best = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leave])
                    ):
                        leave, best = i, ratio
            if leave is None:
                return UNBOUNDED
            self.pivot(leave, entering)


def simplex(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    start: Sequence[int] = (),
) -> LPSolution:
    """Two-phase simplex.

    ``start`` lists structural columns to pivot into the equality rows (in
    order) before phase 1; when that already yields a feasible basis free of
    artificials, phase 1 is skipped.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    A_ub = [[Fraction(v) for v in row] for row in A_ub]
    A_eq = [[Fraction(v) for v in row] for row in A_eq]
    b_ub = [Fraction(v) for v in b_ub]
    b_eq = [Fraction(v) for v in b_eq]
    m_ub, m_eq = len(A_ub), len(A_eq)
    if any(len(row) != n for row in A_ub + A_eq):
        raise ValueError("constraint rows must match the objective length")

    # columns: structural [0, n), slacks [n, n + m_ub), artificials after
    n_art = m_eq + sum(1 for b in b_ub if b < 0)
    width = n + m_ub + n_art
    rows, basis = [], []
    art = n + m_ub
    for i, (row, b) in enumerate(zip(A_ub, b_ub)):
        line = row + [Fraction(0)] * (m_ub + n_art) + [b]
        line[n + i] = Fraction(1)
        if b < 0:
            line = [-v for v in line]
            line[art] = Fraction(1)
            basis.append(art)
            art += 1
        else:
            basis.append(n + i)
        rows.append(line)
    for row, b in zip(A_eq, b_eq):
        line = row + [Fraction(0)] * (m_ub + n_art) + [b]
        if b < 0:
            line = [-v for v in line]
        line[art] = Fraction(1)
        basis.append(art)
        art += 1
        rows.append(line)

    tab = _Tableau(rows, basis)
    is_art = [j >= n + m_ub for j in range(width)]

    for k, col in enumerate(start):
        r = m_ub + k
        if r < len(rows) and rows[r][col] != 0:
            tab.pivot(r, col)

    warm = all(not is_art[b] for b in tab.basis) and all(r[-1] >= 0 for r in tab.rows)
    if not warm:
        if any(r[-1] < 0 for r in tab.rows):
            # start pivots broke primal feasibility; rebuild from scratch
            return simplex(c, A_ub, b_ub, A_eq, b_eq)
        phase1 = [Fraction(-1) if is_art[j] else Fraction(0) for j in range(width)]
        tab.run(phase1, [True] * width)
        if any(is_art[b] and tab.rows[i][-1] != 0 for i, b in enumerate(tab.basis)):
            return LPSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tab.rows):
            if is_art[tab.basis[i]]:
                col = next(
                    (j for j in range(n + m_ub) if tab.rows[i][j] != 0), None
                )
                if col is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1

    cost = c + [Fraction(0)] * (width - n)
    status = tab.run(cost, [not a for a in is_art])
    if status != OPTIMAL:
        return LPSolution(status, pivots=tab.pivots)
    x = [Fraction(0)] * width
    for b, row in zip(tab.basis, tab.rows):
        x[b] = row[-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPSolution(OPTIMAL, tuple(x[:n]), value, tab.pivots)
