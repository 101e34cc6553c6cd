"""Exact maximum fractional cycle packing under per-edge capacities.

Given a demand tuple, find nonnegative cycle amounts x_c maximizing the total
sum(x_c) subject to: for every edge, the amounts of all cycles through it stay
within the edge's demand. The sub-channel count of an allocation equals total
demand minus total cycle amount, so a maximum packing is exactly a
minimum-sub-channel allocation.

Solved with a dense tableau simplex over exact rationals. The slack basis is
feasible from the start (capacities are nonnegative), and Bland's rule makes
the run deterministic and cycle-free. Problem sizes are tiny: at most
K(K-1) rows and one column per cycle whose edges all have positive demand.
"""

from __future__ import annotations

from fractions import Fraction

from .cycles import Cycle, all_edges, enumerate_cycles
from .dof import DofTuple

ZERO = Fraction(0)
ONE = Fraction(1)


def _simplex_max_ones(columns: list[list[int]], capacities: list[Fraction]
                      ) -> tuple[Fraction, list[Fraction]]:
    """Maximize sum(x) subject to (incidence) x <= capacities, x >= 0.

    ``columns[j]`` lists the row indices with a unit entry in column j.
    Returns the optimum and one optimal vertex solution.
    """
    m = len(capacities)
    n = len(columns)
    width = n + m + 1
    rhs = width - 1

    tableau = []
    for i in range(m):
        row = [ZERO] * width
        row[n + i] = ONE
        row[rhs] = capacities[i]
        tableau.append(row)
    for j, rows in enumerate(columns):
        for i in rows:
            tableau[i][j] = ONE

    cost = [-ONE] * n + [ZERO] * (m + 1)
    basis = list(range(n, n + m))

    while True:
        entering = next((j for j in range(n + m) if cost[j] < 0), None)
        if entering is None:
            break
        leaving, best = None, None
        for i in range(m):
            coef = tableau[i][entering]
            if coef > 0:
                ratio = tableau[i][rhs] / coef
                if best is None or ratio < best or \
                        (ratio == best and basis[i] < basis[leaving]):
                    leaving, best = i, ratio
        if leaving is None:
            raise ArithmeticError("packing problem cannot be unbounded")

        pivot_row = tableau[leaving]
        pivot = pivot_row[entering]
        tableau[leaving] = [v / pivot for v in pivot_row]
        pivot_row = tableau[leaving]
        for i in range(m):
            if i != leaving and tableau[i][entering] != 0:
                coef = tableau[i][entering]
                tableau[i] = [a - coef * b for a, b in zip(tableau[i], pivot_row)]
        coef = cost[entering]
        if coef != 0:
            cost = [a - coef * b for a, b in zip(cost, pivot_row)]
        basis[leaving] = entering

    solution = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            solution[var] = tableau[i][rhs]
    return cost[rhs], solution


def max_cycle_packing(d: DofTuple) -> tuple[Fraction, dict[Cycle, Fraction]]:
    """Optimal cycle amounts for a demand tuple, exact rationals throughout.

    Cycles with a zero-demand edge can never carry anything and are pruned
    before the solve; they are reported with amount zero.
    """
    rows: dict = {}
    capacities: list[Fraction] = []
    for e in all_edges(d.K):
        if d.get(e) > 0:
            rows[e] = len(capacities)
            capacities.append(d.get(e))

    candidates: list[Cycle] = []
    columns: list[list[int]] = []
    for length in range(2, d.K + 1):
        for cycle in enumerate_cycles(d.K, length):
            edges = cycle.edges()
            if all(e in rows for e in edges):
                candidates.append(cycle)
                columns.append([rows[e] for e in edges])

    amounts: dict[Cycle, Fraction] = {}
    for length in range(2, d.K + 1):
        for cycle in enumerate_cycles(d.K, length):
            amounts[cycle] = ZERO
    if not candidates:
        return ZERO, amounts

    total, solution = _simplex_max_ones(columns, capacities)
    for cycle, amount in zip(candidates, solution):
        amounts[cycle] = amount
    return total, amounts
