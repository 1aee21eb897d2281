"""Exact optimum for small instances; the ground truth behind approximation tests.

All arithmetic is over Fractions.  The workhorse is a dense rational simplex
with Bland's rule (the inequality LP has an all-slack feasible start, so no
second phase is needed).  A brute-force vertex enumeration over active sets is
kept alongside it and cross-checked in the tests at very small sizes, and an
equality-form support enumeration serves the reduction checks.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .instance import ProblemInstance, check_valid

ORACLE_EDGE_LIMIT = 12


class OracleSizeError(ValueError):
    """Instance exceeds the size this oracle is meant for."""


def _lp_rows(instance: ProblemInstance) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Inequality rows (source, sink, capacity) of the instance LP."""
    ne = len(instance.edges)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(instance.n):
        row = [Fraction(0)] * ne
        for e in instance.edges_of_source(i):
            row[e] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(instance.supply[i]))
    for j in range(instance.m):
        row = [Fraction(0)] * ne
        for e in instance.edges_of_sink(j):
            row[e] = Fraction(instance.edges[e].price)
        rows.append(row)
        rhs.append(Fraction(instance.budget[j]))
    for e, spec in enumerate(instance.edges):
        if spec.capacity is not None:
            row = [Fraction(0)] * ne
            row[e] = Fraction(1)
            rows.append(row)
            rhs.append(Fraction(spec.capacity))
    return rows, rhs


def simplex_max(
    rows: list[list[Fraction]], rhs: list[Fraction], costs: list[Fraction]
) -> tuple[Fraction, list[Fraction]]:
    """Maximize costs.x over rows.x <= rhs, x >= 0 (rhs >= 0), exactly.

    Dense tableau, Bland's anticycling rule.  Raises on unbounded problems,
    which well-formed transportation instances never produce.
    """
    nrows, ncols = len(rows), len(costs)
    width = ncols + nrows + 1
    tableau = []
    for r in range(nrows):
        row = list(rows[r]) + [Fraction(0)] * nrows + [rhs[r]]
        row[ncols + r] = Fraction(1)
        tableau.append(row)
    cost_row = [-c for c in costs] + [Fraction(0)] * (nrows + 1)
    basis = [ncols + r for r in range(nrows)]

    while True:
        enter = next((j for j in range(width - 1) if cost_row[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for r in range(nrows):
            coef = tableau[r][enter]
            if coef > 0:
                ratio = tableau[r][width - 1] / coef
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave is None:
            raise ArithmeticError("LP is unbounded")
        pivot = tableau[leave][enter]
        tableau[leave] = [v / pivot for v in tableau[leave]]
        for r in range(nrows):
            if r != leave and tableau[r][enter] != 0:
                f = tableau[r][enter]
                tableau[r] = [a - f * b for a, b in zip(tableau[r], tableau[leave])]
        if cost_row[enter] != 0:
            f = cost_row[enter]
            cost_row = [a - f * b for a, b in zip(cost_row, tableau[leave])]
        basis[leave] = enter

    x = [Fraction(0)] * ncols
    for r, var in enumerate(basis):
        if var < ncols:
            x[var] = tableau[r][width - 1]
    value = sum((c * v for c, v in zip(costs, x)), start=Fraction(0))
    return value, x


def exact_opt(instance: ProblemInstance) -> tuple[Fraction, list[Fraction]]:
    """Exact optimum value and an optimal flow for a small instance.

    Guarded at 12 edges; beyond that this oracle is not meant to run.
    """
    check_valid(instance)
    if len(instance.edges) > ORACLE_EDGE_LIMIT:
        raise OracleSizeError("instance too large for oracle")
    rows, rhs = _lp_rows(instance)
    costs = [Fraction(spec.profit) for spec in instance.edges]
    value, x = simplex_max(rows, rhs, costs)
    assert all(v >= 0 for v in x)
    for row, cap in zip(rows, rhs):
        assert sum((a * v for a, v in zip(row, x)), start=Fraction(0)) <= cap
    return value, x


def exact_opt_enumerated(instance: ProblemInstance) -> Fraction:
    """Optimum by enumerating active constraint sets; tiny instances only.

    Every vertex of {x >= 0 : Ax <= b} makes |E| chosen constraints (rows or
    nonnegativity bounds) tight with a unique solution; the best feasible one
    is the optimum.  Cost grows as C(#rows+|E|, |E|), so this is the
    cross-check for the simplex, not a production path.
    """
    check_valid(instance)
    ne = len(instance.edges)
    rows, rhs = _lp_rows(instance)
    for e in range(ne):  # nonnegativity as explicit rows -x_e <= 0
        row = [Fraction(0)] * ne
        row[e] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    total = len(rows)
    if total > 24 or ne > 6:
        raise OracleSizeError("instance too large for active-set enumeration")
    costs = [Fraction(spec.profit) for spec in instance.edges]
    best: Fraction | None = None
    for active in combinations(range(total), ne):
        system = [rows[r] for r in active]
        target = [rhs[r] for r in active]
        x = _solve_square(system, target)
        if x is None:
            continue
        if any(v < 0 for v in x):
            continue
        if any(
            sum((a * v for a, v in zip(row, x)), start=Fraction(0)) > cap
            for row, cap in zip(rows, rhs)
        ):
            continue
        value = sum((c * v for c, v in zip(costs, x)), start=Fraction(0))
        if best is None or value > best:
            best = value
    assert best is not None, "origin is always feasible"
    return best


def _solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve a square rational system; None if singular."""
    size = len(rows)
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        head = aug[col][col]
        aug[col] = [v / head for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][size] for r in range(size)]


def solve_equality_lp(
    rows: list[list[Fraction]],
    rhs: list[Fraction],
    costs: list[Fraction],
    maximize: bool = True,
) -> tuple[Fraction, list[Fraction]]:
    """Optimize costs.x over {x >= 0 : Ax = b} by support enumeration.

    Considers every column support up to full size, solves the induced system
    exactly and keeps the best nonnegative solution.  Exponential in the
    column count; used only on the tiny equality-constrained instances the
    reductions produce.
    """
    ncols = len(costs)
    if ncols > 14:
        raise OracleSizeError("too many columns for support enumeration")
    best_val: Fraction | None = None
    best_x: list[Fraction] | None = None
    for k in range(ncols + 1):
        for support in combinations(range(ncols), k):
            x = _solve_consistent(rows, rhs, support, ncols)
            if x is None or any(v < 0 for v in x):
                continue
            value = sum((c * v for c, v in zip(costs, x)), start=Fraction(0))
            if (
                best_val is None
                or (maximize and value > best_val)
                or (not maximize and value < best_val)
            ):
                best_val, best_x = value, x
    if best_val is None:
        raise ArithmeticError("equality system has no nonnegative solution")
    return best_val, best_x


def _solve_consistent(
    rows: list[list[Fraction]], rhs: list[Fraction], support: tuple[int, ...], ncols: int
) -> list[Fraction] | None:
    """Solve Ax=b with x zero outside `support`; None if inconsistent/ambiguous."""
    k = len(support)
    aug = [[row[c] for c in support] + [v] for row, v in zip(rows, rhs)]
    rank = 0
    for col in range(k):
        pivot = next((r for r in range(rank, len(aug)) if aug[r][col] != 0), None)
        if pivot is None:
            return None  # free column: not a basic solution for this support
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        head = aug[rank][col]
        aug[rank] = [v / head for v in aug[rank]]
        for r in range(len(aug)):
            if r != rank and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[rank])]
        rank += 1
    for r in range(rank, len(aug)):
        if aug[r][k] != 0:
            return None  # inconsistent
    x = [Fraction(0)] * ncols
    for idx, col in enumerate(support):
        x[col] = aug[idx][k]
    return x


def approx_factor(instance: ProblemInstance, primal_value) -> Fraction | None:
    """solver value / exact optimum; None when the optimum is zero (vacuous)."""
    opt, _ = exact_opt(instance)
    if opt == 0:
        return None
    return Fraction(primal_value) / opt
