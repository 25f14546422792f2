"""Exact phase-one simplex over the rationals.

Solves the feasibility problem ``A x = b, x >= 0`` with `fractions.Fraction`
arithmetic, so infeasibility verdicts are certificates rather than numerical
artifacts.  Bland's rule keeps the pivoting finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    x: Optional[tuple]
    deficit: Fraction
    """Phase-one optimum: zero iff the system is feasible."""


def find_feasible_point(rows: Sequence[Sequence], rhs: Sequence) -> FeasibilityResult:
    """Find ``x >= 0`` with ``rows @ x == rhs`` or report the deficit."""
    m = len(rows)
    if m == 0:
        return FeasibilityResult(True, (), Fraction(0))
    n = len(rows[0])
    tab = []
    b = []
    for i in range(m):
        row = [Fraction(v) for v in rows[i]]
        if len(row) != n:
            raise ValueError("ragged constraint matrix")
        bi = Fraction(rhs[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        tab.append(row)
        b.append(bi)

    # Append artificial columns; basis starts as the artificials.
    for i in range(m):
        tab[i] = tab[i] + [Fraction(1) if j == i else Fraction(0) for j in range(m)]
    width = n + m
    basis = [n + i for i in range(m)]

    # Reduced costs for minimizing the sum of artificials.
    obj = [Fraction(0)] * width
    value = Fraction(0)
    for i in range(m):
        for j in range(width):
            obj[j] -= tab[i][j]
        value += b[i]
    for i in range(m):
        obj[n + i] += Fraction(1)  # cost of each artificial is one

    def pivot(row: int, col: int) -> None:
        nonlocal value
        piv = tab[row][col]
        tab[row] = [v / piv for v in tab[row]]
        b[row] /= piv
        for i in range(m):
            if i != row and tab[i][col] != 0:
                factor = tab[i][col]
                tab[i] = [v - factor * w for v, w in zip(tab[i], tab[row])]
                b[i] -= factor * b[row]
        if obj[col] != 0:
            factor = obj[col]
            for j in range(width):
                obj[j] -= factor * tab[row][j]
            value += factor * b[row]
        basis[row] = col

    while True:
        entering = next((j for j in range(width) if obj[j] < 0), None)
        if entering is None:
            break
        best_ratio = None
        leaving = None
        for i in range(m):
            coeff = tab[i][entering]
            if coeff > 0:
                ratio = b[i] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving is None:
            # Phase one is bounded below by zero, so this cannot happen.
            raise RuntimeError("phase-one ratio test failed")
        pivot(leaving, entering)

    if value > 0:
        return FeasibilityResult(False, None, value)

    # Drive leftover artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is not None:
                pivot(i, col)

    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = b[i]
    return FeasibilityResult(True, tuple(x), Fraction(0))
