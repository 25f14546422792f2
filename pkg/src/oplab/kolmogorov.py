"""Feasibility of a single classical probability model for declared statistics.

Given finite outcome lists per observable and a set of linear statistical
constraints (marginals, joint cells, Bayes conditionals, correlations), decide
whether one joint probability distribution over the product outcome space
reproduces them all.  Nonexistence is established by an exact phase-one
simplex and reported together with a minimal infeasible constraint subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple

from .errors import CapacityError
from .simplex import find_feasible_point

DEFAULT_CELL_BOUND = 10_000


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


@dataclass(frozen=True)
class MarginalConstraint:
    """P(observable = value) = prob."""

    observable: str
    value: object
    prob: object


@dataclass(frozen=True)
class JointConstraint:
    """P(all named observables take their listed values) = prob."""

    events: Tuple[Tuple[str, object], ...]
    prob: object

    @classmethod
    def of(cls, events: Mapping, prob) -> "JointConstraint":
        return cls(tuple(sorted(events.items())), prob)


@dataclass(frozen=True)
class ConditionalConstraint:
    """P(event | given) = prob, encoded linearly as P(e & g) - prob * P(g) = 0."""

    event: Tuple[Tuple[str, object], ...]
    given: Tuple[Tuple[str, object], ...]
    prob: object

    @classmethod
    def of(cls, event: Mapping, given: Mapping, prob) -> "ConditionalConstraint":
        return cls(tuple(sorted(event.items())), tuple(sorted(given.items())), prob)


@dataclass(frozen=True)
class CorrelationConstraint:
    """E[product of the two observables] = value (outcomes must be numeric)."""

    observables: Tuple[str, str]
    value: object


@dataclass(frozen=True)
class ExpectationConstraint:
    """E[observable] = value."""

    observable: str
    value: object


Constraint = object  # any of the dataclasses above


@dataclass(frozen=True)
class KolmogorovResult:
    feasible: bool
    joint: Optional[dict]
    """Map from outcome tuples to exact probabilities when feasible."""
    certificate: Optional[tuple]
    """Minimal infeasible constraint subset when infeasible."""
    deficit: Fraction
    observables: tuple


def _cells(outcome_spaces: Mapping[str, Sequence], bound: int):
    names = tuple(outcome_spaces.keys())
    spaces = [tuple(_frac(v) for v in outcome_spaces[name]) for name in names]
    size = 1
    for space in spaces:
        if not space:
            raise ValueError("empty outcome list")
        size *= len(space)
        if size > bound:
            raise CapacityError(f"product outcome space exceeds {bound} cells")
    cells = [()]
    for space in spaces:
        cells = [prev + (v,) for prev in cells for v in space]
    return names, cells


def _matches(cell, names, events) -> bool:
    index = {name: k for k, name in enumerate(names)}
    return all(cell[index[name]] == _frac(value) for name, value in events)


def _constraint_row(constraint, names, cells):
    """Coefficient vector and right-hand side of one linear constraint."""
    index = {name: k for k, name in enumerate(names)}
    row = [Fraction(0)] * len(cells)
    if isinstance(constraint, MarginalConstraint):
        value = _frac(constraint.value)
        k = index[constraint.observable]
        for c, cell in enumerate(cells):
            if cell[k] == value:
                row[c] = Fraction(1)
        return row, _frac(constraint.prob)
    if isinstance(constraint, JointConstraint):
        for c, cell in enumerate(cells):
            if _matches(cell, names, constraint.events):
                row[c] = Fraction(1)
        return row, _frac(constraint.prob)
    if isinstance(constraint, ConditionalConstraint):
        prob = _frac(constraint.prob)
        for c, cell in enumerate(cells):
            if _matches(cell, names, constraint.given):
                row[c] -= prob
                if _matches(cell, names, constraint.event):
                    row[c] += Fraction(1)
        return row, Fraction(0)
    if isinstance(constraint, CorrelationConstraint):
        i = index[constraint.observables[0]]
        j = index[constraint.observables[1]]
        for c, cell in enumerate(cells):
            row[c] = cell[i] * cell[j]
        return row, _frac(constraint.value)
    if isinstance(constraint, ExpectationConstraint):
        k = index[constraint.observable]
        for c, cell in enumerate(cells):
            row[c] = cell[k]
        return row, _frac(constraint.value)
    raise TypeError(f"unknown constraint type {type(constraint).__name__}")


def _solve(names, cells, constraints):
    rows = [[Fraction(1)] * len(cells)]
    rhs = [Fraction(1)]
    for constraint in constraints:
        row, target = _constraint_row(constraint, names, cells)
        rows.append(row)
        rhs.append(target)
    return find_feasible_point(rows, rhs)


def kolmogorov_check(
    outcome_spaces: Mapping[str, Sequence],
    constraints: Sequence[Constraint],
    cell_bound: int = DEFAULT_CELL_BOUND,
) -> KolmogorovResult:
    """Decide whether a joint classical distribution matches the constraints.

    Feasible verdicts return a joint probability vector that satisfies every
    constraint exactly.  Infeasible verdicts return the phase-one deficit and
    a minimal infeasible subset of the constraints, found by a deletion
    filter (each member is necessary for the contradiction).
    """
    names, cells = _cells(outcome_spaces, cell_bound)
    constraints = list(constraints)
    result = _solve(names, cells, constraints)
    if result.feasible:
        joint = {
            cell: weight
            for cell, weight in zip(cells, result.x)
            if weight != 0
        }
        return KolmogorovResult(True, joint, None, Fraction(0), names)

    core = list(constraints)
    for candidate in list(core):
        trial = [c for c in core if c is not candidate]
        if not _solve(names, cells, trial).feasible:
            core = trial
    return KolmogorovResult(False, None, tuple(core), result.deficit, names)


def verify_joint(
    joint: Mapping,
    outcome_spaces: Mapping[str, Sequence],
    constraints: Sequence[Constraint],
) -> bool:
    """Substitute a joint table back into every constraint, exactly."""
    names, cells = _cells(outcome_spaces, bound=2 ** 62)
    weights = [Fraction(joint.get(cell, 0)) for cell in cells]
    if sum(weights) != 1:
        return False
    for constraint in constraints:
        row, target = _constraint_row(constraint, names, cells)
        if sum(r * w for r, w in zip(row, weights)) != target:
            return False
    return True
