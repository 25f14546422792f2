import itertools
from fractions import Fraction as F

import pytest

from oplab.errors import CapacityError
from oplab.kolmogorov import (
    ConditionalConstraint,
    CorrelationConstraint,
    ExpectationConstraint,
    JointConstraint,
    MarginalConstraint,
    kolmogorov_check,
    verify_joint,
)

PM1 = {"a": [-1, 1], "b": [-1, 1], "c": [-1, 1]}


def test_single_marginal_trivially_feasible():
    constraints = [MarginalConstraint("a", 1, F(2, 7))]
    result = kolmogorov_check({"a": [-1, 1]}, constraints)
    assert result.feasible
    assert verify_joint(result.joint, {"a": [-1, 1]}, constraints)


def test_product_measure_tables_recovered():
    # Pairwise tables generated from a true product measure p(a) x p(b).
    pa = {-1: F(1, 4), 1: F(3, 4)}
    pb = {-1: F(2, 5), 1: F(3, 5)}
    constraints = []
    for va, vb in itertools.product([-1, 1], repeat=2):
        constraints.append(JointConstraint.of({"a": va, "b": vb}, pa[va] * pb[vb]))
    result = kolmogorov_check({"a": [-1, 1], "b": [-1, 1]}, constraints)
    assert result.feasible
    assert verify_joint(result.joint, {"a": [-1, 1], "b": [-1, 1]}, constraints)


def test_correlation_triple_infeasible_with_certificate():
    constraints = [
        CorrelationConstraint(("a", "b"), F(-9, 10)),
        CorrelationConstraint(("a", "c"), F(-9, 10)),
        CorrelationConstraint(("b", "c"), F(-9, 10)),
    ]
    result = kolmogorov_check(PM1, constraints)
    assert not result.feasible
    assert result.deficit > 0
    assert set(result.certificate) == set(constraints)


def test_pairwise_sum_bound_oracle():
    # Enumeration oracle: on every atom of the 8-point space the sum of the
    # three pair products is either -1 or 3, so its expectation is >= -1 and
    # any target sum below -1 is impossible while any above is realizable.
    sums = {
        sa * sb + sa * sc + sb * sc
        for sa, sb, sc in itertools.product([-1, 1], repeat=3)
    }
    assert sums == {-1, 3}
    # Just feasible at the extreme point E12 = E13 = E23 = -1/3.
    boundary = [
        CorrelationConstraint(("a", "b"), F(-1, 3)),
        CorrelationConstraint(("a", "c"), F(-1, 3)),
        CorrelationConstraint(("b", "c"), F(-1, 3)),
    ]
    result = kolmogorov_check(PM1, boundary)
    assert result.feasible
    assert verify_joint(result.joint, PM1, boundary)


def test_verdicts_match_oracle_on_correlation_grid():
    # E12 = E13 = E23 = e is classical iff 3e >= -1.
    for numerator in range(-12, 13, 3):
        e = F(numerator, 12)
        constraints = [
            CorrelationConstraint(("a", "b"), e),
            CorrelationConstraint(("a", "c"), e),
            CorrelationConstraint(("b", "c"), e),
        ]
        result = kolmogorov_check(PM1, constraints)
        assert result.feasible == (3 * e >= -1)
        if result.feasible:
            assert verify_joint(result.joint, PM1, constraints)


def test_conditional_constraints_clear_denominators():
    constraints = [
        ConditionalConstraint.of({"a": 1}, {"b": 1}, F(2, 3)),
        MarginalConstraint("b", 1, F(3, 4)),
    ]
    result = kolmogorov_check(PM1, constraints)
    assert result.feasible
    joint = result.joint
    pb = sum(p for cell, p in joint.items() if cell[1] == 1)
    pab = sum(p for cell, p in joint.items() if cell[0] == 1 and cell[1] == 1)
    assert pb == F(3, 4)
    assert pab == F(2, 3) * pb


def test_expectation_constraint():
    constraints = [ExpectationConstraint("a", F(1, 2))]
    result = kolmogorov_check({"a": [-1, 1]}, constraints)
    assert result.feasible
    assert verify_joint(result.joint, {"a": [-1, 1]}, constraints)


def test_contradictory_marginals_certificate_is_minimal():
    constraints = [
        MarginalConstraint("a", 1, F(1, 3)),
        MarginalConstraint("a", 1, F(1, 2)),
        MarginalConstraint("b", 1, F(1, 2)),
    ]
    result = kolmogorov_check({"a": [-1, 1], "b": [-1, 1]}, constraints)
    assert not result.feasible
    assert set(result.certificate) == set(constraints[:2])


def test_capacity_bound():
    spaces = {f"x{k}": list(range(10)) for k in range(5)}
    with pytest.raises(CapacityError):
        kolmogorov_check(spaces, [])


def test_feasible_solution_is_exact():
    constraints = [
        CorrelationConstraint(("a", "b"), F(1, 7)),
        MarginalConstraint("c", 1, F(1, 13)),
    ]
    result = kolmogorov_check(PM1, constraints)
    assert result.feasible
    assert sum(result.joint.values()) == 1
    assert all(isinstance(v, F) for v in result.joint.values())
