import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oplab.errors import (
    ConditioningOnNull,
    DomainError,
    KernelDomainError,
    ModeMismatch,
    NotProbability,
)
from oplab.measures import (
    BorelSet,
    DiscreteMeasure,
    JointMeasure,
    MarkovKernel,
    Partition,
    convolve,
    disintegrate,
    lebesgue_decompose,
    measures_close,
    mixture,
    product_measure,
)

from conftest import random_rational_joint, random_rational_probability


class TestBorelSet:
    def test_canonical_merge(self):
        s = BorelSet(intervals=[(0, 1), (1, 2)], singletons=[F(3, 2)])
        assert s.intervals == ((F(0), F(2)),)
        assert s.singletons == ()

    def test_singleton_outside_interval_kept(self):
        s = BorelSet(intervals=[(0, 1)], singletons=[1])
        assert s.singletons == (F(1),)
        assert s.contains(1)
        assert not s.contains(F(5, 2))

    def test_union_intersection(self):
        a = BorelSet.interval(0, 2)
        b = BorelSet(intervals=[(1, 3)], singletons=[5])
        u = a.union(b)
        assert u.intervals == ((F(0), F(3)),)
        assert u.singletons == (F(5),)
        i = a.intersection(b)
        assert i.intervals == ((F(1), F(2)),)
        assert not a.intersection(BorelSet.point(5))

    def test_unbounded(self):
        s = BorelSet.interval(1, math.inf)
        assert s.contains(10 ** 9)
        assert not s.contains(0)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            BorelSet.interval(1, 1)

    def test_singleton_tolerance(self):
        s = BorelSet.point(1)
        assert not s.contains(1.0 + 1e-9)
        assert s.contains(1.0 + 1e-9, singleton_tol=1e-8)


class TestMeasureOf:
    def test_dirac_in_interval(self):
        assert DiscreteMeasure.dirac(2).measure_of(BorelSet.interval(1, 3)) == 1

    def test_two_point_singleton(self):
        m = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        assert m.measure_of(BorelSet.point(1)) == F(1, 2)

    def test_tail_interval(self):
        m = DiscreteMeasure([(0, "0.2"), (1, "0.3"), (2, "0.5")])
        assert m.measure_of(BorelSet.interval(1, math.inf)) == F(4, 5)

    def test_additivity_on_disjoint_sets(self, rng):
        for _ in range(50):
            m = random_rational_probability(rng)
            cut = rng.randint(-30, 30)
            left = BorelSet.interval(-math.inf, cut)
            right = BorelSet.interval(cut, math.inf)
            assert m.measure_of(left) + m.measure_of(right) == m.mass
            assert m.measure_of(left.union(right)) == m.mass


class TestPushforward:
    def test_image_collision_merges(self):
        m = DiscreteMeasure([(-1, F(1, 2)), (1, F(1, 2))])
        assert m.pushforward(lambda t: t * t) == DiscreteMeasure.dirac(1)

    def test_identity(self, rng):
        m = random_rational_probability(rng)
        assert m.pushforward(lambda t: t) == m

    def test_indicator(self):
        m = DiscreteMeasure([(-1, "0.2"), (0, "0.3"), (2, "0.5")])
        image = m.pushforward(lambda t: 1 if t >= 0 else 0)
        assert image == DiscreteMeasure([(0, F(1, 5)), (1, F(4, 5))])

    def test_composition(self, rng):
        f = lambda t: t + 3
        g = lambda t: t * t
        for _ in range(25):
            m = random_rational_probability(rng)
            assert m.pushforward(f).pushforward(g) == m.pushforward(lambda t: g(f(t)))

    def test_lookup_table_domain_error(self):
        m = DiscreteMeasure([(0, 1)])
        with pytest.raises(DomainError):
            m.pushforward({1: 2})

    def test_mass_preserved(self, rng):
        m = random_rational_probability(rng)
        assert m.pushforward(lambda t: t % 3).mass == m.mass


class TestMeanAndVariance:
    def test_dirac(self):
        assert DiscreteMeasure.dirac(F(7, 2)).mean() == F(7, 2)

    def test_half_half(self):
        assert DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))]).mean() == F(1, 2)

    def test_weighted(self):
        m = DiscreteMeasure([(0, "0.2"), (1, "0.3"), (2, "0.5")])
        assert m.mean() == F(13, 10)

    def test_requires_probability(self):
        with pytest.raises(NotProbability):
            DiscreteMeasure([(0, F(1, 2))]).mean()

    def test_variance_zero_iff_dirac(self, rng):
        assert DiscreteMeasure.dirac(4).variance() == 0
        m = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        assert m.variance() == F(1, 4)


class TestConvolve:
    def test_dirac_shift(self):
        assert convolve(DiscreteMeasure.dirac(2), DiscreteMeasure.dirac(5)) == \
            DiscreteMeasure.dirac(7)

    def test_coin_pair(self):
        half = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        assert convolve(half, half) == DiscreteMeasure(
            [(0, F(1, 4)), (1, F(1, 2)), (2, F(1, 4))]
        )

    def test_mean_additivity(self, rng):
        for _ in range(50):
            a = random_rational_probability(rng, max_atoms=6)
            b = random_rational_probability(rng, max_atoms=6)
            assert convolve(a, b).mean() == a.mean() + b.mean()

    def test_commutative_associative(self, rng):
        a = random_rational_probability(rng, max_atoms=5)
        b = random_rational_probability(rng, max_atoms=5)
        c = random_rational_probability(rng, max_atoms=5)
        assert convolve(a, b) == convolve(b, a)
        assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))

    def test_mode_mismatch(self):
        with pytest.raises(ModeMismatch):
            convolve(DiscreteMeasure.dirac(0), DiscreteMeasure.dirac(0, mode="float"))


class TestLebesgueDecompose:
    def test_dirac_inside_support(self):
        mu = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        dec = lebesgue_decompose(DiscreteMeasure.dirac(0), mu)
        assert dec.absolutely_continuous == DiscreteMeasure.dirac(0)
        assert dec.singular.mass == 0
        assert dec.continuous_mass == 1

    def test_dirac_outside_support(self):
        mu = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        dec = lebesgue_decompose(DiscreteMeasure.dirac(9), mu)
        assert dec.absolutely_continuous.mass == 0
        assert dec.singular == DiscreteMeasure.dirac(9)
        assert dec.continuous_mass == 0

    def test_atomwise_split(self):
        nu = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        dec = lebesgue_decompose(nu, DiscreteMeasure.dirac(0))
        assert dec.absolutely_continuous == DiscreteMeasure([(0, F(1, 2))])
        assert dec.singular == DiscreteMeasure([(1, F(1, 2))])
        assert dec.continuous_mass == F(1, 2)
        assert dec.density == {F(0): F(1, 2)}

    def test_recombination_and_uniqueness(self, rng):
        for _ in range(100):
            nu = random_rational_probability(rng)
            mu = random_rational_probability(rng)
            dec = lebesgue_decompose(nu, mu)
            recombined = mixture([(1, dec.absolutely_continuous), (1, dec.singular)])
            assert recombined == nu
            again = lebesgue_decompose(nu, mu)
            assert again.absolutely_continuous == dec.absolutely_continuous
            assert again.singular == dec.singular
            support = set(mu.support)
            assert set(dec.absolutely_continuous.support) <= support
            assert not set(dec.singular.support) & support


class TestBayes:
    def test_full_set_is_identity(self, rng):
        m = random_rational_probability(rng)
        assert m.bayes_condition(BorelSet.real_line()) == m

    def test_renormalized_restriction(self):
        m = DiscreteMeasure([(0, F(1, 4)), (1, F(1, 4)), (2, F(1, 2))])
        got = m.bayes_condition(BorelSet.interval(1, 3))
        assert got == DiscreteMeasure([(1, F(1, 3)), (2, F(2, 3))])

    def test_singleton_gives_dirac(self):
        m = DiscreteMeasure([(0, F(1, 4)), (1, F(3, 4))])
        assert m.bayes_condition(BorelSet.point(1)) == DiscreteMeasure.dirac(1)

    def test_mean_stays_in_window(self, rng):
        for _ in range(20):
            m = random_rational_probability(rng)
            delta = BorelSet.interval(-10, 10)
            if m.measure_of(delta) == 0:
                continue
            eta = m.bayes_condition(delta)
            inside = [p for p in m.support if delta.contains(p)]
            assert min(inside) <= eta.mean() <= max(inside)

    def test_null_set_rejected(self):
        with pytest.raises(ConditioningOnNull):
            DiscreteMeasure.dirac(0).bayes_condition(BorelSet.point(1))


class TestKernelAndJoint:
    def test_independent_kernel_is_product(self):
        marginal = DiscreteMeasure([(0, F(1, 3)), (1, F(2, 3))])
        nu = DiscreteMeasure([(5, F(1, 2)), (6, F(1, 2))])
        kernel = MarkovKernel({p: nu for p in marginal.support})
        joint = product_measure(marginal, kernel)
        first, second = joint.marginals()
        assert first == marginal
        assert second == nu

    def test_dirac_marginal(self):
        row = DiscreteMeasure([(1, F(1, 4)), (2, F(3, 4))])
        joint = product_measure(DiscreteMeasure.dirac(7), MarkovKernel({7: row}))
        assert joint.measure_of(BorelSet.point(7), BorelSet.point(2)) == F(3, 4)

    def test_missing_row(self):
        marginal = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        kernel = MarkovKernel({0: DiscreteMeasure.dirac(0)})
        with pytest.raises(KernelDomainError):
            product_measure(marginal, kernel)

    def test_disintegrate_independent(self):
        mu = DiscreteMeasure([(0, F(1, 2)), (1, F(1, 2))])
        nu = DiscreteMeasure([(3, F(1, 4)), (4, F(3, 4))])
        joint = product_measure(mu, MarkovKernel({p: nu for p in mu.support}))
        marginal, kernel = disintegrate(joint)
        assert marginal == mu
        for p in mu.support:
            assert kernel.row(p) == nu

    def test_disintegrate_point_mass(self):
        joint = JointMeasure([((2, 5), 1)])
        marginal, kernel = disintegrate(joint)
        assert marginal == DiscreteMeasure.dirac(2)
        assert kernel.row(2) == DiscreteMeasure.dirac(5)

    def test_round_trip_random_tables(self, rng):
        for _ in range(100):
            joint = random_rational_joint(rng)
            marginal, kernel = disintegrate(joint)
            assert product_measure(marginal, kernel) == joint
            # second-marginal identity: integrating rows reproduces it
            _, second = joint.marginals()
            total = mixture([(w, kernel.row(s)) for s, w in marginal.atoms])
            assert total == second

    def test_joint_pushforward_sum(self):
        joint = JointMeasure([((0, 1), F(1, 2)), ((2, 3), F(1, 2))])
        assert joint.pushforward(lambda s, t: s + t) == DiscreteMeasure(
            [(1, F(1, 2)), (5, F(1, 2))]
        )


class TestFloatMode:
    def test_atom_merge_tolerance(self):
        m = DiscreteMeasure([(0.0, 0.5), (1e-10, 0.5)], mode="float")
        assert len(m) == 1
        assert m.is_probability()

    def test_measures_close(self):
        a = DiscreteMeasure([(0.0, 0.5), (1.0, 0.5)], mode="float")
        b = DiscreteMeasure([(0.0, 0.5 + 1e-12), (1.0, 0.5 - 1e-12)], mode="float")
        assert measures_close(a, b)


class TestPartition:
    def test_overlapping_cells_rejected(self):
        with pytest.raises(ValueError):
            Partition((0, 2), [BorelSet.interval(0, 1), BorelSet.interval(F(1, 2), 2)])

    def test_dyadic_covers_window(self):
        part = Partition.dyadic(0, 1, 3)
        assert len(part) == 8
        m = DiscreteMeasure([(0, F(1, 3)), (F(1, 2), F(1, 3)), (1, F(1, 3))])
        assert part.covers(m)

    def test_separating(self):
        m = DiscreteMeasure([(0, F(1, 2)), (5, F(1, 2))])
        part = Partition.separating(m)
        assert part.covers(m)
        assert len(part) == 2


# Hypothesis property checks on small rational measures.

weights = st.lists(st.integers(min_value=1, max_value=9), min_size=1, max_size=6)
points = st.lists(st.integers(min_value=-20, max_value=20), min_size=6, max_size=6, unique=True)


@st.composite
def rational_measures(draw):
    ws = draw(weights)
    ps = draw(points)[: len(ws)]
    total = sum(ws)
    return DiscreteMeasure([(p, F(w, total)) for p, w in zip(ps, ws)])


@settings(max_examples=60, deadline=None)
@given(nu=rational_measures(), mu=rational_measures())
def test_lebesgue_components_always_recombine(nu, mu):
    dec = lebesgue_decompose(nu, mu)
    assert mixture([(1, dec.absolutely_continuous), (1, dec.singular)]) == nu


@settings(max_examples=60, deadline=None)
@given(m=rational_measures(), cut=st.integers(min_value=-20, max_value=20))
def test_finite_additivity(m, cut):
    left = BorelSet.interval(-math.inf, cut)
    right = BorelSet.interval(cut, math.inf)
    assert m.measure_of(left) + m.measure_of(right) == 1


@settings(max_examples=40, deadline=None)
@given(a=rational_measures(), b=rational_measures())
def test_convolution_mean_additive(a, b):
    assert convolve(a, b).mean() == a.mean() + b.mean()
