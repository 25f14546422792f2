"""Exact finite-support measure calculus on the real line and the plane.

Measures are finite lists of weighted atoms.  Two arithmetic modes exist:
``rational`` (exact, `fractions.Fraction` everywhere, identities are
bit-testable) and ``float`` (double precision, atoms closer than 1e-9 are
merged).  All values are immutable after construction and every operation
is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    ConditioningOnNull,
    DomainError,
    KernelDomainError,
    ModeMismatch,
    NotProbability,
)

RATIONAL = "rational"
FLOAT = "float"

FLOAT_MERGE_TOL = 1e-9
FLOAT_MASS_TOL = 1e-12

Scalar = Union[Fraction, float]
ScalarLike = Union[Fraction, float, int, str]


def to_scalar(value: ScalarLike, mode: str) -> Scalar:
    """Coerce ``value`` to the scalar type of ``mode``.

    Rational mode converts floats through their exact binary expansion, so
    the conversion never rounds.  Non-finite values are rejected in both
    modes.
    """
    if mode == RATIONAL:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            return Fraction(value)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError("non-finite scalar")
            return Fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to rational scalar")
    out = float(value)
    if not math.isfinite(out):
        raise ValueError("non-finite scalar")
    return out


def _check_mode(mode: str) -> str:
    if mode not in (RATIONAL, FLOAT):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def _same_mode(*objects) -> str:
    modes = {obj.mode for obj in objects}
    if len(modes) != 1:
        raise ModeMismatch(f"mixed arithmetic modes: {sorted(modes)}")
    return modes.pop()


# ---------------------------------------------------------------------------
# Borel sets
# ---------------------------------------------------------------------------

_Endpoint = Union[Fraction, float]  # Fractions plus the +-inf sentinels


def _to_endpoint(value) -> _Endpoint:
    if isinstance(value, float) and math.isinf(value):
        return value
    if isinstance(value, float) and math.isnan(value):
        raise ValueError("NaN endpoint")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"bad endpoint {value!r}")


class BorelSet:
    """Finite union of half-open intervals ``[lo, hi)`` and isolated points.

    The representation is canonical: intervals are disjoint, sorted and
    maximal (touching intervals are merged), singletons are sorted and never
    lie inside an interval.  Endpoints are exact rationals, with ``±inf``
    allowed for unbounded intervals.
    """

    __slots__ = ("intervals", "singletons")

    def __init__(self, intervals: Iterable = (), singletons: Iterable = ()):
        ivs = []
        for lo, hi in intervals:
            lo_e, hi_e = _to_endpoint(lo), _to_endpoint(hi)
            if not lo_e < hi_e:
                raise ValueError(f"empty interval [{lo}, {hi})")
            ivs.append((lo_e, hi_e))
        ivs.sort(key=lambda p: (float(p[0]), float(p[1])))
        merged: list = []
        for lo_e, hi_e in ivs:
            if merged and lo_e <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi_e))
            else:
                merged.append((lo_e, hi_e))
        points = sorted({_to_endpoint(s) for s in singletons})
        for p in points:
            if isinstance(p, float) and math.isinf(p):
                raise ValueError("singleton at infinity")
        kept = tuple(
            p for p in points if not any(lo <= p < hi for lo, hi in merged)
        )
        self.intervals = tuple(merged)
        self.singletons = kept

    # -- constructors -------------------------------------------------------

    @classmethod
    def interval(cls, lo, hi) -> "BorelSet":
        """Half-open interval ``[lo, hi)``."""
        return cls(intervals=[(lo, hi)])

    @classmethod
    def closed_interval(cls, lo, hi) -> "BorelSet":
        """Closed interval ``[lo, hi]``."""
        return cls(intervals=[(lo, hi)], singletons=[hi])

    @classmethod
    def point(cls, value) -> "BorelSet":
        return cls(singletons=[value])

    @classmethod
    def points(cls, values: Iterable) -> "BorelSet":
        return cls(singletons=values)

    @classmethod
    def real_line(cls) -> "BorelSet":
        return cls(intervals=[(-math.inf, math.inf)])

    # -- predicates ----------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.intervals and not self.singletons

    def __bool__(self) -> bool:
        return not self.is_empty()

    def contains(self, x, singleton_tol=0) -> bool:
        """Membership test.

        ``singleton_tol`` widens singleton atoms to ``|x - s| <= tol``; it is
        meant for inexact spectra matched against exact sets.  Interval
        membership is always exact.
        """
        for lo, hi in self.intervals:
            if lo <= x < hi:
                return True
        if singleton_tol:
            return any(abs(x - s) <= singleton_tol for s in self.singletons)
        return any(x == s for s in self.singletons)

    def __contains__(self, x) -> bool:
        return self.contains(x)

    # -- algebra -------------------------------------------------------------

    def union(self, other: "BorelSet") -> "BorelSet":
        return BorelSet(
            intervals=self.intervals + other.intervals,
            singletons=self.singletons + other.singletons,
        )

    def intersection(self, other: "BorelSet") -> "BorelSet":
        intervals = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo < hi:
                    intervals.append((lo, hi))
        singles = [s for s in self.singletons if other.contains(s)]
        singles += [s for s in other.singletons if self.contains(s)]
        return BorelSet(intervals=intervals, singletons=singles)

    def is_disjoint_from(self, other: "BorelSet") -> bool:
        return self.intersection(other).is_empty()

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BorelSet)
            and self.intervals == other.intervals
            and self.singletons == other.singletons
        )

    def __hash__(self) -> int:
        return hash((self.intervals, self.singletons))

    def describe(self) -> str:
        """Compact human-readable form, e.g. ``[0,1) ∪ {2}``."""
        parts = [f"[{lo},{hi})" for lo, hi in self.intervals]
        if self.singletons:
            parts.append("{" + ",".join(str(s) for s in self.singletons) + "}")
        return " u ".join(parts) if parts else "{}"

    def __repr__(self) -> str:
        return f"BorelSet({self.describe()})"


# ---------------------------------------------------------------------------
# Measures on the line
# ---------------------------------------------------------------------------


def _merge_atoms(pairs, mode: str):
    """Sort atom pairs, drop zero weights, merge coincident points.

    Float mode merges runs of points within ``FLOAT_MERGE_TOL`` of the run
    start; the representative point is the weight-weighted mean of the run.
    """
    items = sorted((p, w) for p, w in pairs)
    out = []
    for point, weight in items:
        if weight < 0:
            if mode == FLOAT and weight >= -FLOAT_MASS_TOL:
                weight = 0.0
            else:
                raise ValueError(f"negative weight {weight} at {point}")
        if weight == 0:
            continue
        if out:
            prev_point, prev_weight, run_start = out[-1]
            coincident = (
                point == prev_point
                if mode == RATIONAL
                else point - run_start <= FLOAT_MERGE_TOL
            )
            if coincident:
                new_w = prev_weight + weight
                new_p = (prev_point * prev_weight + point * weight) / new_w
                out[-1] = (new_p, new_w, run_start)
                continue
        out.append((point, weight, point))
    return tuple((p, w) for p, w, _ in out)


class DiscreteMeasure:
    """Nonnegative measure with finitely many atoms on the real line."""

    __slots__ = ("atoms", "mode")

    def __init__(self, atoms: Iterable, mode: str = RATIONAL):
        _check_mode(mode)
        pairs = [(to_scalar(p, mode), to_scalar(w, mode)) for p, w in atoms]
        self.atoms = _merge_atoms(pairs, mode)
        self.mode = mode

    # -- constructors --------------------------------------------------------

    @classmethod
    def dirac(cls, point, mode: str = RATIONAL) -> "DiscreteMeasure":
        return cls([(point, 1)], mode=mode)

    @classmethod
    def uniform(cls, points: Sequence, mode: str = RATIONAL) -> "DiscreteMeasure":
        n = len(points)
        if n == 0:
            raise ValueError("uniform measure needs at least one point")
        w = Fraction(1, n) if mode == RATIONAL else 1.0 / n
        return cls([(p, w) for p in points], mode=mode)

    @classmethod
    def from_weights(cls, table: Mapping, mode: str = RATIONAL) -> "DiscreteMeasure":
        return cls(list(table.items()), mode=mode)

    # -- basic queries -------------------------------------------------------

    @property
    def mass(self) -> Scalar:
        total = sum((w for _, w in self.atoms), start=to_scalar(0, self.mode))
        return total

    @property
    def support(self):
        return tuple(p for p, _ in self.atoms)

    def weight_at(self, point) -> Scalar:
        point = to_scalar(point, self.mode)
        for p, w in self.atoms:
            if p == point:
                return w
        return to_scalar(0, self.mode)

    def is_probability(self) -> bool:
        if self.mode == RATIONAL:
            return self.mass == 1
        return abs(self.mass - 1.0) <= FLOAT_MASS_TOL

    def require_probability(self, what: str = "measure") -> "DiscreteMeasure":
        if not self.is_probability():
            raise NotProbability(f"{what} has mass {self.mass}, expected 1")
        return self

    # -- the measure itself --------------------------------------------------

    def measure_of(self, delta: BorelSet, singleton_tol=0) -> Scalar:
        """Total weight of atoms lying in ``delta``."""
        total = to_scalar(0, self.mode)
        for p, w in self.atoms:
            if delta.contains(p, singleton_tol=singleton_tol):
                total += w
        return total

    def mean(self) -> Scalar:
        """First moment; defined for probability measures only."""
        self.require_probability()
        return sum((p * w for p, w in self.atoms), start=to_scalar(0, self.mode))

    def variance(self) -> Scalar:
        """Second central moment (the dispersion of the outcome)."""
        m = self.mean()
        return sum(
            ((p - m) * (p - m) * w for p, w in self.atoms),
            start=to_scalar(0, self.mode),
        )

    def expectation(self, f: Callable) -> Scalar:
        """Integral of ``f`` against the measure."""
        total = to_scalar(0, self.mode)
        for p, w in self.atoms:
            total += to_scalar(f(p), self.mode) * w
        return total

    # -- transformations -----------------------------------------------------

    def pushforward(self, f) -> "DiscreteMeasure":
        """Image measure under ``f`` (callable or lookup table).

        Atoms whose images coincide are merged, so mass is preserved.
        """
        images = []
        for p, w in self.atoms:
            if isinstance(f, Mapping):
                if p not in f:
                    raise DomainError(f"lookup table undefined at {p}")
                value = f[p]
            else:
                try:
                    value = f(p)
                except Exception as exc:  # noqa: BLE001 - report as domain failure
                    raise DomainError(f"function undefined at {p}: {exc}") from exc
            try:
                images.append((to_scalar(value, self.mode), w))
            except (TypeError, ValueError) as exc:
                raise DomainError(f"function value at {p} not a scalar") from exc
        return DiscreteMeasure(images, mode=self.mode)

    def bayes_condition(self, delta: BorelSet) -> "DiscreteMeasure":
        """Conditional measure ``A -> m(A & delta) / m(delta)``."""
        denom = self.measure_of(delta)
        if denom == 0:
            raise ConditioningOnNull(f"conditioning set has measure zero: {delta!r}")
        kept = [(p, w / denom) for p, w in self.atoms if delta.contains(p)]
        return DiscreteMeasure(kept, mode=self.mode)

    def restrict(self, delta: BorelSet) -> "DiscreteMeasure":
        """Unnormalized restriction to ``delta``."""
        return DiscreteMeasure(
            [(p, w) for p, w in self.atoms if delta.contains(p)], mode=self.mode
        )

    def scale(self, factor) -> "DiscreteMeasure":
        c = to_scalar(factor, self.mode)
        if c < 0:
            raise ValueError("negative scale factor")
        return DiscreteMeasure([(p, w * c) for p, w in self.atoms], mode=self.mode)

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DiscreteMeasure)
            and self.mode == other.mode
            and self.atoms == other.atoms
        )

    def __hash__(self) -> int:
        return hash((self.mode, self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{w}" for p, w in self.atoms)
        return f"DiscreteMeasure({{{inner}}}, mode={self.mode})"


def measures_close(
    a: DiscreteMeasure,
    b: DiscreteMeasure,
    point_tol: float = FLOAT_MERGE_TOL,
    weight_tol: float = 1e-9,
) -> bool:
    """Atomwise comparison with tolerances; exact equality in rational mode."""
    if a.mode == RATIONAL and b.mode == RATIONAL:
        return a.atoms == b.atoms
    if len(a) != len(b):
        return False
    return all(
        abs(p - q) <= point_tol and abs(w - v) <= weight_tol
        for (p, w), (q, v) in zip(a.atoms, b.atoms)
    )


def mixture(components: Sequence, mode: str = None) -> DiscreteMeasure:
    """Weighted sum ``sum_i c_i * m_i`` of measures on a common mode."""
    if not components:
        raise ValueError("empty mixture")
    measures = [m for _, m in components]
    the_mode = _same_mode(*measures) if mode is None else mode
    atoms = []
    for coeff, m in components:
        c = to_scalar(coeff, the_mode)
        atoms.extend((p, c * w) for p, w in m.atoms)
    return DiscreteMeasure(atoms, mode=the_mode)


def convolve(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Distribution of the sum of two independent outcomes.

    The mean of the result is the sum of the two means, which is the
    additivity law for jointly measured quantities.
    """
    mode = _same_mode(mu, nu)
    mu.require_probability("left operand")
    nu.require_probability("right operand")
    atoms = [(p + q, w * v) for p, w in mu.atoms for q, v in nu.atoms]
    return DiscreteMeasure(atoms, mode=mode)


# ---------------------------------------------------------------------------
# Lebesgue decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LebesgueDecomposition:
    """Split of ``nu`` into parts inside and outside the support of ``mu``.

    ``absolutely_continuous + singular == nu`` atom by atom.  The density
    table is the Radon-Nikodym derivative of the absolutely continuous part
    with respect to ``mu``, tabulated on the support of ``mu``.
    """

    absolutely_continuous: DiscreteMeasure
    singular: DiscreteMeasure
    continuous_mass: Scalar
    density: dict

    def normalized_continuous(self) -> DiscreteMeasure:
        if self.continuous_mass == 0:
            raise ZeroDivisionError("absolutely continuous part is null")
        return self.absolutely_continuous.scale(1 / self.continuous_mass)

    def normalized_singular(self) -> DiscreteMeasure:
        rem = 1 - self.continuous_mass
        if rem == 0:
            raise ZeroDivisionError("singular part is null")
        return self.singular.scale(1 / rem)


def lebesgue_decompose(nu: DiscreteMeasure, mu: DiscreteMeasure) -> LebesgueDecomposition:
    """Unique split ``nu = ac + sing`` with ``ac`` carried by supp(mu) and
    ``sing`` disjoint from it."""
    _same_mode(nu, mu)
    nu.require_probability("decomposed measure")
    mu.require_probability("reference measure")
    mu_support = set(mu.support)
    ac = [(p, w) for p, w in nu.atoms if p in mu_support]
    sing = [(p, w) for p, w in nu.atoms if p not in mu_support]
    ac_measure = DiscreteMeasure(ac, mode=nu.mode)
    sing_measure = DiscreteMeasure(sing, mode=nu.mode)
    density = {p: nu.weight_at(p) / w for p, w in mu.atoms}
    return LebesgueDecomposition(
        absolutely_continuous=ac_measure,
        singular=sing_measure,
        continuous_mass=ac_measure.mass,
        density=density,
    )


# ---------------------------------------------------------------------------
# Joint measures and Markov kernels
# ---------------------------------------------------------------------------


def _merge_joint_atoms(pairs, mode: str):
    items = sorted(pairs)
    out = []
    for (s, t), w in items:
        if w < 0:
            if mode == FLOAT and w >= -FLOAT_MASS_TOL:
                w = 0.0
            else:
                raise ValueError(f"negative weight {w} at {(s, t)}")
        if w == 0:
            continue
        if out:
            (ps, pt), pw = out[-1]
            same = (
                (s, t) == (ps, pt)
                if mode == RATIONAL
                else abs(s - ps) <= FLOAT_MERGE_TOL and abs(t - pt) <= FLOAT_MERGE_TOL
            )
            if same:
                out[-1] = ((ps, pt), pw + w)
                continue
        out.append(((s, t), w))
    return tuple(out)


class JointMeasure:
    """Finite-support measure on the plane, used for paired measurements."""

    __slots__ = ("atoms", "mode")

    def __init__(self, atoms: Iterable, mode: str = RATIONAL):
        _check_mode(mode)
        pairs = [
            ((to_scalar(s, mode), to_scalar(t, mode)), to_scalar(w, mode))
            for (s, t), w in atoms
        ]
        self.atoms = _merge_joint_atoms(pairs, mode)
        self.mode = mode

    @property
    def mass(self) -> Scalar:
        return sum((w for _, w in self.atoms), start=to_scalar(0, self.mode))

    def is_probability(self) -> bool:
        if self.mode == RATIONAL:
            return self.mass == 1
        return abs(self.mass - 1.0) <= FLOAT_MASS_TOL

    def require_probability(self, what: str = "joint measure") -> "JointMeasure":
        if not self.is_probability():
            raise NotProbability(f"{what} has mass {self.mass}, expected 1")
        return self

    def measure_of(self, delta_s: BorelSet, delta_t: BorelSet, singleton_tol=0) -> Scalar:
        total = to_scalar(0, self.mode)
        for (s, t), w in self.atoms:
            if delta_s.contains(s, singleton_tol) and delta_t.contains(t, singleton_tol):
                total += w
        return total

    def marginals(self):
        """Pair of coordinate projections."""
        first = DiscreteMeasure([(s, w) for (s, _), w in self.atoms], mode=self.mode)
        second = DiscreteMeasure([(t, w) for (_, t), w in self.atoms], mode=self.mode)
        return first, second

    def pushforward(self, f: Callable) -> DiscreteMeasure:
        """Image measure on the line under ``f(s, t)``."""
        images = []
        for (s, t), w in self.atoms:
            try:
                value = f(s, t)
            except Exception as exc:  # noqa: BLE001
                raise DomainError(f"function undefined at {(s, t)}: {exc}") from exc
            images.append((value, w))
        return DiscreteMeasure(images, mode=self.mode)

    def means(self):
        """Coordinatewise expectation pair."""
        self.require_probability()
        zero = to_scalar(0, self.mode)
        es = sum((s * w for (s, _), w in self.atoms), start=zero)
        et = sum((t * w for (_, t), w in self.atoms), start=zero)
        return es, et

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JointMeasure)
            and self.mode == other.mode
            and self.atoms == other.atoms
        )

    def __hash__(self) -> int:
        return hash((self.mode, self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        inner = ", ".join(f"({s},{t}):{w}" for (s, t), w in self.atoms)
        return f"JointMeasure({{{inner}}}, mode={self.mode})"


class MarkovKernel:
    """Family of conditional probability measures indexed by marginal points."""

    __slots__ = ("rows", "mode")

    def __init__(self, rows: Mapping):
        if not rows:
            raise ValueError("kernel needs at least one row")
        measures = list(rows.values())
        mode = _same_mode(*measures)
        converted = {}
        for point, row in rows.items():
            row.require_probability(f"kernel row at {point}")
            converted[to_scalar(point, mode)] = row
        self.rows = converted
        self.mode = mode

    def row(self, point) -> DiscreteMeasure:
        key = to_scalar(point, self.mode)
        if key not in self.rows:
            raise KernelDomainError(f"kernel has no row at {point}")
        return self.rows[key]

    def __contains__(self, point) -> bool:
        return to_scalar(point, self.mode) in self.rows

    def __repr__(self) -> str:
        return f"MarkovKernel(points={sorted(self.rows)}, mode={self.mode})"


def product_measure(marginal: DiscreteMeasure, kernel: MarkovKernel) -> JointMeasure:
    """Integrate the kernel rows against the marginal.

    The first marginal of the result reproduces ``marginal`` exactly; rows
    are required only where the marginal puts positive weight.
    """
    _same_mode(marginal, kernel)
    atoms = []
    for s, w in marginal.atoms:
        row = kernel.row(s)
        atoms.extend(((s, t), w * v) for t, v in row.atoms)
    return JointMeasure(atoms, mode=marginal.mode)


def disintegrate(joint: JointMeasure):
    """Split a joint probability into first marginal and conditional rows.

    ``product_measure`` of the output reproduces the input atom by atom, and
    integrating any row set against the marginal gives back the second
    marginal.
    """
    joint.require_probability()
    by_point: dict = {}
    for (s, t), w in joint.atoms:
        by_point.setdefault(s, []).append((t, w))
    marginal = DiscreteMeasure(
        [(s, sum(w for _, w in entries)) for s, entries in by_point.items()],
        mode=joint.mode,
    )
    rows = {}
    for s, entries in by_point.items():
        total = sum(w for _, w in entries)
        rows[s] = DiscreteMeasure([(t, w / total) for t, w in entries], mode=joint.mode)
    return marginal, MarkovKernel(rows)


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


class Partition:
    """Finite family of pairwise disjoint Borel cells over a window."""

    __slots__ = ("window", "cells")

    def __init__(self, window, cells: Sequence[BorelSet]):
        lo, hi = (_to_endpoint(window[0]), _to_endpoint(window[1]))
        if not lo < hi:
            raise ValueError("window must be a nondegenerate interval")
        cells = tuple(cells)
        if not cells:
            raise ValueError("partition needs at least one cell")
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                if not cells[i].is_disjoint_from(cells[j]):
                    raise ValueError(f"cells {i} and {j} overlap")
        self.window = (lo, hi)
        self.cells = cells

    @classmethod
    def dyadic(cls, lo, hi, depth: int) -> "Partition":
        """2**depth equal half-open cells over [lo, hi], last cell closed."""
        lo_e, hi_e = Fraction(_to_endpoint(lo)), Fraction(_to_endpoint(hi))
        n = 2 ** depth
        step = (hi_e - lo_e) / n
        cells = []
        for k in range(n):
            a, b = lo_e + k * step, lo_e + (k + 1) * step
            cell = BorelSet.closed_interval(a, b) if k == n - 1 else BorelSet.interval(a, b)
            cells.append(cell)
        return cls((lo_e, hi_e), cells)

    @classmethod
    def separating(cls, measure: DiscreteMeasure) -> "Partition":
        """One singleton cell per atom; the finest partition the atoms see."""
        support = measure.support
        if not support:
            raise ValueError("empty measure has no separating partition")
        pts = [Fraction(p) if not isinstance(p, Fraction) else p for p in support]
        lo = min(pts) - 1
        hi = max(pts) + 1
        return cls((lo, hi), [BorelSet.point(p) for p in support])

    def locate(self, x) -> int:
        """Index of the cell containing ``x``, or -1."""
        for k, cell in enumerate(self.cells):
            if cell.contains(x):
                return k
        return -1

    def covers(self, measure: DiscreteMeasure) -> bool:
        return all(self.locate(p) >= 0 for p in measure.support)

    def __len__(self) -> int:
        return len(self.cells)

    def __repr__(self) -> str:
        return f"Partition(window={self.window}, cells={len(self.cells)})"
