"""Finite-dimensional observables and states.

Observables are Hermitian matrices with a cached eigendecomposition; states
are density matrices.  The outcome statistics of an observable in a state is
a finite spectral measure, produced here in float mode.  Everything is
immutable after construction; eigendecompositions happen once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimMismatch,
    DomainError,
    NotAQuestion,
    NotCommuting,
    NotHermitian,
    OutOfSpectralRange,
)
from .measures import FLOAT, BorelSet, DiscreteMeasure, JointMeasure

HERMITIAN_TOL = 1e-10
IDEMPOTENT_TOL = 1e-9
DEDUP_REL_TOL = 1e-8
COMMUTATOR_TOL = 1e-10
PSD_TOL = 1e-10


def _square_complex(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return _max_abs(a @ b - b @ a)


class HermitianObservable:
    """A d x d Hermitian matrix with eigendecomposition and deduped spectrum.

    Eigenvalues closer than ``1e-8 * max(1, spectral radius)`` are treated as
    one spectral point; the stored spectrum is the tuple of group means in
    ascending order.
    """

    __slots__ = ("matrix", "dim", "eigenvalues", "eigenvectors", "spectrum",
                 "_projectors", "dedup_tol")

    def __init__(self, matrix):
        m = _square_complex(matrix)
        if _max_abs(m - m.conj().T) > HERMITIAN_TOL:
            raise NotHermitian(
                f"matrix deviates from Hermitian by {_max_abs(m - m.conj().T):.3e}"
            )
        m = (m + m.conj().T) / 2.0
        evals, evecs = np.linalg.eigh(m)
        self.matrix = m
        self.dim = m.shape[0]
        self.eigenvalues = evals
        self.eigenvectors = evecs
        radius = float(np.max(np.abs(evals))) if evals.size else 0.0
        self.dedup_tol = DEDUP_REL_TOL * max(1.0, radius)
        groups = self._group_eigenvalues(evals, self.dedup_tol)
        self.spectrum = tuple(float(np.mean(evals[idx])) for idx in groups)
        projectors = {}
        for rep, idx in zip(self.spectrum, groups):
            block = evecs[:, idx]
            projectors[rep] = block @ block.conj().T
        self._projectors = projectors

    @staticmethod
    def _group_eigenvalues(evals: np.ndarray, tol: float):
        groups = []
        start = 0
        for k in range(1, len(evals) + 1):
            if k == len(evals) or evals[k] - evals[start] > tol:
                groups.append(list(range(start, k)))
                start = k
        return groups

    # -- spectral projectors ---------------------------------------------------

    def eigenprojector(self, point: float) -> np.ndarray:
        """Projector onto the eigenspace of the deduped spectral point."""
        for rep, proj in self._projectors.items():
            if abs(rep - point) <= self.dedup_tol:
                return proj
        raise DomainError(f"{point} is not a spectral point")

    def spectral_projector(self, delta: BorelSet) -> np.ndarray:
        """Projection-valued measure evaluated on a Borel set."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for rep, proj in self._projectors.items():
            if delta.contains(rep, singleton_tol=self.dedup_tol):
                out += proj
        return out

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def multiplicity(self, point: float) -> int:
        return int(round(np.trace(self.eigenprojector(point)).real))

    def commutes_with(self, other: "HermitianObservable", tol: float = COMMUTATOR_TOL) -> bool:
        self._require_same_dim(other)
        return commutator_norm(self.matrix, other.matrix) <= tol

    def _require_same_dim(self, other) -> None:
        other_dim = other.dim if isinstance(other, (HermitianObservable, DensityState)) \
            else _square_complex(other).shape[0]
        if other_dim != self.dim:
            raise DimMismatch(f"dimension {other_dim} != {self.dim}")

    def __repr__(self) -> str:
        return f"HermitianObservable(dim={self.dim}, spectrum={self.spectrum})"


class Question(HermitianObservable):
    """Yes/no observable: an orthogonal projection.

    Construction fails unless the matrix is idempotent and its spectrum is
    contained in {0, 1}.
    """

    def __init__(self, matrix):
        super().__init__(matrix)
        if _max_abs(self.matrix @ self.matrix - self.matrix) > IDEMPOTENT_TOL:
            raise NotAQuestion("matrix is not idempotent")
        if any(min(abs(s), abs(s - 1.0)) > self.dedup_tol for s in self.spectrum):
            raise NotAQuestion(f"spectrum {self.spectrum} not contained in {{0, 1}}")

    def complement(self) -> "Question":
        """The orthogonal question ``1 - q``."""
        return Question(np.eye(self.dim) - self.matrix)

    def is_trivial(self) -> bool:
        return len(self.spectrum) == 1


class DensityState:
    """Positive semidefinite trace-one matrix."""

    __slots__ = ("matrix", "dim", "eigenvalues")

    def __init__(self, matrix):
        m = _square_complex(matrix)
        if _max_abs(m - m.conj().T) > HERMITIAN_TOL:
            raise NotHermitian("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2.0
        evals = np.linalg.eigvalsh(m)
        if evals[0] < -PSD_TOL:
            raise ValueError(f"matrix has negative eigenvalue {evals[0]:.3e}")
        trace = float(np.trace(m).real)
        if abs(trace - 1.0) > HERMITIAN_TOL:
            raise ValueError(f"trace {trace} differs from one")
        self.matrix = m
        self.dim = m.shape[0]
        self.eigenvalues = np.clip(evals, 0.0, None)

    @classmethod
    def pure(cls, vector) -> "DensityState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls(np.eye(dim) / dim)

    @classmethod
    def mix(cls, components: Sequence) -> "DensityState":
        """Convex combination ``sum w_i rho_i``."""
        total = sum(w for w, _ in components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to one")
        dim = components[0][1].dim
        out = np.zeros((dim, dim), dtype=complex)
        for w, rho in components:
            if w < 0:
                raise ValueError("negative mixture weight")
            out += w * rho.matrix
        return cls(out)

    def expectation(self, observable) -> float:
        m = observable.matrix if isinstance(observable, HermitianObservable) \
            else _square_complex(observable)
        if m.shape[0] != self.dim:
            raise DimMismatch(f"dimension {m.shape[0]} != {self.dim}")
        return float(np.trace(self.matrix @ m).real)

    def __repr__(self) -> str:
        return f"DensityState(dim={self.dim})"


# ---------------------------------------------------------------------------
# Measurement statistics
# ---------------------------------------------------------------------------


def spectral_measure(observable: HermitianObservable, state: DensityState) -> DiscreteMeasure:
    """Outcome distribution of the observable in the state.

    Atoms sit at the deduped spectral points; the weight at ``s`` is the
    expectation of the spectral projector of ``{s}``.
    """
    observable._require_same_dim(state)
    atoms = []
    for rep in observable.spectrum:
        w = float(np.trace(state.matrix @ observable.eigenprojector(rep)).real)
        atoms.append((rep, max(w, 0.0)))
    return DiscreteMeasure(atoms, mode=FLOAT)


def functional_calc(observable: HermitianObservable, f: Callable) -> HermitianObservable:
    """Apply a real function to the observable through its eigenvalues."""
    values = []
    for lam in observable.eigenvalues:
        try:
            value = float(f(float(lam)))
        except Exception as exc:  # noqa: BLE001
            raise DomainError(f"function undefined at eigenvalue {lam}: {exc}") from exc
        if not math.isfinite(value):
            raise DomainError(f"function not finite at eigenvalue {lam}")
        values.append(value)
    diag = np.diag(np.asarray(values, dtype=float))
    v = observable.eigenvectors
    return HermitianObservable(v @ diag @ v.conj().T)


def spectrum_and_norm(
    observable: HermitianObservable,
    states: Optional[Sequence[DensityState]] = None,
):
    """Spectrum, spectral radius and operational norm.

    Over the full state space the norm saturates at the spectral radius
    (every value between the extreme eigenvalues is the mean in some state).
    Over a finite declared family it is the max of |expectation| and can only
    be smaller.
    """
    radius = observable.spectral_radius
    if states is None:
        norm = radius
    else:
        norm = max(abs(state.expectation(observable)) for state in states)
    return observable.spectrum, radius, norm


def sps_witness(observable: HermitianObservable, target_mean: float) -> DensityState:
    """A state whose expectation equals ``target_mean``.

    Built as a convex mix of the extreme eigenprojectors, which is possible
    exactly when the target lies between the extreme eigenvalues.
    """
    lo = float(observable.eigenvalues[0])
    hi = float(observable.eigenvalues[-1])
    s = float(target_mean)
    if s < lo - 1e-12 or s > hi + 1e-12:
        raise OutOfSpectralRange(f"{s} outside [{lo}, {hi}]")
    v_lo = observable.eigenvectors[:, 0]
    v_hi = observable.eigenvectors[:, -1]
    if hi == lo:
        return DensityState.pure(v_hi)
    t = min(max((s - lo) / (hi - lo), 0.0), 1.0)
    rho = t * np.outer(v_hi, v_hi.conj()) + (1.0 - t) * np.outer(v_lo, v_lo.conj())
    return DensityState(rho)


def positive_parts(observable: HermitianObservable):
    """Split into positive and negative parts, ``A = A+ - A-`` with
    ``A+ A- = 0`` and both parts positive semidefinite."""
    plus = functional_calc(observable, lambda t: t if t > 0 else 0.0)
    minus = functional_calc(observable, lambda t: -t if t < 0 else 0.0)
    return plus, minus


def jordan_product(a: HermitianObservable, b: HermitianObservable) -> HermitianObservable:
    """Symmetrized product ``(AB + BA) / 2``; equals AB when they commute."""
    a._require_same_dim(b)
    return HermitianObservable((a.matrix @ b.matrix + b.matrix @ a.matrix) / 2.0)


@dataclass(frozen=True)
class QuestionReport:
    complement: Question
    spectrum: tuple
    trivial: bool


def question_ops(q: Question) -> QuestionReport:
    """Orthogonal complement and spectrum classification of a question."""
    if not isinstance(q, Question):
        raise NotAQuestion("expected a Question")
    return QuestionReport(
        complement=q.complement(),
        spectrum=q.spectrum,
        trivial=q.is_trivial(),
    )


def question_times(q: Question, observable: HermitianObservable, state: DensityState) -> DiscreteMeasure:
    """Outcome distribution of the product of a question with a compatible
    observable: mass ``<1-q>`` collapses onto zero, the rest follows the
    conditioned statistics."""
    if not isinstance(q, Question):
        raise NotAQuestion("expected a Question")
    q._require_same_dim(observable)
    if not q.commutes_with(observable):
        raise NotCommuting("question does not commute with the observable")
    product = HermitianObservable(q.matrix @ observable.matrix)
    return spectral_measure(product, state)


def joint_spectral_measure(
    a: HermitianObservable, b: HermitianObservable, state: DensityState
) -> JointMeasure:
    """Two-variable outcome distribution for a commuting pair.

    Incompatible pairs (nonzero commutator) are rejected: no joint
    distribution exists for them.
    """
    a._require_same_dim(b)
    a._require_same_dim(state)
    if not a.commutes_with(b):
        raise NotCommuting(
            f"commutator norm {commutator_norm(a.matrix, b.matrix):.3e} exceeds gate"
        )
    atoms = []
    for s in a.spectrum:
        ps = a.eigenprojector(s)
        for t in b.spectrum:
            qt = b.eigenprojector(t)
            w = float(np.trace(state.matrix @ ps @ qt).real)
            if w > 0.0:
                atoms.append(((s, t), w))
    return JointMeasure(atoms, mode=FLOAT)


def joint_spectrum(a: HermitianObservable, b: HermitianObservable):
    """Pairs of spectral points whose projectors overlap; a subset of the
    Cartesian product of the two spectra."""
    a._require_same_dim(b)
    if not a.commutes_with(b):
        raise NotCommuting("joint spectrum requires a commuting pair")
    points = []
    for s in a.spectrum:
        ps = a.eigenprojector(s)
        for t in b.spectrum:
            qt = b.eigenprojector(t)
            if float(np.trace(ps @ qt).real) > 0.5:
                points.append((s, t))
    return tuple(points)


class JointOperator:
    """Off-diagonal block pairing of two observables on a doubled space."""

    __slots__ = ("first", "second", "matrix")

    def __init__(self, first: HermitianObservable, second: HermitianObservable):
        first._require_same_dim(second)
        d = first.dim
        block = np.zeros((2 * d, 2 * d), dtype=complex)
        block[:d, d:] = first.matrix
        block[d:, :d] = second.matrix
        self.first = first
        self.second = second
        self.matrix = block

    def adjoint(self) -> "JointOperator":
        return JointOperator(self.second, self.first)

    def gram(self) -> np.ndarray:
        """(A:B)* (A:B); block diagonal with B^2 and A^2."""
        return self.matrix.conj().T @ self.matrix

    def pair_expectation(self, state: DensityState):
        return (state.expectation(self.first), state.expectation(self.second))

    def __repr__(self) -> str:
        return f"JointOperator(dim={self.first.dim})"


def joint_operator(a: HermitianObservable, b: HermitianObservable) -> JointOperator:
    return JointOperator(a, b)


@dataclass(frozen=True)
class ResolutionDecomposition:
    cells: tuple
    sample_points: tuple
    error_bound: float


def epsilon_decomposition(
    observable: HermitianObservable, f: Callable, resolution: float
) -> ResolutionDecomposition:
    """Partition the spectrum so that ``f`` varies less than ``resolution``
    on every cell, and bound the operator-norm error of the resulting step
    approximation of ``f(A)``.

    A finite spectrum always admits singleton cells, so the construction
    cannot fail; the bound returned is the exact operator norm of the
    difference.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    values = {}
    for s in observable.spectrum:
        try:
            values[s] = float(f(s))
        except Exception as exc:  # noqa: BLE001
            raise DomainError(f"function undefined at {s}: {exc}") from exc
    ordered = sorted(observable.spectrum, key=lambda s: values[s])
    cells = []
    samples = []
    group: list = []
    for s in ordered:
        if group and values[s] - values[group[0]] >= resolution:
            cells.append(BorelSet.points(group))
            samples.append(group[0])
            group = []
        group.append(s)
    if group:
        cells.append(BorelSet.points(group))
        samples.append(group[0])
    bound = 0.0
    for cell, t in zip(cells, samples):
        members = [s for s in observable.spectrum if cell.contains(s, observable.dedup_tol)]
        bound = max(bound, max(abs(values[s] - values[t]) for s in members))
    return ResolutionDecomposition(tuple(cells), tuple(samples), bound)


def variance_and_uncertainty(
    a: HermitianObservable, b: HermitianObservable, state: DensityState
):
    """Variances of the two observables and the commutator lower bound
    ``var(A) var(B) >= |<[A,B]>|^2 / 4``."""
    a._require_same_dim(b)
    a._require_same_dim(state)

    def variance(obs: HermitianObservable) -> float:
        m1 = state.expectation(obs)
        m2 = float(np.trace(state.matrix @ obs.matrix @ obs.matrix).real)
        return max(m2 - m1 * m1, 0.0)

    comm = a.matrix @ b.matrix - b.matrix @ a.matrix
    bound = 0.25 * abs(complex(np.trace(state.matrix @ comm))) ** 2
    return variance(a), variance(b), bound


# ---------------------------------------------------------------------------
# Laboratory systems
# ---------------------------------------------------------------------------


class LabSystem:
    """Labeled observables and states plus the suitability relation.

    Suitability is explicit data: which states are usable to measure which
    observables.  Every observable needs at least one suitable state and
    vice versa.
    """

    __slots__ = ("observables", "states", "suitability")

    def __init__(
        self,
        observables: Mapping[str, HermitianObservable],
        states: Mapping[str, DensityState],
        suitability: Iterable[Tuple[str, str]],
    ):
        observables = dict(observables)
        states = dict(states)
        pairs = set()
        for state_label, obs_label in suitability:
            if state_label not in states:
                raise KeyError(f"unknown state label {state_label!r}")
            if obs_label not in observables:
                raise KeyError(f"unknown observable label {obs_label!r}")
            pairs.add((state_label, obs_label))
        dims = {obs.dim for obs in observables.values()}
        dims |= {state.dim for state in states.values()}
        if len(dims) > 1:
            raise DimMismatch(f"mixed dimensions {sorted(dims)}")
        used_obs = {obs for _, obs in pairs}
        used_states = {st for st, _ in pairs}
        for label in observables:
            if label not in used_obs:
                raise ValueError(f"observable {label!r} has no suitable state")
        for label in states:
            if label not in used_states:
                raise ValueError(f"state {label!r} has no suitable observable")
        self.observables = observables
        self.states = states
        self.suitability = frozenset(pairs)

    @property
    def dim(self) -> int:
        return next(iter(self.observables.values())).dim

    def expectation(self, state_label: str, obs_label: str) -> float:
        """Declared expectation of a suitable pair, from the system matrices."""
        if (state_label, obs_label) not in self.suitability:
            raise KeyError(f"pair ({state_label!r}, {obs_label!r}) not suitable")
        return self.states[state_label].expectation(self.observables[obs_label])

    def suitable_pairs(self):
        return sorted(self.suitability)

    def __repr__(self) -> str:
        return (
            f"LabSystem({len(self.observables)} observables, "
            f"{len(self.states)} states, dim={self.dim})"
        )
