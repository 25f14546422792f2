"""Exception hierarchy shared by all oplab modules."""


class OplabError(Exception):
    """Base class for all library errors."""


class ModeMismatch(OplabError):
    """Operands use different arithmetic modes (rational vs float)."""


class NotProbability(OplabError):
    """A probability measure was required but the mass is not one."""


class DomainError(OplabError):
    """A function is undefined on a point where it was evaluated."""


class KernelDomainError(OplabError):
    """A Markov kernel is missing a row for a marginal support point."""


class ConditioningOnNull(OplabError):
    """Bayes conditioning on a set of measure zero."""


class CapacityError(OplabError):
    """Product outcome space exceeds the configured size bound."""


class DimMismatch(OplabError):
    """Matrix dimensions of two operands do not agree."""


class OutOfSpectralRange(OplabError):
    """Requested mean value lies outside [min eigenvalue, max eigenvalue]."""


class NotAQuestion(OplabError):
    """Observable is not a projection (spectrum not contained in {0, 1})."""


class NotCommuting(OplabError):
    """Operation requires commuting observables but the commutator is nonzero."""


class NotHermitian(OplabError):
    """Input matrix is too far from Hermitian to symmetrize."""


class PartitionDoesNotCover(OplabError):
    """Partition cells miss part of the support of the measure."""


class ZeroCell(OplabError):
    """Partition cell carries zero mass where positive mass is required."""


class TooShort(OplabError):
    """Frequency trace shorter than the estimator requires."""


class HorizonExceeded(OplabError):
    """Density evaluation requested beyond the declared horizon."""


class NoAbsolutelyContinuousPart(OplabError):
    """Koopman application at a time where the whole mass has escaped."""


class GridMismatch(OplabError):
    """Evolution traces do not share the same time grid."""


class SingularFrame(OplabError):
    """Tomography system is rank deficient or inconsistent."""


class NoRealizableFrame(OplabError):
    """Tomography solution has weights outside the probability simplex."""
