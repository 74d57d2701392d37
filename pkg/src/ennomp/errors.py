"""Exception and warning types raised across the package."""


class ENNError(ValueError):
    """Base class for all validation errors raised by ennomp."""


class DimensionMismatch(ENNError):
    pass


class ZeroColumn(ENNError):
    def __init__(self, index: int):
        super().__init__(f"column {index} has (near) zero norm")
        self.index = index


class BadMagic(ENNError):
    pass


class TruncatedFile(ENNError):
    pass


class DimensionZero(ENNError):
    pass


class DeltaUnset(ENNError):
    pass


class AllExcluded(ENNError):
    pass


class EmptyCandidates(ENNError):
    pass


class NotACandidate(ENNError):
    def __init__(self, index: int):
        super().__init__(f"index {index} is not in the current candidate set")
        self.index = index


class DegenerateAtom(ENNError):
    """The atom lies (numerically) in the span of the already selected atoms."""


class RankDeficientWarning(UserWarning):
    """Fewer significant eigenvalues than requested embedding rows."""
