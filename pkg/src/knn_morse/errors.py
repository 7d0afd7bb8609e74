"""Exception and warning types raised across the package."""


class KnnMorseError(Exception):
    """Base class for all package errors."""


class AffinelyDependent(KnnMorseError, ValueError):
    """A point subset does not span a simplex of full dimension."""


class OutOfAffineHull(KnnMorseError, ValueError):
    """A query point is not in the affine hull of the reference points."""


class KTooLarge(KnnMorseError, ValueError):
    """The neighbor order exceeds the number of points."""


class TooManySubsets(KnnMorseError, ValueError):
    """Exhaustive subset enumeration was refused by its size guard."""


class GeneralPositionViolation(KnnMorseError):
    """A data point lies on a candidate sphere within tolerance.

    ``labels`` holds the support of the offending sphere together with the
    extra on-sphere points.
    """

    def __init__(self, message, labels=()):
        super().__init__(message)
        self.labels = tuple(labels)


class TooLarge(KnnMorseError, ValueError):
    """A simplicial complex exceeds the size accepted by dense reduction."""


class ResolutionTooLow(KnnMorseError, ValueError):
    pass


class UnstableGrid(KnnMorseError):
    """Betti numbers disagree between the two grid resolutions."""

    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)


class DegenerateArrangement(KnnMorseError):
    """The circle arrangement could not be traced into closed boundary cycles."""


class TooIntense(KnnMorseError, ValueError):
    pass


class NotMorseWarning(UserWarning):
    """Two critical values coincide within tolerance."""
