"""Exception types shared across the package."""

from __future__ import annotations


class FlatGeoError(Exception):
    """Base class for all package errors."""


class MalformedDocument(FlatGeoError):
    """Surface spec file does not parse or is structurally invalid."""


class GluingNotTranslation(FlatGeoError):
    """An edge pairing is not a pure translation."""


class MultipleSingularities(FlatGeoError):
    """The polygon complex has more than one vertex identification class."""


class NonPositiveSystole(FlatGeoError):
    """Catalogued systole is not a positive length."""


class UnknownSurface(FlatGeoError):
    """builtin_surface() got a name outside the catalogue."""


class OrigamiHasMultipleSingularities(FlatGeoError):
    """Origami permutation data does not yield a single cone point."""


class LimitExceeded(FlatGeoError):
    """Enumeration node or word budget exhausted."""


class BudgetExceeded(FlatGeoError):
    """Band-ordering search space exceeds the configured limit."""


class NotSimple(FlatGeoError):
    """Operation requires a simple arc but got a non-simple one."""


class TooFewPieces(FlatGeoError):
    """Decomposition has too few pieces for the requested construction."""


class NoCatalogue(FlatGeoError):
    """Surface has no registered hyperbolic-group correspondence."""


class EllipticOrParabolic(FlatGeoError):
    """Group word is not a hyperbolic isometry (|trace| <= 2)."""


class NumericallyUnstable(FlatGeoError):
    """A floating-point predicate fell within the guard band of its threshold."""


class ConstructionFailed(FlatGeoError):
    """Radial-profile interpolation could not be built (breakpoints out of order)."""


class InsufficientData(FlatGeoError):
    """Not enough grid points for a regression fit."""


class ComparisonUndecided(FlatGeoError):
    """An exact radical-sum comparison could not be decided soundly."""
