"""Exception hierarchy shared by all innoscore modules."""


class InnoscoreError(Exception):
    """Base class for all errors raised by this package."""


# --- evidence algebra ---------------------------------------------------

class InvalidFrame(InnoscoreError):
    """Frame construction rejected (bad interval count or labels)."""


class EmptyFocal(InnoscoreError):
    """The empty set cannot carry mass or be queried as a focal set."""


class InvalidSet(InnoscoreError):
    """A focal or target set is not a subset of the frame's intervals."""


class NotNormalized(InnoscoreError):
    """Mass assignments do not sum to 1 within tolerance."""


class InvalidAlpha(InnoscoreError):
    """Reliability / discount coefficient outside [0, 1]."""


class FrameMismatch(InnoscoreError):
    """Two mass functions live on different frames."""


class TotalConflict(InnoscoreError):
    """Dempster combination undefined: conflict coefficient K = 1.

    ``step`` is the 1-based fold position for group combination, or None
    for a direct pairwise combination.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class EmptyGroup(InnoscoreError):
    """Group combination called with no sources."""


# --- innovation metrics -------------------------------------------------

class MarkerNotFound(InnoscoreError):
    """Marker baseline missing or zero (R0 < 1 or F0 <= 0)."""


class EmptyBatch(InnoscoreError):
    """A measurement batch or contribution list has no entries."""


class DegenerateSeries(InnoscoreError):
    """Trend fitting needs >= 2 distinct period indices."""


# --- query genome -------------------------------------------------------

class GenotypeMismatch(InnoscoreError):
    """Genetic operator applied to genotypes of different lengths."""


class TooLarge(InnoscoreError):
    """Exhaustive enumeration refused for vocabularies over 16 terms."""


class SourceError(InnoscoreError):
    """A search source failed while executing a query."""


# --- sources ------------------------------------------------------------

class DuplicateDocument(InnoscoreError):
    """Two corpus documents share an id."""


class EmptyCorpus(InnoscoreError):
    """Index construction over zero documents."""


class InvalidSpec(InnoscoreError):
    """Synthetic source specification rejected."""


# --- cli ----------------------------------------------------------------

class ConfigError(InnoscoreError):
    """Run configuration missing, unreadable, or inconsistent."""
