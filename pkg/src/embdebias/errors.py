"""Exception and warning types shared across the package.

Errors inherit from :class:`EmbdebiasError` so callers can catch the whole
family with one clause; warnings inherit from :class:`EmbdebiasWarning`.
"""

from __future__ import annotations


class EmbdebiasError(Exception):
    """Base class for all errors raised by this package."""


# --- embedding I/O ---------------------------------------------------------

class MalformedLineError(EmbdebiasError):
    """A line in an embedding file cannot be parsed (bad field count,
    unparseable value, or non-finite value)."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DimensionMismatchError(EmbdebiasError):
    """A vector row does not have the declared/inferred dimension."""


class EmptyFileError(EmbdebiasError):
    """The embedding file contains no vectors."""


class ZeroVectorError(EmbdebiasError):
    """A vector with (numerically) zero norm where a direction is required."""

    def __init__(self, word: str):
        super().__init__(f"zero-norm vector for word {word!r}")
        self.word = word


# --- word-set schema and resolution ----------------------------------------

class SchemaError(EmbdebiasError):
    """A category spec file is missing a field or has the wrong shape."""


class EmptySetError(EmbdebiasError):
    """A word set that must be nonempty is empty."""


class FatalValidationError(EmbdebiasError):
    """A defining set resolved to zero in-vocabulary words."""


# --- subspace construction --------------------------------------------------

class RankDeficientError(EmbdebiasError):
    """No principal component can be extracted (input numerically zero)."""


# --- composition ------------------------------------------------------------

class ShapeMismatchError(EmbdebiasError):
    """Operands do not share the required shape (K or d differ)."""


class ZeroRowError(EmbdebiasError):
    """Summing subspace rows produced a numerically zero row."""


class NotUnitError(EmbdebiasError):
    """A vector required to be unit-norm is not."""


# --- debiasing --------------------------------------------------------------

class FullyContainedError(EmbdebiasError):
    """A vector lies (numerically) inside the bias subspace, so its
    neutralized direction is undefined."""


class EqualizeDegenerateError(EmbdebiasError):
    """An equality-set word whose bias component equals the set mean's bias
    component; its equalized direction is undefined."""

    def __init__(self, word: str):
        super().__init__(f"equalize degenerate for word {word!r}: "
                         "bias component equals the set mean's")
        self.word = word


class RadicandNegativeError(EmbdebiasError):
    """The equalize radicand 1 - ||mu - mu_B||^2 is negative, which signals
    non-normalized input vectors."""


# --- evaluation -------------------------------------------------------------

class LengthMismatchError(EmbdebiasError):
    """Paired samples have different lengths."""


class EmptyAttributeSetError(EmbdebiasError):
    """An attribute set is empty (or resolved to zero words)."""


class NoValidGroupsError(EmbdebiasError):
    """No group has defined rates; equality differences are undefined."""


# --- warnings ---------------------------------------------------------------

class EmbdebiasWarning(UserWarning):
    """Base class for warnings emitted by this package."""


class WordSkippedWarning(EmbdebiasWarning):
    """Words were dropped or left unchanged (duplicates, out-of-vocabulary,
    degenerate cases) instead of aborting a run."""


class RankDeficiencyWarning(EmbdebiasWarning):
    """Fewer principal components than requested were available."""


class DegenerateTieWarning(EmbdebiasWarning):
    """The top two singular values are (relatively) indistinguishable, so the
    returned direction is one of several near-optimal choices."""


class ZeroVarianceWarning(EmbdebiasWarning):
    """Paired differences have zero variance; the t statistic is a sentinel."""
