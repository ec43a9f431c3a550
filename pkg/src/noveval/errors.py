"""Exception hierarchy shared by all noveval modules.

Every error carries a stable ``slug`` used by the HTTP service to tag error
responses and by the CLI to choose exit codes, so the classes here are part
of the external contract.
"""


class NovevalError(Exception):
    """Base class for all errors raised by this package."""

    slug = "error"


class InvalidArgumentError(NovevalError, ValueError):
    """A caller-supplied argument violates an operation's preconditions."""

    slug = "invalid-argument"


class NotFoundError(NovevalError, LookupError):
    """A named builtin resource (dataset, split) does not exist."""

    slug = "not-found"


class FormatError(NovevalError):
    """A file does not conform to its declared binary or JSON format."""

    slug = "format-error"


class EmbeddingValidationError(NovevalError):
    """A structurally valid embedding file contains invalid data (NaN/Inf,
    duplicate ids, inconsistent sidecar lengths)."""

    slug = "validation-error"


class LabelMismatchError(NovevalError):
    """A sample label is not covered by the split being evaluated."""

    slug = "label-mismatch"


class DatasetMismatchError(InvalidArgumentError):
    """Inputs that must refer to one dataset refer to different ones."""

    slug = "dataset-mismatch"


class UndefinedMetricError(NovevalError):
    """The requested metric is undefined for the given inputs (e.g. a query
    class with no other members)."""

    slug = "undefined-metric"


class StoreIOError(NovevalError, OSError):
    """An underlying filesystem operation failed."""

    slug = "io-error"
