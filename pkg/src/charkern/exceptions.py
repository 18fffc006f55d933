"""Exception hierarchy."""


class CharkernError(Exception):
    """Base class for all library errors."""


class ValidationError(CharkernError, ValueError):
    """An input object violates its invariants (weights, masses, shapes)."""


class DomainError(CharkernError, KeyError):
    """A point label is not part of the space."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SpaceMismatchError(CharkernError, ValueError):
    """Two objects that must live on the same space do not."""


class PSDViolationError(CharkernError, ValueError):
    """A kernel matrix or quadratic form is not positive semidefinite."""


class PreconditionError(CharkernError, ValueError):
    """The requested construction does not exist for this input."""
