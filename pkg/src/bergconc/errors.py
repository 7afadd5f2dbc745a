"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific failures."""


class NonConvergentError(ToolkitError):
    """An iterative scheme could not meet its target tolerance."""


class InvalidExponentError(ToolkitError):
    """Endpoint exponent outside the integrable range (must be > -1)."""


class TruncationError(ToolkitError):
    """A series truncation could not reach the requested tail bound."""


class FormMismatchError(ToolkitError):
    """Two algebraically equivalent forms disagreed beyond tolerance.

    By construction this always indicates an implementation bug, never a
    property of the inputs.
    """


class ViolationError(ToolkitError):
    """A proven inequality came out negative (implementation bug)."""


class UnboundedError(ToolkitError):
    """The requested quantity is infinite (e.g. superlevel measure at level <= 0)."""


class RootFailureError(ToolkitError):
    """Root isolation located fewer sign changes than theory guarantees."""
