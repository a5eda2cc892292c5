"""Exception types shared by all modules.

The CLI maps these onto exit codes: precondition/property failures exit 1,
parse errors exit 2, budget overruns exit 3.
"""


class CubeError(Exception):
    """Base class; ``witness`` carries a JSON-friendly description."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class StructuralError(CubeError):
    """Malformed input data (bad boundary cycle, non-cellular map, ...)."""


class PreconditionError(CubeError):
    """Input is well formed but violates an operation's hypothesis."""


class PropertyViolation(CubeError):
    """A verification step failed; the witness names the counterexample."""


class ResourceError(CubeError):
    """A configured size or orbit budget was exceeded."""


class ParseError(CubeError):
    """Text input could not be parsed."""
