"""Exception hierarchy shared across the package.

Each error class maps onto one process exit code so the CLI can translate
failures without inspecting messages.  Library code raises these directly;
nothing here depends on the rest of the package.
"""


class HexcutError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(HexcutError):
    """Invalid user input: malformed job, bad ids, inconsistent shapes."""

    exit_code = 2


class DegeneracyError(HexcutError):
    """Numeric degeneracy the kernel refuses to silently repair."""

    exit_code = 3

    def __init__(self, message, cell_id=None, detail=None):
        super().__init__(message)
        self.cell_id = cell_id
        self.detail = detail


class OutputError(HexcutError):
    """Filesystem or serialization failure while writing results."""

    exit_code = 4
