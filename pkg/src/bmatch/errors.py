"""Exception hierarchy shared by every module.

Each exception carries a short ``category`` string which the CLI prints as
the machine-readable error class.
"""

from __future__ import annotations


class BMatchError(Exception):
    category = "error"


class StructuralError(BMatchError, ValueError):
    """Malformed input: wrong dimensions, mismatched acceptance patterns."""

    category = "structural"


class ValidationError(BMatchError, ValueError):
    """Marks that fail tie-freeness or mutual acceptance."""

    category = "validation"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ContractError(BMatchError):
    """An operation was called outside its precondition."""

    category = "contract"


class CyclicInstanceError(ContractError):
    """Raised by operations that require an acyclic instance."""

    category = "cyclic"

    def __init__(self, cycle):
        peers = " ".join(str(p) for p in cycle.peers)
        super().__init__(f"instance has a preference cycle: {peers}")
        self.cycle = cycle


class FormatError(BMatchError, ValueError):
    """A file line could not be parsed."""

    category = "parse"

    def __init__(self, message: str, line: int | None = None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path
