"""Exception hierarchy shared by the library and the command line front end."""

from __future__ import annotations


class BmrfError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InputError(BmrfError, ValueError):
    exit_code = 2


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceError(BmrfError, RuntimeError):
    """A work budget (states, tree nodes, path expansions) was exhausted.

    ``partial`` carries whatever was established before giving up, e.g. the
    best path density seen or the tree depth reached.
    """

    exit_code = 3

    def __init__(self, message: str, partial: dict | None = None):
        self.partial = dict(partial or {})
        super().__init__(message)


class DomainError(BmrfError, ValueError):
    exit_code = 4


class PreconditionError(InputError):
    pass


class SemanticError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
