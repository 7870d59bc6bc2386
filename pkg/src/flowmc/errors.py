"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FlowMCError(Exception):
    """Base class for every error raised by flowmc."""


class InputError(FlowMCError):
    """Malformed input: a file, a formula, or a network description."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NestedFlowError(ParseError):
    """The A operator was used inside another A."""


class NetStructureError(InputError):
    """A net violates a structural invariant (unknown node, bad transit, ...)."""


class ResolutionError(InputError):
    def __init__(self, unknown):
        self.unknown = sorted(unknown)
        super().__init__("unknown atoms: " + ", ".join(self.unknown))


class UnknownTransitionError(FlowMCError):
    pass


class NotEnabledError(FlowMCError):
    pass


class SafenessError(FlowMCError):
    """Firing would put a second token on a place.

    ``place`` is the offending place; ``trace`` (when known) is the firing
    sequence from the initial marking that ends with the offending transition.
    """

    def __init__(self, place: str, transition: str | None = None, trace=None):
        self.place = place
        self.transition = transition
        self.trace = list(trace) if trace is not None else None
        msg = f"net is not safe: place {place!r} would carry two tokens"
        if transition is not None:
            msg += f" after firing {transition!r}"
        if self.trace:
            msg += " (firing sequence: " + " ".join(self.trace) + ")"
        super().__init__(msg)


class BudgetExceeded(FlowMCError):
    """A state, chain or lasso budget was exhausted."""


class UnsupportedError(FlowMCError):
    pass
