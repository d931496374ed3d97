"""Exception and warning types shared across the package."""
from __future__ import annotations


class ExmoError(Exception):
    """Base class for all errors raised by this package."""


class ModelSyntaxError(ExmoError):
    """Model document is not well formed (bad JSON or bad schema)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UndeclaredSymbol(ExmoError):
    """A guard, action or expression references an undeclared name."""

    def __init__(self, symbol: str, site: str):
        self.symbol = symbol
        self.site = site
        super().__init__(f"undeclared symbol {symbol!r} at {site}")


class DuplicateId(ExmoError):
    def __init__(self, kind: str, ident: str):
        self.kind = kind
        self.ident = ident
        super().__init__(f"duplicate {kind} id {ident!r}")


class MissingInitialLocation(ExmoError):
    def __init__(self, ident: str):
        self.ident = ident
        super().__init__(f"initial location {ident!r} is not declared")


class StageMismatch(ExmoError):
    """An operation received an explanation model of the wrong stage."""

    def __init__(self, expected: str, got: str):
        self.expected = expected
        self.got = got
        super().__init__(f"expected a {expected} model, got {got}")


class DuplicateSelector(ExmoError):
    def __init__(self, selector: dict):
        self.selector = selector
        super().__init__(f"duplicate annotation selector {selector!r}")


class TimestampRegression(ExmoError):
    def __init__(self, event_t: int, now: int):
        self.event_t = event_t
        self.now = now
        super().__init__(f"event timestamp {event_t} precedes current time {now}")


class ProvenanceMismatch(ExmoError):
    def __init__(self, em_automaton: str, ta_name: str):
        super().__init__(
            f"explanation model was extracted from {em_automaton!r}, "
            f"session automaton is {ta_name!r}"
        )


class NotObserved(ExmoError):
    def __init__(self, observable: str):
        self.observable = observable
        super().__init__(f"observable {observable!r} has no recorded occurrence")


class HiddenForExplainee(ExmoError):
    def __init__(self, observable: str):
        self.observable = observable
        super().__init__(f"observable {observable!r} is hidden for this explainee")


class UnknownNode(ExmoError):
    def __init__(self, selector: str):
        self.selector = selector
        super().__init__(f"no explanation node matches {selector!r}")


class NothingMoreToReveal(ExmoError):
    def __init__(self, selector: str):
        self.selector = selector
        super().__init__(f"nothing more to reveal for {selector!r}")


class NovelSituationFrozen(ExmoError):
    def __init__(self) -> None:
        super().__init__("session belief is frozen after a novel situation")


class TraceFormatError(ExmoError):
    """An event trace is malformed or not replayable."""


class NoObservablesWarning(UserWarning):
    """Extraction found no observables in the automaton."""


class EmptySliceWarning(UserWarning):
    """A slicing step hid every root of the explanation model."""


class SelectorWarning(UserWarning):
    """A purpose/profile selector matched nothing."""
