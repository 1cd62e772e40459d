"""Exception hierarchy shared across the package."""


class BeliefHtnError(Exception):
    """Base class for all package errors."""


class UnknownAttribute(BeliefHtnError):
    """Attribute symbol or arity not declared in the universe."""


class BadArgument(BeliefHtnError):
    """An attribute argument is not a member of its declared group."""


class BadValue(BeliefHtnError):
    """A value is outside the attribute's declared value domain."""


class UniverseMismatch(BeliefHtnError):
    """Two belief states were built from different declaration universes."""


class NotApplicable(BeliefHtnError):
    """Operator applied in a state where its precondition fails."""


class NotRelevant(BeliefHtnError):
    """Method does not unify with the task it was asked to decompose."""


class CycleIntroduced(BeliefHtnError):
    """A decomposition produced a cyclic precedence relation."""


class BadRule(BeliefHtnError):
    """A value-dependent placement rule referenced a non-place value."""


class StaleComm(BeliefHtnError):
    """Communication attempted for an attribute the receiver already agrees on."""


class NoAlignment(BeliefHtnError):
    """Communication search could not remove divergence relevance (never expected)."""


class Unsolvable(BeliefHtnError):
    """No robot strategy covers every emulated human choice."""


class DepthExceeded(BeliefHtnError):
    """Search passed the configured depth bound."""


class DomainSyntaxError(BeliefHtnError):
    """Domain file rejected by the parser, with source position."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownDomain(BeliefHtnError):
    """Requested builtin domain name is not recognized."""


class SpecMismatch(BeliefHtnError):
    """Initial-state generator spec cannot realize the requested counts."""
