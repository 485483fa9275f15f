"""Exception hierarchy shared across the engine.

Every error raised by the engine derives from BtgError so callers can
catch engine failures without swallowing programming errors.
"""


class BtgError(Exception):
    """Base class for all engine errors."""


# --- term / signature errors -------------------------------------------------

class SortError(BtgError):
    """Base for well-sortedness violations."""


class UnknownSymbol(SortError):
    pass


class UnknownSort(SortError):
    pass


class ArityMismatch(SortError):
    pass


class SortMismatch(SortError):
    pass


class LiteralNotAdmitted(SortError):
    pass


class NotAQuotation(BtgError):
    pass


class OpenBody(BtgError):
    pass


# --- model / checking errors -------------------------------------------------

class ModelError(BtgError):
    pass


class UnboundVariable(ModelError):
    pass


class UninterpretedSymbol(ModelError):
    pass


class InfiniteCarrier(ModelError):
    """ExhaustiveDomain was asked to sweep a carrier that is not finite."""


class DegreeTooHigh(BtgError):
    """Per-variable degree reached the field size; point tests would be unsound."""


class StrategyError(BtgError):
    """The requested check strategy cannot drive this kind of check."""


# --- transformer errors ------------------------------------------------------

class TransformerError(BtgError):
    pass


class UnknownTransformer(TransformerError):
    pass


class ClassViolation(TransformerError):
    """An argument is not a member of the transformer's declared argument class."""


class FuelExhausted(TransformerError):
    pass


class HostError(TransformerError):
    """A host-implemented transformer failed or produced an ill-formed result."""


class ZeroInput(TransformerError):
    pass


class BadModulus(TransformerError):
    pass


class NegativeExponent(TransformerError):
    pass


class NotPolynomial(TransformerError):
    pass


class BadRule(TransformerError):
    """A rewrite rule violates the rule well-formedness conditions."""


# --- theory graph errors -----------------------------------------------------

class GraphError(BtgError):
    pass


class UnmappedSymbol(GraphError):
    pass


class IncompatibleModels(GraphError):
    pass


class NonTransportable(GraphError):
    pass


class MorphismUnchecked(GraphError):
    pass


class NameClash(GraphError):
    pass


class UncheckedInclusion(GraphError):
    pass


# --- generation errors -------------------------------------------------------

class ShapeMismatch(BtgError):
    pass


class MissingBinding(BtgError):
    pass


class MultiSortedUnsupported(BtgError):
    pass


class GeneratorEmpty(BtgError):
    """A syntactic class has no members under the requested strategy."""


class MeaningError(BtgError):
    """A meaning formula is malformed or mentions something undeclared."""


# --- concrete syntax errors --------------------------------------------------

class TextError(BtgError):
    """Base for theory-file errors; carries a source location."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ParseError(TextError):
    pass


class UnknownReference(TextError):
    pass


class ElabSortError(TextError):
    """Sort error detected while elaborating a theory file."""
