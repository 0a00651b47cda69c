"""Exception hierarchy shared across the package."""


class ChainbeamError(Exception):
    """Base class for all chainbeam errors."""


class DuplicatePassage(ChainbeamError):
    """A passage id was appended to a chain that already contains it.

    Raised instead of silently dropping the extension: a duplicate always
    signals a caller bug, never legal data.
    """


class EmptyCandidateSet(ChainbeamError):
    """Retrieval was asked to run over a question with zero candidates."""


class EmptyCandidate(ChainbeamError):
    """A candidate passage has no tokens in title or body."""


class QuestionTooLong(ChainbeamError):
    """Question tokens alone exceed the sequence assembly budget."""


class EmptyInput(ChainbeamError):
    """An operation that needs at least one value received none."""


class ScorerUnavailable(ChainbeamError):
    """A scorer could not produce scores (remote transport failure or
    protocol violation) after the configured retries."""


class NoLegalExpansion(ChainbeamError):
    """Every candidate passage is already used by every beam hypothesis."""


class TooLarge(ChainbeamError):
    """Exhaustive enumeration guard exceeded (n or k too big)."""


class EmptyChainList(ChainbeamError):
    """Reranking was asked to rank zero chains."""


class MissingGold(ChainbeamError):
    """Supervision requested for an example without gold labels."""


class MissingGoldOrder(MissingGold):
    """Ordered labels requested but the example has no ordered gold chain."""


class EmptyBatch(ChainbeamError):
    """Loss computation over an empty sequence batch."""


class EmptyGold(ChainbeamError):
    """Metric computation against an empty gold set."""


class ChainTooShort(ChainbeamError):
    """The top reranked chain has fewer passages than the metric needs."""


class ParseError(ChainbeamError):
    """A source or canonical file could not be parsed; the message carries
    line/record context."""


class ValidationError(ChainbeamError):
    """An ingested record violates example invariants in strict mode."""


class IncompleteManifest(ChainbeamError):
    """A run manifest does not cover every input question exactly once."""


class UsageError(ChainbeamError):
    """Bad command line or config file."""
