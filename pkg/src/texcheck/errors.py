"""Exception types shared across the pipeline."""


class TexcheckError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDocument(TexcheckError):
    """Uploaded file is empty or contains no usable text."""


class NoAbstractFound(TexcheckError):
    """TeX source has no abstract environment or abstract heading."""


class UnknownSection(TexcheckError):
    """A section name was requested that the paper does not contain."""


class DimensionMismatch(TexcheckError):
    """Two vectors of different lengths were compared."""


class ZeroVector(TexcheckError):
    """Cosine similarity is undefined for a zero-norm vector."""


class EmptyIndex(TexcheckError):
    """Retrieval was attempted against an index with no vectors."""


class EmbedderUnavailable(TexcheckError):
    """Embedding provider failed after all retries."""


class BankSchemaError(TexcheckError):
    """Question bank file failed validation."""

    def __init__(self, message: str, qid: str | None = None):
        super().__init__(message)
        self.qid = qid


class HumanOnlyQuestion(TexcheckError):
    """Prompt rendering was requested for a question users must answer themselves."""


class ProviderError(TexcheckError):
    """Chat-completion provider failed after all retries."""

    def __init__(self, message: str, status: int | None = None, body: str | None = None):
        super().__init__(message)
        self.status = status
        self.body = body


class ContextOverflow(TexcheckError):
    """Prompt exceeds the configured context budget; nothing was sent."""


class UnparseableResponse(TexcheckError):
    """Model output yielded no JSON object even after the repair re-prompt."""


class UnknownQuestion(TexcheckError):
    """Edit or lookup referenced a qid that does not exist."""


class JobNotInReview(TexcheckError):
    """Edits are only accepted while a job is in the review state."""


class SectionEUnanswered(TexcheckError):
    """Export is blocked until the user answers the AI-assistant section."""
