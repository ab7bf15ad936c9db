"""Exception hierarchy shared across the toolkit.

Every domain failure raises a ``ToolkitError`` subclass so the CLI can map
them to exit code 1 while genuine bugs still surface as ordinary tracebacks.
"""


class ToolkitError(Exception):
    """Base class for all domain errors raised by this package."""


class CorpusError(ToolkitError):
    """Malformed corpus CSV, unknown label, or invalid split request."""


class VectorFileError(ToolkitError):
    """Word-vector file violates the expected text layout."""


class LexsemError(ToolkitError):
    """Invalid similarity query: zero vector, dimension mismatch, unknown token."""


class TrainingError(ToolkitError):
    """Surrogate or forest training received degenerate inputs or diverged."""


class KnowledgeBaseError(ToolkitError):
    """Knowledge-base construction, retrieval, or poisoning failure."""


class PromptError(ToolkitError):
    """Prompt rendering or generated-output parsing failure."""


class VerdictError(ToolkitError):
    """Judge output or verdict CSV violates the rubric contract."""


class PipelineError(ToolkitError):
    """Cross-stage orchestration failure (missing artifact, bad config)."""
