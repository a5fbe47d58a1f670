"""Exception hierarchy shared across the package."""


class PrognoteError(Exception):
    """Base class for all package-specific errors."""


class DictionaryError(PrognoteError):
    """Malformed controlled-dictionary content or file."""


class CohortError(PrognoteError):
    """Inconsistent visit records, outcomes, or cohort files."""


class ArtifactError(PrognoteError):
    """Unreadable or version-mismatched binary artifact."""


class ConfigError(PrognoteError):
    """Invalid pipeline configuration."""


class TrainingDivergedError(PrognoteError):
    """Non-finite loss encountered during model training."""


class PipelineError(PrognoteError):
    """Inconsistent inputs detected while orchestrating pipeline steps."""
