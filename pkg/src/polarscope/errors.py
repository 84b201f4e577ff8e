"""Exception types shared across the toolkit."""


class PolarscopeError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(PolarscopeError):
    """Dump file does not match the configured record schema."""


class ConfigError(PolarscopeError):
    """Invalid run configuration."""


class StatsError(PolarscopeError):
    """Network statistics requested for an empty network."""


class PartitionError(PolarscopeError):
    """Network cannot be bisected (too small or empty)."""


class ConsistencyError(PolarscopeError):
    """Internal self-check failed (e.g. assignment does not cover all nodes)."""


class UndefinedScoreError(PolarscopeError):
    """Polarization score undefined because all block densities are zero."""


class FeatureError(PolarscopeError):
    """Feature requested for an empty dataset."""


class TrainingError(PolarscopeError):
    """Model training preconditions violated."""


class PredictionError(PolarscopeError):
    """Feature row does not conform to the model's schema."""
