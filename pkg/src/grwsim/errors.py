"""Exception taxonomy shared by every module.

All failures raised on purpose derive from GrwSimError so callers can
catch the library in one clause while still telling apart shape bugs,
bad configuration, and physics-level validation failures.
"""


class GrwSimError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GrwSimError):
    """Array shape or grid length does not match what an operation needs."""


class ConfigurationError(GrwSimError):
    """Parameter combination is invalid or violates a stability bound."""


class DomainError(GrwSimError):
    """Evaluation outside a tabulated range, or a degenerate distribution."""


class ValidationError(GrwSimError):
    """A constructed state fails a physical invariant (trace, positivity)."""


class EdgeMassError(GrwSimError):
    """Probability mass reached the edge of the hard-wall grid."""


class TransformFidelityError(GrwSimError):
    """Phase-space transform produced a non-negligible imaginary part."""


class DomainEscapeError(GrwSimError):
    """Liouville characteristics carried significant mass off the grid."""


class JumpDegenerateError(GrwSimError):
    """A localisation jump would leave a numerically null wave function."""


class SnapshotFormatError(GrwSimError):
    """Base class for snapshot file parsing failures."""


class BadMagicError(SnapshotFormatError):
    """File does not start with the snapshot magic bytes."""


class FormatVersionError(SnapshotFormatError):
    """Snapshot was written with an unsupported format version."""


class TruncatedSnapshotError(SnapshotFormatError):
    """Snapshot file ends before the declared payload is complete."""


class ConfigKeyError(ConfigurationError):
    """A run-configuration document has a missing or invalid key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")
