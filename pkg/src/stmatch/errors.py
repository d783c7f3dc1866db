"""Exception types shared across the package."""


class StmatchError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(StmatchError, ValueError):
    """Matrix or vector shapes are incompatible with the requested operation."""


class PairingError(DimensionError):
    """The two domains do not form mated pairs (column counts disagree)."""


class NumericError(StmatchError, ValueError):
    """Non-finite input, or a numeric factorization failed."""


class IllPosedError(StmatchError, ValueError):
    """Hyperparameters make the problem ill-posed (e.g. a non-positive regularizer)."""


class EmptyInputError(StmatchError, ValueError):
    """An operation received no data to work on."""


class FeatureSpaceError(StmatchError, ValueError):
    """Feature vectors do not belong to the feature space the model was fitted in."""


class NotEnrolledError(StmatchError, LookupError):
    """The queried identity is not present in the ranked list / gallery."""


class ManifestError(StmatchError, ValueError):
    """A dataset manifest is malformed or violates its consistency rules."""


class ModelFormatError(StmatchError, ValueError):
    """A model file is corrupt, truncated, or has an unsupported version."""


class ImageFormatError(StmatchError, ValueError):
    """An image file cannot be decoded as 8-bit grayscale."""


class ConfigError(StmatchError, ValueError):
    """A run configuration is invalid."""
