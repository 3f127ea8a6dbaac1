"""Shared exception types."""


class DropPaper(Exception):
    """A manuscript failed a fail-fast check and must leave the dataset.

    Carries the pipeline stage that rejected it and a short reason, both of
    which end up in the dataset manifest.
    """

    def __init__(self, stage: str, reason: str):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason


class ConfigError(Exception):
    """Invalid configuration (bad shapes, unknown mode, missing field)."""


class NumericError(Exception):
    """Training produced a non-finite value; usually the learning rate."""


class SidecarError(Exception):
    """Base class for embedding-sidecar failures."""


class SidecarTransportError(SidecarError):
    """The sidecar endpoint could not be reached or the connection broke."""


class SidecarEncoderError(SidecarError):
    """The sidecar answered, but reported an encoding failure."""
