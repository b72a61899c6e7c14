"""Exception hierarchy shared across the pipeline."""


class PalmforgeError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PalmforgeError):
    """Invalid configuration value or malformed config document."""


class DegenerateGeometryError(PalmforgeError):
    """Keypoint geometry cannot produce an invertible transform."""


class LibraryLookupError(PalmforgeError, KeyError):
    """Requested identity or gesture is missing from an edge library."""


class CapacityError(PalmforgeError):
    """Requested identity count exceeds what the plan can supply."""


class RenderProtocolError(PalmforgeError):
    """External renderer failed for one or more requests.

    ``failures`` maps request_id -> human-readable message.
    """

    def __init__(self, failures):
        self.failures = dict(failures)
        ids = ", ".join(sorted(self.failures))
        super().__init__(f"render failed for request(s): {ids}")


class StageError(PalmforgeError):
    """A pipeline stage could not run (missing inputs, bad outputs)."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"{stage}: {message}")
