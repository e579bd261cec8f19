"""Exception types shared across the package."""


class ForgeError(Exception):
    """Base class for all package errors."""


class CountMismatch(ForgeError):
    """RLE run lengths do not sum to width * height."""


class EmptyMask(ForgeError):
    """Operation requires a mask with at least one set pixel."""


class DimensionMismatch(ForgeError):
    """Inputs that must share dimensions do not."""


class MixedSources(ForgeError):
    """Candidates from different source images passed to a single-image op."""


class OutOfBounds(ForgeError):
    """Prompt coordinates fall outside the image."""


class InvalidRange(ForgeError):
    """Schedule or threshold parameters outside their valid domain."""


class ShapeMismatch(ForgeError):
    """Tensors that must share a shape do not."""


class DenoiserFailure(ForgeError):
    """The external denoiser raised during sampling."""


class NonFiniteValue(ForgeError):
    """A NaN or infinity appeared where finite values are required."""


class ServiceUnavailable(ForgeError):
    """Gateway endpoint unreachable after bounded retries."""


class MalformedResponse(ForgeError):
    """Gateway response failed schema or value validation."""


class ZeroVector(ForgeError):
    """Cosine similarity is undefined for a zero-norm vector."""


class EmptyInput(ForgeError):
    """Metric requires at least one input row."""


class NumericalFailure(ForgeError):
    """Eigensolve did not converge or produced a genuinely indefinite matrix."""


class CorruptManifest(ForgeError):
    """Manifest line failed to parse; carries the offending line number."""

    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"manifest line {line_number}: {detail}")


class ConfigDrift(ForgeError):
    """Resume attempted with thresholds differing from the original run."""


class UnknownId(ForgeError):
    """Label submitted for an id that is not in the review store."""


class EmptyStore(ForgeError):
    """Export requested before any label was submitted."""


class GatewayDown(ForgeError):
    """Pipeline aborted because the gateway stayed unreachable; run is resumable."""
