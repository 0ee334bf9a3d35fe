"""Exception hierarchy shared by every stage."""


class AcousimError(Exception):
    """Base class for all errors raised by acousim."""


class ValidationError(AcousimError, ValueError):
    """Invalid user input. ``path`` names the offending config field when known."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


# scene
class SelfIntersectingPolygon(ValidationError):
    pass


class NonPositiveHeight(ValidationError):
    pass


class RT60OnNonShoebox(ValidationError):
    pass


class AbsorptionOutOfRange(ValidationError):
    pass


class EmptyGrid(AcousimError):
    pass


class SamplingExhausted(AcousimError):
    pass


# propagation
class BandOutOfRange(ValidationError):
    pass


class MixedMaterialsUnsupported(ValidationError):
    pass


class DirectionalTransducerUnsupported(ValidationError):
    pass


class MicAtImagePosition(AcousimError):
    pass


# signal
class AliasedChirp(ValidationError):
    pass


class ZeroPowerSignal(AcousimError):
    pass


class ZeroPowerInterferer(AcousimError):
    pass


class EmptyTemplate(ValidationError):
    pass


class UpsamplingRequested(ValidationError):
    pass


# positioning
class NoPeakFound(AcousimError):
    pass


class DegenerateGeometry(AcousimError):
    pass


# evaluation
class MissingEstimate(AcousimError):
    pass


class EmptyErrorSet(AcousimError):
    pass


class InsufficientDecayRange(AcousimError):
    pass


# pipeline
class ParseError(AcousimError):
    pass


class UnknownKey(ValidationError):
    pass


class UpstreamMissing(AcousimError):
    pass


class MissingFeatures(AcousimError):
    pass


class StageFailure(AcousimError):
    """One or more parallel tasks failed; ``failures`` maps task id to message."""

    def __init__(self, stage, failures):
        self.stage = stage
        self.failures = dict(failures)
        ids = ", ".join(str(k) for k in sorted(self.failures))
        super().__init__(f"stage {stage!r}: {len(self.failures)} task(s) failed ({ids})")
