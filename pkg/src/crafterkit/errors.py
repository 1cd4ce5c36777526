"""Exception types shared across the toolkit."""


class CrafterKitError(Exception):
    """Base class for all toolkit errors."""


class OutOfBounds(CrafterKitError):
    """Grid coordinate outside the 64x64 map."""


class RetryExhausted(CrafterKitError):
    """World generation failed validation on every retry attempt.

    This signals a generator bug, not bad luck: valid maps are common."""


class SteppedTerminal(CrafterKitError):
    """step() called on a state whose episode already ended."""


class IoFailure(CrafterKitError):
    """File could not be written or read."""


class MalformedContainer(CrafterKitError):
    """Episode container failed magic/header/shape validation."""


class EmptyEpisode(CrafterKitError):
    """Operation requires at least one timestep."""


class EmptyInput(CrafterKitError):
    """Operation requires a non-empty input sequence."""


class MismatchedInputs(CrafterKitError):
    """Two dataset inputs do not describe the same episodes."""


class MissingBinding(CrafterKitError):
    """Caption template placeholder without a binding."""


class UnknownCaption(CrafterKitError):
    """Caption text outside the fixed vocabulary."""


class MalformedTable(CrafterKitError):
    """Paraphrase table file failed validation."""


class UnknownTask(CrafterKitError):
    """Task id outside the built-in task set."""


class LengthMismatch(CrafterKitError):
    """Paired vectors of different lengths."""


class NotReset(CrafterKitError):
    """Bridge step/render before the first reset."""


class BenchmarkError(CrafterKitError):
    """Agent or environment failure inside a benchmark run."""
