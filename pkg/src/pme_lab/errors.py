"""Shared exception types."""


class NumericsError(RuntimeError):
    """A numerical procedure failed (instability, missing root, bad bracket)."""


class CFLViolation(NumericsError):
    pass


class StabilityError(NumericsError):
    """Negative values beyond the clamp tolerance: the explicit step went unstable."""


class BlowUpError(NumericsError):
    """State exceeded the growth guard; the reaction spec cannot be of ignition type."""


class FrontError(NumericsError):
    """Free-boundary extraction failed (extinct state, front thinner than the stencil)."""


class NonMonotoneProfileError(NumericsError):
    """A profile expected to be symmetric decreasing crossed a level more than once."""


class ProfileError(NumericsError):
    """Profile shooting/integration failed (no root, zero crossing, plateau not reached)."""


class RangeError(ValueError):
    """Requested value outside the invertible range of a monotone map."""


class BracketError(NumericsError):
    """Threshold bisection could not seed or maintain a valid bracket."""


class WindowError(ValueError):
    """A fitting window is too short or empty."""


class ValidityError(ValueError):
    """A closed-form comparison object was evaluated outside its validity region."""


class ConfigError(ValueError):
    """Config parsing/validation failure; carries all messages."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
