"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or catalog reference.

    Carries a list of messages so callers can report every problem at once.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class NumericalFailure(RuntimeError):
    """A path-wise solve could not be completed (overflow, divergence)."""


class StabilityError(NumericalFailure):
    """Explicit transport term violates the time-step restriction."""


class NewtonError(NumericalFailure):
    """Semismooth Newton did not converge within the iteration cap."""
