"""Exception types raised across the package."""


class ParameterDomainError(ValueError):
    """A physical or numerical parameter lies outside its admissible domain."""


class DimensionMismatchError(ValueError):
    """Operands live on Hilbert or Liouville spaces of different dimension."""


class NumericalBreakdownError(RuntimeError):
    """A dense linear-algebra kernel failed to converge.

    The ``generator_id`` attribute names the generator being processed so
    batch drivers can report which point of a sweep broke down.
    """

    def __init__(self, message, generator_id=None):
        super().__init__(message if generator_id is None else f"[{generator_id}] {message}")
        self.generator_id = generator_id


class ConfigError(ValueError):
    """Invalid run configuration (syntax, unknown key, missing parameter)."""
