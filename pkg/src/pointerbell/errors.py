"""Exception types raised by the simulator."""


class ConfigurationError(ValueError):
    """Invalid experiment or lattice configuration."""


class DimensionError(ValueError):
    """Operands have incompatible or oversized dimensions."""


class HermiticityError(ValueError):
    """An operator expected to be Hermitian is not."""


class InvariantViolation(RuntimeError):
    """A numerical invariant (norm, trace, positivity) failed at runtime."""
