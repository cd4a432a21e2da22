"""Exception types raised by the simulator."""


class ContractViolation(ValueError):
    """Arguments of incompatible shape or out-of-domain values."""


class ConfigError(ValueError):
    """A run configuration violates one of its constraints."""


class NumericalIntegrityError(ArithmeticError):
    """The integration produced values that can no longer be trusted."""


class DegenerateStateError(NumericalIntegrityError):
    """A state vector or density matrix collapsed to (near) zero norm."""
