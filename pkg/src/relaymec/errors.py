"""Exception types shared across the package."""


class RelayMecError(Exception):
    """Base class for all package errors."""


class DomainError(RelayMecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnachievableError(RelayMecError, ValueError):
    """A channel service probability cannot be reached at any finite power."""


class InfeasibleError(RelayMecError):
    """No (power, rho) pair satisfies the stability constraints."""


class UnsupportedModelError(RelayMecError, TypeError):
    """A solver was handed a channel model it cannot exploit."""


class ConfigError(RelayMecError, ValueError):
    """An experiment configuration is malformed or violates an invariant."""


class SimulationError(RelayMecError, RuntimeError):
    """A simulation run aborted (memory guard, id-space overflow)."""
