"""Exception types shared across the package."""


class GasPolarError(Exception):
    pass


class InvalidParameter(GasPolarError, ValueError):
    pass


class InvalidInput(GasPolarError, ValueError):
    pass


class ResourceLimit(GasPolarError, RuntimeError):
    pass


class RegisterOverflow(GasPolarError, ValueError):
    """Objective range does not fit the two's-complement value register."""


class ConfigurationError(GasPolarError, ValueError):
    pass
