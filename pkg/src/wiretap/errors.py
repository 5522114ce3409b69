"""Exception hierarchy shared across the package.

The CLI maps these to exit codes: ConfigError -> 2, DomainError -> 4.
"""


class WiretapError(Exception):
    """Base class for every error raised by :mod:`wiretap`."""


class ConfigError(WiretapError, ValueError):
    """A scenario, ensemble or input description is malformed or infeasible."""


class DimensionError(ConfigError):
    pass


class NotPSDError(ConfigError):
    pass


class PowerBudgetError(ConfigError):
    pass


class DomainError(WiretapError, ValueError):
    """A numeric argument lies outside the domain of the function."""


class InvariantError(WiretapError, ValueError):
    """An input violates a structural invariant (e.g. Hermitian symmetry)."""
