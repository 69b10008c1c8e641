"""Exception hierarchy shared by all modules."""


class TriadError(Exception):
    pass


class DomainError(TriadError, ValueError):
    """Input outside the region where a formula is defined."""


class SingularityError(DomainError):
    """Input on (or too close to) a coordinate singularity."""


class CollisionError(DomainError):
    pass


class ConfigError(DomainError):
    """Invalid run configuration."""
