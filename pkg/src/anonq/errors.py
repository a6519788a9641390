"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ScaleError(DomainError):
    """A desk-scale guard was exceeded (problem too large for exact methods)."""


class NotFoundError(RuntimeError):
    """An algorithm could not produce a verified answer."""


class ConstructionError(RuntimeError):
    """An internal consistency assertion failed while building an object."""
