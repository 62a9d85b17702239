"""Exception hierarchy shared by every pqforge module."""


class PQForgeError(Exception):
    """Base class for all pqforge errors."""


class ParameterError(PQForgeError, ValueError):
    """An instance parameter is out of its admissible range."""


class PreconditionError(PQForgeError, ValueError):
    """An operation was called on inputs violating its precondition."""


class EnumerationError(PQForgeError, RuntimeError):
    """A combinatorial enumeration is missing or internally inconsistent."""


class UnionError(PQForgeError, ValueError):
    """Two types were combined although they are not compatible."""
