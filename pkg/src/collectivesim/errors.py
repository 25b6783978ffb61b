class ParameterError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class StructuralError(RuntimeError):
    """The input is well-formed but the requested quantity does not exist,
    e.g. vote power that can never reach an active citizen."""
