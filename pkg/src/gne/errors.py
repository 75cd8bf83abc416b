"""Exception hierarchy shared by the library and the CLI."""


class ValidationError(ValueError):
    """Invalid arguments or inputs (CLI exit code 2)."""


class ModelInvalidError(ValidationError):
    """Parameters for which the requested model is not well defined."""


class CapacityError(RuntimeError):
    """Problem size beyond what an exact method supports (CLI exit code 4)."""


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DecodeError(ValidationError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at bit {position})"
        super().__init__(message)
