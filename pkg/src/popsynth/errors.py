"""Exception hierarchy.

Each top-level class maps onto one CLI exit code: validation problems exit 1,
infeasible problems exit 2 and I/O failures exit 3.
"""


class PopSynthError(Exception):
    exit_code = 1


class ValidationError(PopSynthError, ValueError):
    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ShapeError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SpecError(ValidationError):
    pass


class IncompletePopulationError(ValidationError):
    pass


class DegenerateTestError(ValidationError):
    pass


class InfeasibleError(PopSynthError):
    exit_code = 2


class SamplingError(InfeasibleError):
    pass


class OutputError(PopSynthError, OSError):
    exit_code = 3


class InputFileError(ParseError):
    """An input file is missing or unreadable."""

    exit_code = 3
