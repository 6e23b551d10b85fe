"""Exception hierarchy.

Data problems derive from :class:`DataError`, configuration problems from
:class:`ConfigError`; the command line maps them to exit codes 1 and 2.
"""


class HypomimiaError(Exception):
    pass


class DataError(HypomimiaError):
    pass


class ConfigError(HypomimiaError, ValueError):
    pass


class InsufficientDataError(DataError, ValueError):
    pass


class InvalidValueError(DataError, ValueError):
    pass


class ShapeError(DataError, ValueError):
    pass


class SchemaError(DataError):
    def __init__(self, column, source=None):
        self.column = column
        where = f" in {source}" if source else ""
        super().__init__(f"missing required column {column!r}{where}")


class RowError(DataError):
    def __init__(self, line, message, source=None):
        self.line = line
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: {message}")


class EmptyRecordingError(DataError):
    pass


class ConflictError(DataError):
    pass


class ReferentialError(DataError):
    pass


class MissingChannelError(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DegenerateLabelError(DataError, ValueError):
    pass


class SeparationError(DataError):
    def __init__(self, message, direction=None):
        self.direction = direction
        super().__init__(message)


class CollinearityError(DataError):
    pass


class ConvergenceWarning(UserWarning):
    pass


class DataWarning(UserWarning):
    pass


class ConvergenceError(DataError):
    pass
