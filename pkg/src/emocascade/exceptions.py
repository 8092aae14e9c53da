"""Exception hierarchy shared by every module of the package."""


class EmoCascadeError(Exception):
    """Base class for all errors raised by emocascade."""


class InvalidInput(EmoCascadeError, ValueError):
    pass


class DegenerateVector(EmoCascadeError, ValueError):
    pass


class MissingWord(EmoCascadeError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing word"


class DegenerateColumn(EmoCascadeError, ValueError):
    """A column has zero variance; ``column`` names it."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class DegenerateVariance(EmoCascadeError, ValueError):
    pass


class OrphanEvent(EmoCascadeError, ValueError):
    pass


class ClockSkew(EmoCascadeError, ValueError):
    pass


class EmptyCascade(EmoCascadeError, ValueError):
    pass


class Collinear(EmoCascadeError, ValueError):
    """Design matrix is rank deficient; ``columns`` lists the offenders."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = list(columns)


class NoConvergence(EmoCascadeError, RuntimeError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class TooFewGroups(EmoCascadeError, ValueError):
    pass


class ManifestError(EmoCascadeError, ValueError):
    """Pipeline manifest failed validation; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class StageError(EmoCascadeError, RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
