"""Exception types shared across the package."""


class CausimError(Exception):
    """Base class for package-specific failures."""


class DataSizeError(CausimError, ValueError):
    """Input has too few rows or elements for the requested operation."""


class DegenerateInputError(CausimError, ValueError):
    """Input is degenerate: single-class labels, zero variance, zero distances."""


class NumericInstabilityError(CausimError, ArithmeticError):
    """A computation produced a non-finite value.

    `variable` and `timestep` locate the failure when it happened inside a
    simulation loop; both are None otherwise.
    """

    def __init__(self, message, variable=None, timestep=None):
        super().__init__(message)
        self.variable = variable
        self.timestep = timestep


class ConvergenceError(CausimError, RuntimeError):
    """An iterative fit hit its iteration cap; carries the best iterate found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PhaseError(CausimError):
    """A model-fitting phase failed; names the phase and keeps the original."""

    def __init__(self, phase, original):
        super().__init__(f"{phase} phase failed: {original}")
        self.phase = phase
        self.original = original


class CsvParseError(CausimError, ValueError):
    """A CSV cell failed to parse; row and column are 1-based."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
