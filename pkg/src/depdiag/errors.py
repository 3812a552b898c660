"""Exception types shared across the toolkit."""


class DepdiagError(Exception):
    """Base class for all domain errors."""


class ParseError(DepdiagError):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class CheckError(DepdiagError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.message = message


class NameResolutionError(CheckError):
    pass


class TypeCheckError(CheckError):
    pass


class ArityError(CheckError):
    pass


class UnknownStatementError(DepdiagError):
    pass


class RuntimeFault(DepdiagError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class BudgetExceeded(DepdiagError):
    pass


class NotExecuted(DepdiagError):
    pass


class MissingOutput(DepdiagError):
    pass


class RecursionUnsupported(DepdiagError):
    pass


class CycleDetected(DepdiagError):
    pass


class NotComposite(DepdiagError):
    pass


class UnknownAtom(DepdiagError):
    pass


class ObservationClash(DepdiagError):
    pass


class AlreadyObserved(DepdiagError):
    pass


class UnknownVariable(DepdiagError):
    pass


class BadPosition(DepdiagError):
    pass


class SessionFinished(DepdiagError):
    pass


class StaleAction(DepdiagError):
    pass


class InvalidAnswer(DepdiagError):
    pass
