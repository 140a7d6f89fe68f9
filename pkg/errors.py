"""Exception hierarchy shared by every module; ``cli.run`` maps ``exit_code`` to the process status."""


class ClassInvError(Exception):
    exit_code = 3

    def __init__(self, message: str, **context) -> None:
        super().__init__(message)
        self.context = context

    def to_json(self) -> dict:
        return {
            "type": type(self).__name__,
            "message": str(self),
            "context": {key: str(value) for key, value in self.context.items()},
        }


class DomainError(ClassInvError, ValueError):
    exit_code = 1


class RefusalError(DomainError):
    """Input is valid but outside the desk-scale size bound of the operation."""


class UnsupportedCaseError(DomainError):
    pass


class PrecisionError(ClassInvError, ArithmeticError):
    exit_code = 2


class NotFoundError(PrecisionError):
    pass


class InconclusiveError(PrecisionError):
    pass


class InternalInconsistencyError(ClassInvError, RuntimeError):
    exit_code = 3


class GroupingError(InternalInconsistencyError):
    pass


class DerivationError(InternalInconsistencyError):
    pass


class CheckpointError(InternalInconsistencyError):
    pass


class AssumptionFailure(ClassInvError):
    # reported alongside results, never fatal
    exit_code = 0


class UsageError(ClassInvError):
    exit_code = 64
