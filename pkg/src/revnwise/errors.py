"""Exception hierarchy shared across the package."""


class ValidationError(ValueError):
    """Bad input: a malformed value, config field or file."""


class ClassificationError(ValidationError):
    """A concrete output value could not be mapped to a class."""

    def __init__(self, message, dimension=None):
        if dimension is not None:
            message = f"dimension {dimension}: {message}"
        super().__init__(message)
        self.dimension = dimension


class EnumerationGuardError(ValidationError):
    pass


class InfeasibleTupleError(ValidationError):
    """Some target tuples have no feasible full-row extension."""

    def __init__(self, tuples):
        self.tuples = list(tuples)
        shown = ", ".join(str(t) for t in self.tuples[:10])
        super().__init__(f"{len(self.tuples)} tuple(s) without a feasible extension: {shown}")


class SUTError(RuntimeError):
    """Evaluation of the system under test failed."""

    def __init__(self, message, input=None):
        if input is not None:
            message = f"{message} (input={list(input)!r})"
        super().__init__(message)
        self.input = input


class SubprocessTimeout(SUTError):
    pass


class MalformedFrame(SUTError):
    pass


class ChildExited(SUTError):
    pass


class GuaranteeViolation(RuntimeError):
    """Coverage fell below the success fraction; indicates a bug."""


class PipelineError(RuntimeError):
    def __init__(self, stage, cause, partial=None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial
