"""Exception hierarchy. Each error class carries the CLI exit code it maps to."""


class DaaError(Exception):
    exit_code = 1


class ParseError(DaaError, ValueError):
    """A file or stream could not be read as the expected format."""

    exit_code = 1

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class ValidationError(DaaError, ValueError):
    """Inputs parsed but violate a documented invariant or range."""

    exit_code = 2


class CoincidentPointsError(ValidationError):
    def __init__(self, residue: int, pose: int, atom: int):
        super().__init__(
            f"coincident residue/atom positions: residue {residue}, pose {pose}, atom {atom}"
        )
        self.residue = residue
        self.pose = pose
        self.atom = atom


class NonFiniteError(ValidationError):
    def __init__(self, stage: str):
        super().__init__(f"non-finite values in stage '{stage}'")
        self.stage = stage


class GradientCheckFailed(DaaError):
    exit_code = 3


class TrainingDiverged(DaaError):
    exit_code = 4

    def __init__(self, step: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at step {step}")
        self.step = step
        self.loss = loss
