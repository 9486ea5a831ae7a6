"""Exception hierarchy shared by every module of the package."""


class ComputationError(Exception):
    """Base class for numerical failures reported by the library."""


class RankDeficient(ComputationError):
    pass


class RetractionDiverged(ComputationError):
    pass


class NearSingular(ComputationError):
    pass


class BlowUp(ComputationError):
    """The solution left the escape ball before the final time."""


class OutsideDomain(ComputationError):
    """The argument is not in the (surrogate) domain of the operator."""


class NotAdmissible(ComputationError):
    """A degree or index is not defined for the given region."""


class BoundaryZero(NotAdmissible):
    pass


class DegenerateZero(ComputationError):
    pass


class VanishingOnBoundary(ComputationError):
    pass


class AngleResidueTooLarge(ComputationError):
    pass


class NonHyperbolic(ComputationError):
    pass


class IndexMismatch(ComputationError):
    def __init__(self, index: int, degree: int, message: str = ""):
        self.index = index
        self.degree = degree
        super().__init__(message or f"ind(P,U)={index} but deg(-g,U)={degree}")


class ReductionMismatch(ComputationError):
    def __init__(self, index_q: int, degree: int, index_p: int):
        self.index_q = index_q
        self.degree = degree
        self.index_p = index_p
        super().__init__(
            f"ind(Q,W)={index_q}, deg(-g,W_check)={degree}, ind(P,W_check)={index_p}"
        )


class NewtonDiverged(ComputationError):
    pass


class SingularJacobian(ComputationError):
    pass


class ConfigError(Exception):
    """Malformed configuration file or option (CLI exit code 2)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
