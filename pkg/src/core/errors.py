class PdmError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class ConfigError(PdmError, ValueError):
    """Unknown names, malformed run configs and unparsable expressions."""

    exit_code = 2

    def __init__(self, message: str, position: int | None = None) -> None:
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class DomainError(PdmError, ValueError):
    exit_code = 2


class InputError(PdmError, ValueError):
    exit_code = 2


class AdmissibilityError(PdmError):
    """A catalog entry's mu-window is not covered by the profile's mu-image."""

    exit_code = 3


class VerificationFailure(PdmError):
    """A verification run finished with failing checks; the report is already written."""

    exit_code = 4

    def __init__(self, message: str, failed: int = 0) -> None:
        super().__init__(message)
        self.failed = failed


class NumericError(PdmError, ArithmeticError):
    exit_code = 5

    def __init__(
        self,
        message: str,
        achieved_tolerance: float | None = None,
        eigenvalue_index: int | None = None,
    ) -> None:
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance
        self.eigenvalue_index = eigenvalue_index


class SingularityError(NumericError):
    def __init__(self, message: str, location: float) -> None:
        super().__init__(f"{message} near mu={location:.12g}")
        self.location = location


class NormalizabilityError(NumericError):
    pass


class ParameterError(PdmError, ValueError):
    exit_code = 6


class UnsupportedReductionError(ParameterError):
    pass
