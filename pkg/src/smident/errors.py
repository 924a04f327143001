"""Exception types shared across the toolkit."""


class SmidentError(Exception):
    """Base class for all toolkit errors."""


class InvalidRotation(SmidentError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


class NonUnitQuaternion(SmidentError):
    """Quaternion norm deviates from 1 beyond the accepted tolerance."""


class EnvelopeViolation(SmidentError):
    """Generated trajectory exceeds the published motion envelope."""


class ZeroVariance(SmidentError):
    """Signal has zero variance; an SNR-derived sigma is undefined."""


class EmptyIntersection(SmidentError):
    """Time synchronization produced no associated sample pairs."""


class EmptyInput(SmidentError):
    """An operation received an empty series."""


class SolverDiverged(SmidentError):
    """Least-squares cost became non-finite."""


class WrongChannel(SmidentError):
    """Measurement channel does not match the requested sensor model."""


class ModelHasNoReference(SmidentError):
    """Reference-frame determination requested for a model without reference states."""


class CsvFormatError(SmidentError):
    """Malformed CSV input; carries the offending 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
