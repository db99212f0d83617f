"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range where the quantity is defined."""


class PSDViolationError(DomainError):
    """An operator has an eigenvalue below the PSD tolerance."""


class InvalidCoefficientsError(DomainError):
    """Bell-diagonal weights are negative or do not sum to one."""


class ZeroProbabilityError(DomainError):
    """Conditioning on a measurement outcome that has (numerically) zero probability."""


class NonBellDiagonalError(RuntimeError):
    """A state expected to be Bell diagonal carries off-diagonal Bell-basis terms."""


class DegenerateCurveError(RuntimeError):
    """Search bounds requested on a rate curve that is zero at its local maximum."""
