"""Exception hierarchy shared by all modules."""


class TalbotError(Exception):
    """Base class for every error raised by the package."""


class UnderResolved(TalbotError):
    pass


class IncommensurateGrid(TalbotError):
    pass


class TruncationInadequate(TalbotError):
    """Fourier coefficients have not decayed at the truncation edge."""


class GridMismatch(TalbotError):
    pass


class SeedNotSolution(TalbotError):
    pass


class SeedVanishes(TalbotError):
    pass


class NotDefective(TalbotError):
    pass


class TruncationTooSmall(TalbotError):
    pass


class ComplexSpectrum(TalbotError):
    pass


class WidthTooLarge(TalbotError):
    pass


class TiltConditionsViolated(TalbotError):
    pass


class BlockMismatch(TalbotError):
    pass


class StepNotConverged(TalbotError):
    pass


class NotSecular(TalbotError):
    pass


class NormNotConserved(TalbotError):
    pass


class BandwidthExceeded(TalbotError):
    pass


class ScenarioInvalid(TalbotError):
    """Scenario or commensurability data fails validation."""
