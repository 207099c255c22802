"""Exception and warning hierarchy."""


class TransmonStabilityError(Exception):
    """Base class; ``module`` names the subsystem that raised."""

    module = "core"


class SchemaError(TransmonStabilityError, ValueError):
    module = "domain"


class InvariantError(TransmonStabilityError, ValueError):
    module = "domain"


class ConfigError(TransmonStabilityError, ValueError):
    module = "config"


class FitError(TransmonStabilityError, RuntimeError):
    module = "fitters"


class DegenerateFitError(FitError):
    pass


class InsufficientDataError(TransmonStabilityError, ValueError):
    module = "stability"


class AdmissionError(TransmonStabilityError, ValueError):
    module = "stability"


class FitQualityWarning(UserWarning):
    pass


class RegularizationWarning(UserWarning):
    pass


class ValidityWarning(UserWarning):
    pass


class AgingError(TransmonStabilityError, ValueError):
    module = "aging"
