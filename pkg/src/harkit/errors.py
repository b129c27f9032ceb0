"""Exception types shared across the toolkit."""


class HarkitError(Exception):
    """Base class for all toolkit errors."""


class MalformedRow(HarkitError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class NonMonotonicTimestamps(HarkitError):
    pass


class NonFiniteValue(HarkitError):
    def __init__(self, line_no: int, field: str):
        self.line_no = line_no
        self.field = field
        super().__init__(f"line {line_no}: non-finite value in column '{field}'")


class UnknownActivity(HarkitError):
    pass


class UnknownSensor(HarkitError):
    pass


class EmptySignal(HarkitError):
    pass


class SignalTooShort(HarkitError):
    pass


class EmptyTrainingSet(HarkitError):
    pass


class WidthMismatch(HarkitError):
    pass


class LengthMismatch(HarkitError):
    pass


class DimensionMismatch(HarkitError):
    pass


class TooFewInstances(HarkitError):
    pass


class SingleSubject(HarkitError):
    pass


class TooFewUnits(HarkitError):
    pass


class IllConditionedWarning(UserWarning):
    """Regression matrix was rank deficient; coefficients replaced by zeros."""
