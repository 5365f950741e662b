"""Exception types raised across fraudwood."""


class FraudwoodError(Exception):
    """Base class for all library errors."""


class SchemaError(FraudwoodError, ValueError):
    pass


class MissingColumn(FraudwoodError, ValueError):
    def __init__(self, column):
        super().__init__(f"missing column {column!r}")
        self.column = column


class _CellError(FraudwoodError, ValueError):
    what = "bad cell"

    def __init__(self, row, feature, value=None):
        msg = f"{self.what} at row {row}, feature {feature!r}"
        if value is not None:
            msg += f": {value!r}"
        super().__init__(msg)
        self.row = row
        self.feature = feature
        self.value = value


class UnknownCategory(_CellError):
    what = "unknown category"


class NonNumericCell(_CellError):
    what = "non-numeric or non-finite cell"


class BadLabel(FraudwoodError, ValueError):
    def __init__(self, row, value=None):
        super().__init__(f"label at row {row} must be 0 or 1, got {value!r}")
        self.row = row
        self.value = value


class TooFewRows(FraudwoodError, ValueError):
    pass


class DegenerateInput(FraudwoodError, ValueError):
    pass


class WidthMismatch(FraudwoodError, ValueError):
    def __init__(self, expected, got):
        super().__init__(f"expected width {expected}, got {got}")
        self.expected = expected
        self.got = got


class EmptyNode(FraudwoodError, ValueError):
    pass


class EmptyTrainingSet(FraudwoodError, ValueError):
    pass


class SingleClassTraining(FraudwoodError, ValueError):
    pass


class SingleClassWarning(UserWarning):
    """Training labels hold one class; the model degenerates to a constant."""


class SingleClassEval(FraudwoodError, ValueError):
    pass


class EmptyInput(FraudwoodError, ValueError):
    pass


class IoFailure(FraudwoodError, OSError):
    pass


class VersionMismatch(FraudwoodError):
    pass


class CorruptModel(FraudwoodError):
    pass
