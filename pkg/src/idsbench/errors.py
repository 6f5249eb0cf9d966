"""Exception hierarchy. The CLI maps the three top-level groups to exit codes 1/2/3."""


class IdsBenchError(Exception):
    exit_code = 3


class ConfigError(IdsBenchError, ValueError):
    exit_code = 1


class DataError(IdsBenchError, ValueError):
    exit_code = 2


class ModelError(IdsBenchError):
    exit_code = 3


# ingest
class MissingFile(DataError, FileNotFoundError):
    pass


class MalformedRow(DataError):
    def __init__(self, path, line, expected, got):
        self.path, self.line, self.expected, self.got = path, line, expected, got
        super().__init__(f"{path}:{line}: expected {expected} cells, got {got}")


class UnknownAttackName(DataError):
    pass


class MissingLabel(DataError):
    pass


# preprocess
class UnseenCategory(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class TooFewRows(DataError):
    pass


class SplitUnavailable(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# feature selection
class LengthMismatch(DataError):
    pass


class SizeOutOfRange(ConfigError):
    pass


# models
class EmptyClass(ModelError, ValueError):
    pass


class KTooLarge(ModelError, ValueError):
    pass


class DegenerateCovariance(ModelError):
    pass


class TrainingSetTooLarge(ModelError):
    pass


class NonFiniteLoss(ModelError, FloatingPointError):
    pass


class ConvergenceWarning(UserWarning):
    """Iteration cap hit; the best-so-far solution is returned and flagged."""


class NoConvergence(ConvergenceWarning):
    pass


# metrics
class LabelOutOfRange(DataError):
    pass


class EmptyMatrix(DataError):
    pass


# persistence
class VersionMismatch(DataError):
    pass


class CorruptFile(DataError):
    pass


# reports
class IOFailure(IdsBenchError):
    pass
