"""Exception hierarchy shared by every module of the toolkit."""


class SparseTextError(Exception):
    """Base class for all toolkit errors."""


# corpus
class MissingColumn(SparseTextError, KeyError):
    def __init__(self, column, header=None):
        self.column = column
        self.header = header
        super().__init__(f"column {column!r} not found in header {header!r}")

    def __str__(self):
        return self.args[0]


class EmptyCorpus(SparseTextError):
    pass


class MalformedRow(SparseTextError):
    def __init__(self, row_number, expected, got):
        self.row_number = row_number
        self.expected = expected
        self.got = got
        super().__init__(
            f"row {row_number}: expected {expected} fields, got {got}"
        )


class ClassTooSmall(SparseTextError):
    pass


# vectorize
class NoTerms(SparseTextError):
    pass


class UnknownTerm(SparseTextError, KeyError):
    def __str__(self):
        return f"term {self.args[0]!r} is not in the vocabulary"


class DimensionMismatch(SparseTextError, ValueError):
    pass


# classifiers
class DegenerateClass(SparseTextError):
    pass


class SingularScatter(SparseTextError):
    pass


class SingleClass(SparseTextError):
    pass


class NonConvergence(SparseTextError):
    """Raised only when a caller asks for strict convergence."""


class NonConvergenceWarning(UserWarning):
    pass


class EmptyCounts(SparseTextError, ValueError):
    pass


# metrics
class LengthMismatch(SparseTextError, ValueError):
    pass


class IndexOutOfRange(SparseTextError, ValueError):
    pass


class EmptyMatrix(SparseTextError, ValueError):
    pass


# harness / persistence
class SchemaMismatch(SparseTextError):
    pass


class ConfigError(SparseTextError, ValueError):
    pass
