"""Exception types.

``ValidationError`` covers bad inputs (files, labels, arguments); the CLI maps
it to exit code 1. Everything else derived from ``MemeAffectError`` is a
runtime failure (exit code 2).
"""


class MemeAffectError(Exception):
    pass


class ValidationError(MemeAffectError, ValueError):
    pass


# corpus
class MissingColumn(ValidationError):
    pass


class UnknownLabel(ValidationError):
    def __init__(self, row: int, category: str, value: str):
        self.row = row
        self.category = category
        self.value = value
        super().__init__(f"row {row}: unknown {category} label {value!r}")


class DuplicateId(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class SchemaMismatch(ValidationError):
    pass


class RatioSumInvalid(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


class LevelTooSmall(UserWarning):
    """A level has fewer samples than non-empty splits; its samples go to train."""


# text / features
class LengthMismatch(ValidationError):
    pass


class EmptyCorpus(ValidationError):
    pass


class EmptyImage(ValidationError):
    pass


class DomainError(ValidationError):
    pass


# rebalance
class MissingClass(ValidationError):
    pass


class ClassTooSmall(ValidationError):
    pass


class BadK(ValidationError):
    pass


# classifier
class ShapeMismatch(ValidationError):
    pass


class NonFiniteInput(ValidationError):
    pass


class SingleClass(ValidationError):
    pass


class NonFiniteLoss(MemeAffectError, ArithmeticError):
    pass


# evaluation
class EmptyMatrix(ValidationError):
    pass


class MissingScore(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass
