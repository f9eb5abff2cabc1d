class InvalidInputException(ValueError):
    pass


class DimensionMismatchException(InvalidInputException):
    pass


class BudgetExceededException(Exception):
    pass


class InvariantFailedException(Exception):
    pass
