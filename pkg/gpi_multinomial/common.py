import re
from fractions import Fraction
from typing import Sequence, TypeAlias

from gpi_multinomial.exceptions import BudgetExceededException, InvalidInputException

ExactRational: TypeAlias = Fraction
MultiIndex: TypeAlias = tuple[int, ...]


def split_list(values: str) -> Sequence[str]:
    """
    Split a string around whitespace, commas, or a combination thereof.

    Raises
    ------
    InvalidInputException: if nothing but separators is given

    Examples
    --------
    >>> split_list("1/2,1/4")
    ('1/2', '1/4')
    >>> split_list("32, 64  128")
    ('32', '64', '128')
    >>> split_list(" , ")
    Traceback (most recent call last):
        ...
    gpi_multinomial.exceptions.InvalidInputException: empty list
    """
    if not (result := tuple(filter(None, re.split(r"\s*,\s*|\s+", values.strip())))):
        raise InvalidInputException("empty list")

    return result


def parse_rationals(values: str) -> tuple[Fraction, ...]:
    """
    Parse a list such as ``"1/2,1/4"`` or ``"0.5 0.25"`` into exact rationals.
    Decimal strings are read exactly, never through a float.

    >>> parse_rationals("1/2, 0.25")
    (Fraction(1, 2), Fraction(1, 4))
    """
    try:
        return tuple(Fraction(value) for value in split_list(values))
    except (ValueError, ZeroDivisionError) as ex:
        raise InvalidInputException(
            f"Could not parse rationals from {values!r}: {ex}"
        ) from None


def parse_ints(values: str) -> tuple[int, ...]:
    try:
        return tuple(int(value) for value in split_list(values))
    except ValueError as ex:
        raise InvalidInputException(
            f"Could not parse integers from {values!r}: {ex}"
        ) from None


def render_rational(value: Fraction) -> str:
    """
    >>> render_rational(Fraction(-3, 6))
    '-1/2'
    >>> render_rational(Fraction(4))
    '4/1'
    """
    return f"{value.numerator}/{value.denominator}"


def render_float(value: Fraction) -> str:
    # 17 significant digits round-trips an IEEE double
    return format(float(value), ".17g")


def check_budget(cost: int, budget: int, what: str) -> None:
    if cost > budget:
        raise BudgetExceededException(
            f"{what} needs {cost} evaluated terms, budget is {budget}"
        )
