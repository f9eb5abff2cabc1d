"""
Exact integer and rational combinatorial primitives: binomials, Stirling numbers
of the second kind, falling factorials and products of them, double factorials
and perfect pairings.
"""
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Any, Iterator, Mapping, Sequence

from gpi_multinomial.common import ExactRational
from gpi_multinomial.config import get_settings
from gpi_multinomial.exceptions import InvalidInputException

_STIRLING_ROWS: list[tuple[int, ...]] = [(1,)]
_STIRLING_LOCK = threading.Lock()


def binomial(n: int, k: int) -> int:
    """
    Binomial coefficient with the vanishing convention outside ``0 <= k <= n``.

    >>> binomial(4, 2)
    6
    >>> binomial(5, 7)
    0
    """
    if n < 0:
        raise InvalidInputException(f"binomial needs n >= 0, got n={n}")
    if k < 0 or k > n:
        return 0
    if n <= get_settings().memo_cap:
        return _binomial_memo(n, k)
    return math.comb(n, k)


@lru_cache(maxsize=None)
def _binomial_memo(n: int, k: int) -> int:
    return math.comb(n, k)


def _stirling_row(k: int) -> tuple[int, ...]:
    rows = _STIRLING_ROWS
    if k < len(rows):
        return rows[k]

    cap = get_settings().memo_cap
    with _STIRLING_LOCK:
        if k < len(rows):
            return rows[k]
        row = rows[-1]
        for n in range(len(rows), k + 1):
            # S2(n, j) = j * S2(n - 1, j) + S2(n - 1, j - 1)
            row = tuple(
                (j * row[j] if j < len(row) else 0) + (row[j - 1] if j > 0 else 0)
                for j in range(n + 1)
            )
            if n <= cap and n == len(rows):
                rows.append(row)
        return row


def stirling2(k: int, j: int) -> int:
    """
    Stirling number of the second kind, the number of partitions of a k-set into
    j nonempty blocks. Zero when ``j < 0`` or ``j > k``.

    >>> stirling2(4, 2)
    7
    >>> stirling2(0, 0)
    1
    """
    if k < 0:
        raise InvalidInputException(f"stirling2 needs k >= 0, got k={k}")
    if j < 0 or j > k:
        return 0
    return _stirling_row(k)[j]


def falling_factorial(x: ExactRational | int, j: int) -> ExactRational:
    """
    x (x - 1) ... (x - j + 1), with the empty product for ``j = 0``.

    >>> falling_factorial(5, 3)
    Fraction(60, 1)
    >>> falling_factorial(Fraction(1, 2), 2)
    Fraction(-1, 4)
    """
    if j < 0:
        raise InvalidInputException(f"falling factorial order must be >= 0, got {j}")
    result = Fraction(1)
    for r in range(j):
        result *= x - r
    return result


def double_factorial(n: int) -> int:
    """
    >>> double_factorial(-1)
    1
    >>> double_factorial(7)
    105
    """
    if n < -1 or n % 2 == 0:
        raise InvalidInputException(
            f"double factorial is defined here for odd n >= -1, got {n}"
        )
    return math.prod(range(n, 0, -2))


def sign(x: ExactRational | int) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class FallingFactorialExpansion:
    """Finite integer combination of falling factorials, keyed by order."""

    coefficients: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        # Zero coefficients are dropped so equal expansions compare equal
        object.__setattr__(
            self,
            "coefficients",
            {
                order: coefficient
                for order, coefficient in sorted(self.coefficients.items())
                if coefficient
            },
        )

    def evaluate(self, x: ExactRational | int) -> ExactRational:
        return sum(
            (
                coefficient * falling_factorial(x, order)
                for order, coefficient in self.coefficients.items()
            ),
            Fraction(0),
        )

    def __mul__(self, other: Any) -> "FallingFactorialExpansion":
        if not isinstance(other, FallingFactorialExpansion):
            return NotImplemented
        product: dict[int, int] = {}
        for order, coefficient in self.coefficients.items():
            for other_order, other_coefficient in other.coefficients.items():
                expansion = falling_product_expand(order, other_order)
                for result_order, weight in expansion.coefficients.items():
                    product[result_order] = (
                        product.get(result_order, 0)
                        + coefficient * other_coefficient * weight
                    )
        return FallingFactorialExpansion(product)


def monomial_to_falling(k: int) -> FallingFactorialExpansion:
    """
    x^k as a combination of falling factorials, with Stirling weights.

    >>> monomial_to_falling(2).coefficients
    {1: 1, 2: 1}
    """
    if k < 0:
        raise InvalidInputException(f"monomial degree must be >= 0, got {k}")
    return FallingFactorialExpansion({j: stirling2(k, j) for j in range(k + 1)})


@lru_cache(maxsize=None)
def falling_product_expand(j: int, jp: int) -> FallingFactorialExpansion:
    """
    x^(j) x^(jp) = sum over l of x^(j + jp - l) C(j, l) C(jp, l) l!

    >>> falling_product_expand(2, 1).coefficients
    {2: 2, 3: 1}
    """
    if j < 0 or jp < 0:
        raise InvalidInputException(
            f"falling factorial orders must be >= 0, got ({j}, {jp})"
        )
    return FallingFactorialExpansion(
        {
            j + jp - ell: binomial(j, ell) * binomial(jp, ell) * math.factorial(ell)
            for ell in range(jp + 1)
        }
    )


def falling_product_expand_many(orders: Sequence[int]) -> FallingFactorialExpansion:
    """Expand a product of falling factorials of one variable, two at a time."""
    return reduce(
        lambda acc, order: acc * FallingFactorialExpansion({order: 1}),
        orders,
        FallingFactorialExpansion({0: 1}),
    )


def perfect_pairings(items: Sequence[Any]) -> Iterator[list[tuple[Any, Any]]]:
    """
    Yield every partition of ``items`` into unordered pairs. Items are treated
    as distinct by position.
    """
    items = list(items)
    if not items:
        yield []
        return
    if len(items) % 2:
        return

    first_item = items.pop(0)
    for i, item in enumerate(items):
        first_pair = (first_item, item)
        for pairing in perfect_pairings(items[:i] + items[i + 1 :]):
            yield [first_pair] + pairing


@lru_cache(maxsize=None)
def deficit_coefficient(m: int, delta: int) -> int:
    """
    Sum of C(2m, k) (-1)^k S2(k, k - delta) over k, i.e. the combined weight of
    every (k, j) pair with k - j = delta. Vanishes for delta < m.

    >>> [deficit_coefficient(2, delta) for delta in range(4)]
    [0, 0, 3, 1]
    """
    if m < 1 or delta < 0:
        raise InvalidInputException(
            f"deficit coefficient needs m >= 1 and delta >= 0, got ({m}, {delta})"
        )
    return sum(
        binomial(2 * m, k) * (-1) ** k * stirling2(k, k - delta)
        for k in range(delta, 2 * m + 1)
    )
