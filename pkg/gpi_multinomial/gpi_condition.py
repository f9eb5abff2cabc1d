"""
The combinatorial GPI condition for multinomial covariances: a Stirling-weighted
sum over constrained pairs of multi-indices (k, j), minus its diagonal product.

Two term sets are supported: ``EQUALITY`` keeps sum(j) = sum(k) - md and
``SLACK`` keeps sum(j) <= sum(k) - md. ``script_literal_gap`` evaluates the
nested-loop form of the slack filter, where every per-coordinate factor runs
over a whole j vector.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping

from gpi_multinomial.combinatorics import binomial, deficit_coefficient, stirling2
from gpi_multinomial.common import ExactRational, MultiIndex, check_budget
from gpi_multinomial.config import resolve_budget
from gpi_multinomial.exceptions import InvalidInputException
from gpi_multinomial.multinomial import ProbVector

logger = logging.getLogger(__name__)

Polynomial = tuple[tuple[MultiIndex, int], ...]


class ConstraintVariant(str, Enum):
    EQUALITY = "equality"
    SLACK = "slack"


@dataclass(frozen=True)
class ConstrainedTerm:
    k: MultiIndex
    j: MultiIndex
    coefficient: ExactRational
    p_exponents: MultiIndex


def _check_shape(d: int, m: int) -> None:
    if d < 1 or m < 1:
        raise InvalidInputException(f"need d >= 1 and m >= 1, got d={d}, m={m}")


def _term(m: int, k: MultiIndex, j: MultiIndex) -> ConstrainedTerm:
    coefficient = math.prod(
        binomial(2 * m, k_i) * stirling2(k_i, j_i) * (-1) ** k_i
        for k_i, j_i in zip(k, j)
    )
    return ConstrainedTerm(
        k=k,
        j=j,
        coefficient=Fraction(coefficient),
        p_exponents=tuple(2 * m - k_i + j_i for k_i, j_i in zip(k, j)),
    )


def _admits(variant: ConstraintVariant, total_k: int, total_j: int, md: int) -> bool:
    if total_k < md:
        return False
    if variant is ConstraintVariant.EQUALITY:
        return total_j == total_k - md
    return total_j <= total_k - md


def _k_vectors(d: int, m: int, partial: MultiIndex = ()) -> Iterator[MultiIndex]:
    if len(partial) == d:
        yield partial
        return
    remaining = d - len(partial) - 1
    floor = m * d - sum(partial) - 2 * m * remaining
    for k_i in range(max(floor, 0), 2 * m + 1):
        yield from _k_vectors(d, m, partial + (k_i,))


def _j_vectors(
    k: MultiIndex, low: int, high: int, partial: MultiIndex = ()
) -> Iterator[MultiIndex]:
    i = len(partial)
    if i == len(k):
        yield partial
        return
    rest = k[i + 1 :]
    rest_min = sum(1 for k_rest in rest if k_rest)
    rest_max = sum(rest)
    so_far = sum(partial)
    # S2(k, 0) vanishes unless k = 0
    choices = range(1, k[i] + 1) if k[i] else range(1)
    for j_i in choices:
        reached = so_far + j_i
        if reached + rest_min > high:
            break
        if reached + rest_max < low:
            continue
        yield from _j_vectors(k, low, high, partial + (j_i,))


def enumerate_constrained_terms(
    d: int, m: int, variant: ConstraintVariant | str, budget: int | None = None
) -> Iterator[ConstrainedTerm]:
    """
    Admissible (k, j) pairs with nonzero Stirling factors, in ascending
    lexicographic order of k and then j.

    k is pruned by the smallest value that can still reach sum(k) >= md, j by
    the window its remaining coordinates can still reach.
    """
    _check_shape(d, m)
    variant = ConstraintVariant(variant)
    check_budget(
        (2 * m + 1) ** d,
        resolve_budget(budget),
        f"constrained enumeration for d={d}, m={m}",
    )
    md = m * d
    for k in _k_vectors(d, m):
        excess = sum(k) - md
        low = excess if variant is ConstraintVariant.EQUALITY else 0
        for j in _j_vectors(k, low, excess):
            yield _term(m, k, j)


def enumerate_constrained_terms_unpruned(
    d: int, m: int, variant: ConstraintVariant | str, budget: int | None = None
) -> Iterator[ConstrainedTerm]:
    """The whole (k, j) box, filtered term by term."""
    _check_shape(d, m)
    variant = ConstraintVariant(variant)
    check_budget(
        (2 * m + 1) ** (2 * d),
        resolve_budget(budget),
        f"unpruned enumeration for d={d}, m={m}",
    )
    for k in product(range(2 * m + 1), repeat=d):
        for j in product(*(range(k_i + 1) for k_i in k)):
            if not _admits(variant, sum(k), sum(j), m * d):
                continue
            if all(stirling2(k_i, j_i) for k_i, j_i in zip(k, j)):
                yield _term(m, k, j)


@lru_cache(maxsize=64)
def _condition_polynomial(
    d: int, m: int, variant: ConstraintVariant, budget: int
) -> Polynomial:
    coefficients: dict[MultiIndex, int] = {}
    count = 0
    for term in enumerate_constrained_terms(d, m, variant, budget=budget):
        coefficients[term.p_exponents] = coefficients.get(term.p_exponents, 0) + int(
            term.coefficient
        )
        count += 1
    logger.debug(
        f"{variant.value} condition for d={d}, m={m}: {count} terms,"
        f" {len(coefficients)} monomials"
    )
    return tuple(
        (exponents, coefficient)
        for exponents, coefficient in sorted(coefficients.items())
        if coefficient
    )


def condition_polynomial(
    d: int, m: int, variant: ConstraintVariant | str, budget: int | None = None
) -> Mapping[MultiIndex, int]:
    """
    The constrained sum as a polynomial in p: exponent vector -> coefficient.
    Independent of p, so it is enumerated once per (d, m, variant).
    """
    return dict(
        _condition_polynomial(d, m, ConstraintVariant(variant), resolve_budget(budget))
    )


def _evaluate(polynomial: Polynomial, p: ProbVector) -> ExactRational:
    if not polynomial:
        return Fraction(0)
    # Work over a common denominator so the sum stays in integers
    denominator = math.lcm(*(p_i.denominator for p_i in p))
    numerators = [p_i.numerator * (denominator // p_i.denominator) for p_i in p]
    top_degree = max(sum(exponents) for exponents, _ in polynomial)
    powers = [
        [a**e for e in range(top_degree + 1)] for a in numerators
    ]
    denominator_powers = [denominator**e for e in range(top_degree + 1)]

    total = 0
    for exponents, coefficient in polynomial:
        monomial = coefficient * denominator_powers[top_degree - sum(exponents)]
        for table, e in zip(powers, exponents):
            monomial *= table[e]
        total += monomial
    return Fraction(total, denominator**top_degree)


def diagonal_product(p: ProbVector, m: int) -> ExactRational:
    """
    prod_i sum_{k=m}^{2m} C(2m, k) S2(k, k - m) (-1)^k p_i^m

    >>> diagonal_product(ProbVector((Fraction(1, 2), Fraction(1, 4))), 1)
    Fraction(1, 8)
    >>> diagonal_product(ProbVector((Fraction(1, 2),)), 2)
    Fraction(3, 4)
    """
    _check_shape(p.d, m)
    factor = deficit_coefficient(m, m)
    return math.prod((factor * p_i**m for p_i in p), start=Fraction(1))


def theorem_gap(
    p: ProbVector,
    m: int,
    variant: ConstraintVariant | str = ConstraintVariant.EQUALITY,
    budget: int | None = None,
) -> ExactRational:
    """Constrained Stirling sum at p minus the diagonal product."""
    polynomial = _condition_polynomial(
        p.d, m, ConstraintVariant(variant), resolve_budget(budget)
    )
    return _evaluate(polynomial, p) - diagonal_product(p, m)


def theorem_gap_by_deficit(
    p: ProbVector,
    m: int,
    variant: ConstraintVariant | str = ConstraintVariant.EQUALITY,
) -> ExactRational:
    """
    The same quantity as `theorem_gap`, grouped on the deficits k_i - j_i.

    A pair (k_i, j_i) carries p_i^(2m - deficit) and the constraint only sees the
    total deficit, so the d-fold sum is the convolution of one deficit
    polynomial per coordinate.
    """
    _check_shape(p.d, m)
    variant = ConstraintVariant(variant)
    by_total = [Fraction(1)]
    for p_i in p:
        weights = [
            deficit_coefficient(m, delta) * p_i ** (2 * m - delta)
            for delta in range(2 * m + 1)
        ]
        convolved = [Fraction(0)] * (len(by_total) + len(weights) - 1)
        for a, x in enumerate(by_total):
            for b, y in enumerate(weights):
                convolved[a + b] += x * y
        by_total = convolved

    md = m * p.d
    if variant is ConstraintVariant.EQUALITY:
        constrained = by_total[md]
    else:
        constrained = sum(by_total[md:], Fraction(0))
    return constrained - diagonal_product(p, m)


def equal_p_sum(d: int, m: int, budget: int | None = None) -> ExactRational:
    """
    Coefficient sum of the equality-constrained terms that are not diagonal,
    i.e. where some coordinate has k_i < m or j_i != k_i - m.
    """
    total = 0
    for term in enumerate_constrained_terms(
        d, m, ConstraintVariant.EQUALITY, budget=budget
    ):
        diagonal = all(
            k_i >= m and j_i == k_i - m for k_i, j_i in zip(term.k, term.j)
        )
        if not diagonal:
            total += int(term.coefficient)
    return Fraction(total)


@lru_cache(maxsize=None)
def _bounded_count(length: int, bound: int, limit: int) -> int:
    # tuples in [0, bound]^length with sum <= limit
    if limit < 0:
        return 0
    if length == 0:
        return 1
    return sum(
        _bounded_count(length - 1, bound, limit - x)
        for x in range(min(bound, limit) + 1)
    )


def script_literal_gap(
    p: ProbVector, m: int, budget: int | None = None
) -> ExactRational:
    """
    The nested-loop form of the slack condition, evaluated literally.

    For each k the construction multiplies, over i, a sum over a whole vector j whose
    entries all range over [0, k_i]; the summand uses j_i and the global filters
    sum(k) >= md and sum(j) <= sum(k) - md. The sibling entries of j only count
    how many vectors pass the filter, so each factor is a single sum over j_i
    weighted by a bounded-composition count.
    """
    _check_shape(p.d, m)
    d = p.d
    check_budget(
        (2 * m + 1) ** d * d * (2 * m + 1),
        resolve_budget(budget),
        f"script construction for d={d}, m={m}",
    )
    total = Fraction(0)
    for k in _k_vectors(d, m):
        excess = sum(k) - m * d
        full = Fraction(1)
        diagonal = Fraction(1)
        for k_i, p_i in zip(k, p):
            weight = binomial(2 * m, k_i) * (-1) ** k_i
            full *= weight * sum(
                (
                    stirling2(k_i, j_i)
                    * p_i ** (2 * m - k_i + j_i)
                    * _bounded_count(d - 1, k_i, excess - j_i)
                    for j_i in range(k_i + 1)
                ),
                Fraction(0),
            )
            if k_i >= m:
                diagonal *= (
                    weight
                    * stirling2(k_i, k_i - m)
                    * p_i**m
                    * _bounded_count(d - 1, k_i, excess - (k_i - m))
                )
            else:
                diagonal = Fraction(0)
        total += full - diagonal
    return total
