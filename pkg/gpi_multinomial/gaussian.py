"""
Exact mixed moments of the centered Gaussian limit N_d(0, diag(p) - p p^T).
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, TypeAlias

from gpi_multinomial.combinatorics import double_factorial, perfect_pairings
from gpi_multinomial.common import ExactRational
from gpi_multinomial.config import get_settings
from gpi_multinomial.exceptions import (
    BudgetExceededException,
    DimensionMismatchException,
    InvalidInputException,
)
from gpi_multinomial.multinomial import ProbVector

logger = logging.getLogger(__name__)

MultiplicityVector: TypeAlias = tuple[int, ...]


@dataclass(frozen=True)
class CovMatrix:
    entries: tuple[tuple[ExactRational, ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(Fraction(value) for value in row) for row in self.entries)
        object.__setattr__(self, "entries", entries)
        d = len(entries)
        if d == 0 or any(len(row) != d for row in entries):
            raise DimensionMismatchException("covariance matrix must be square, d >= 1")
        for a in range(d):
            for b in range(a + 1, d):
                if entries[a][b] != entries[b][a]:
                    raise InvalidInputException(
                        f"covariance matrix is not symmetric at ({a}, {b})"
                    )

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: tuple[int, int]) -> ExactRational:
        a, b = index
        return self.entries[a][b]


def covariance_from_p(p: ProbVector) -> CovMatrix:
    """
    diag(p) - p p^T, exactly.

    >>> covariance_from_p(ProbVector((Fraction(1, 2),))).entries
    ((Fraction(1, 4),),)
    """
    return CovMatrix(
        tuple(
            tuple((p_a if a == b else 0) - p_a * p_b for b, p_b in enumerate(p))
            for a, p_a in enumerate(p)
        )
    )


def univariate_even_moment(variance: ExactRational, m: int) -> ExactRational:
    """
    E[Y^(2m)] = (2m - 1)!! variance^m.

    >>> univariate_even_moment(Fraction(3, 16), 2)
    Fraction(27, 256)
    """
    if variance < 0:
        raise InvalidInputException(f"variance must be >= 0, got {variance}")
    if m < 1:
        raise InvalidInputException(f"m must be >= 1, got {m}")
    return double_factorial(2 * m - 1) * Fraction(variance) ** m


def _check_multiplicities(cov: CovMatrix, mult: Sequence[int]) -> int:
    if len(mult) != cov.dimension:
        raise DimensionMismatchException(
            f"multiplicities have {len(mult)} entries, covariance has d={cov.dimension}"
        )
    if any(count < 0 for count in mult):
        raise InvalidInputException(f"multiplicities must be >= 0, got {mult}")
    return sum(mult)


def _wick_recursive(cov: CovMatrix, mult: MultiplicityVector) -> ExactRational:
    d = cov.dimension

    # Memo table lives for a single evaluation
    @lru_cache(maxsize=None)
    def pair_off(remaining: MultiplicityVector) -> ExactRational:
        first = next((a for a, count in enumerate(remaining) if count), None)
        if first is None:
            return Fraction(1)
        rest = list(remaining)
        rest[first] -= 1
        total = Fraction(0)
        for partner in range(first, d):
            if not rest[partner] or not cov[first, partner]:
                continue
            # rest[partner] copies of the partner index are available to pair with
            weight = rest[partner]
            rest[partner] -= 1
            total += weight * cov[first, partner] * pair_off(tuple(rest))
            rest[partner] += 1
        return total

    return pair_off(tuple(mult))


def _wick_naive(cov: CovMatrix, mult: MultiplicityVector) -> ExactRational:
    labels = [a for a, count in enumerate(mult) for _ in range(count)]
    return sum(
        (
            math.prod((cov[a, b] for a, b in pairing), start=Fraction(1))
            for pairing in perfect_pairings(labels)
        ),
        Fraction(0),
    )


def wick_moment(
    cov: CovMatrix,
    mult: Sequence[int],
    naive: bool = False,
    degree_cap: int | None = None,
) -> ExactRational:
    """
    E[prod_a Y_a^mult_a] for Y ~ N(0, cov), summed over perfect pairings.

    The default evaluator pairs the first live index with every live partner and
    recurses on the remaining multiplicity vector, memoised on that vector;
    ``naive`` enumerates the (n - 1)!! pairings explicitly.

    >>> cov = covariance_from_p(ProbVector((Fraction(1, 2), Fraction(1, 4))))
    >>> wick_moment(cov, (2, 2))
    Fraction(5, 64)
    >>> wick_moment(cov, (1, 2))
    Fraction(0, 1)
    """
    mult = tuple(mult)
    degree = _check_multiplicities(cov, mult)
    settings = get_settings()
    if degree_cap is None:
        cap = settings.naive_wick_degree_cap if naive else settings.wick_degree_cap
    else:
        cap = degree_cap
    if degree > cap:
        raise BudgetExceededException(
            f"Wick moment of total degree {degree} exceeds the cap of {cap}"
        )
    if degree % 2:
        return Fraction(0)
    if naive:
        return _wick_naive(cov, mult)
    return _wick_recursive(cov, mult)


def gaussian_gpi_gap(
    p: ProbVector, m: int, degree_cap: int | None = None
) -> ExactRational:
    """
    E[prod Y_i^(2m)] - prod E[Y_i^(2m)] for the multinomial covariance of p.

    >>> gaussian_gpi_gap(ProbVector((Fraction(1, 2), Fraction(1, 4))), 1)
    Fraction(1, 32)
    """
    if m < 1:
        raise InvalidInputException(f"m must be >= 1, got {m}")
    cov = covariance_from_p(p)
    mixed = wick_moment(cov, (2 * m,) * p.d, degree_cap=degree_cap)
    marginals = math.prod(
        (univariate_even_moment(cov[i, i], m) for i in range(p.d)),
        start=Fraction(1),
    )
    logger.debug(f"Gaussian gap m={m}, p={p.render()}: {mixed} - {marginals}")
    return mixed - marginals
