"""
Exact finite-N multinomial machinery.

The central moments are computed through the falling-factorial expansion
(binomial formula, Stirling numbers, factorial moments), whose cost does not
depend on N; the pmf-weighted sum over the support is kept as an independent
oracle for small N.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from gpi_multinomial.combinatorics import binomial, falling_factorial, stirling2
from gpi_multinomial.common import (
    ExactRational,
    MultiIndex,
    check_budget,
    parse_rationals,
)
from gpi_multinomial.config import resolve_budget
from gpi_multinomial.exceptions import (
    DimensionMismatchException,
    InvalidInputException,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProbVector:
    """
    Point of the simplex, the first d cell probabilities of a multinomial.

    Strict interior by default (every p_i > 0 and a positive remainder);
    ``allow_boundary`` admits zero entries and a zero remainder.
    """

    entries: tuple[ExactRational, ...]
    allow_boundary: bool = False

    def __post_init__(self):
        try:
            entries = tuple(Fraction(p) for p in self.entries)
        except (TypeError, ValueError) as ex:
            raise InvalidInputException(
                f"ProbVector entries must be rationals: {ex}"
            ) from None
        object.__setattr__(self, "entries", entries)

        if not entries:
            raise InvalidInputException("ProbVector needs at least one entry")
        total = sum(entries)
        if self.allow_boundary:
            if any(p < 0 for p in entries) or total > 1:
                raise InvalidInputException(
                    f"p={self.render()} is outside the closed simplex"
                )
        elif any(p <= 0 for p in entries) or total >= 1:
            raise InvalidInputException(
                f"p={self.render()} is not in the open simplex"
                " (need every p_i > 0 and sum < 1)"
            )

    @classmethod
    def parse(cls, text: str, allow_boundary: bool = False) -> "ProbVector":
        return cls(parse_rationals(text), allow_boundary=allow_boundary)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def remainder(self) -> ExactRational:
        return 1 - sum(self.entries)

    def permuted(self, order: Sequence[int]) -> "ProbVector":
        return ProbVector(
            tuple(self.entries[i] for i in order), allow_boundary=self.allow_boundary
        )

    def render(self) -> str:
        return ",".join(f"{p.numerator}/{p.denominator}" for p in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ExactRational]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> ExactRational:
        return self.entries[index]


@dataclass(frozen=True)
class MultinomialSpec:
    trials: int
    probs: ProbVector

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidInputException(
                f"number of trials must be >= 1, got {self.trials}"
            )

    @property
    def d(self) -> int:
        return self.probs.d


def _check_index(spec: MultinomialSpec, index: MultiIndex, name: str) -> None:
    if len(index) != spec.d:
        raise DimensionMismatchException(
            f"{name} has {len(index)} entries, expected d={spec.d}"
        )
    if any(value < 0 for value in index):
        raise InvalidInputException(f"{name} entries must be >= 0, got {index}")


def pmf(spec: MultinomialSpec, counts: MultiIndex) -> ExactRational:
    """
    Exact probability of observing ``counts`` in the first d cells.

    >>> spec = MultinomialSpec(2, ProbVector((Fraction(1, 2), Fraction(1, 4))))
    >>> pmf(spec, (1, 1))
    Fraction(1, 4)
    """
    _check_index(spec, counts, "counts")
    total = sum(counts)
    if total > spec.trials:
        return Fraction(0)

    coefficient = math.factorial(spec.trials) // (
        math.factorial(spec.trials - total)
        * math.prod(math.factorial(k) for k in counts)
    )
    probability = Fraction(coefficient) * spec.probs.remainder ** (
        spec.trials - total
    )
    for p, k in zip(spec.probs, counts):
        probability *= p**k
    return probability


def _bounded_tuples(length: int, total: int) -> Iterator[MultiIndex]:
    if length == 0:
        yield ()
        return
    for value in range(total + 1):
        for rest in _bounded_tuples(length - 1, total - value):
            yield (value,) + rest


def support_iter(spec: MultinomialSpec) -> Iterator[MultiIndex]:
    """Every lattice point k >= 0 with sum(k) <= N, once each."""
    return _bounded_tuples(spec.d, spec.trials)


def support_size(spec: MultinomialSpec) -> int:
    return math.comb(spec.trials + spec.d, spec.d)


def brute_force_expectation(
    spec: MultinomialSpec,
    f: Callable[[MultiIndex], ExactRational | int],
    budget: int | None = None,
) -> ExactRational:
    """
    E[f(xi)] as the pmf-weighted sum over the whole support.
    :param spec: the multinomial law
    :param f: exact-valued function of the counts
    :param budget: maximum number of support points; `None` reads the settings
    :returns: the exact expectation
    """
    check_budget(
        support_size(spec),
        resolve_budget(budget),
        f"brute force expectation for N={spec.trials}, d={spec.d}",
    )
    return sum(
        (f(counts) * pmf(spec, counts) for counts in support_iter(spec)),
        Fraction(0),
    )


def factorial_moment(spec: MultinomialSpec, orders: MultiIndex) -> ExactRational:
    """E[xi_1^(j_1) ... xi_d^(j_d)] = N^(sum j) prod p_i^j_i."""
    _check_index(spec, orders, "orders")
    moment = falling_factorial(spec.trials, sum(orders))
    for p, j in zip(spec.probs, orders):
        moment *= p**j
    return moment


def _coordinate_weights(trials: int, p: ExactRational, m: int) -> list[ExactRational]:
    # weights[j] = p^j * sum_k C(2m, k) S2(k, j) (-N p)^(2m - k): the k sum of the
    # binomial/Stirling expansion folded into one coefficient per falling order j
    shift = -trials * p
    return [
        p**j
        * sum(
            (
                binomial(2 * m, k) * stirling2(k, j) * shift ** (2 * m - k)
                for k in range(j, 2 * m + 1)
            ),
            Fraction(0),
        )
        for j in range(2 * m + 1)
    ]


def _convolve(left: Sequence[ExactRational], right: Sequence[ExactRational]) -> list:
    result = [Fraction(0)] * (len(left) + len(right) - 1)
    for a, x in enumerate(left):
        if x:
            for b, y in enumerate(right):
                result[a + b] += x * y
    return result


def _expansion_cost(d: int, m: int) -> int:
    width = 2 * m + 1
    return d * width * width + sum(width * (i * (width - 1) + 1) for i in range(d))


def central_mixed_moment(
    spec: MultinomialSpec, m: int, budget: int | None = None
) -> ExactRational:
    """
    E[prod_i (xi_i - N p_i)^(2m)] through the falling-factorial expansion.

    Given the falling orders j, the sum over k factorises per coordinate, and the
    factorial moment N^(sum j) prod p_i^j_i only couples coordinates through
    sum j; so the d-fold sum is a convolution over that total.
    """
    if m < 1:
        raise InvalidInputException(f"m must be >= 1, got {m}")
    check_budget(
        _expansion_cost(spec.d, m),
        resolve_budget(budget),
        f"central moment expansion for d={spec.d}, m={m}",
    )
    by_total = [Fraction(1)]
    for p in spec.probs:
        by_total = _convolve(by_total, _coordinate_weights(spec.trials, p, m))
    return sum(
        (
            falling_factorial(spec.trials, total) * weight
            for total, weight in enumerate(by_total)
            if weight
        ),
        Fraction(0),
    )


def _univariate(trials: int, p: ExactRational, m: int) -> ExactRational:
    return sum(
        (
            falling_factorial(trials, j) * weight
            for j, weight in enumerate(_coordinate_weights(trials, p, m))
        ),
        Fraction(0),
    )


def central_moment_univariate(
    trials: int, p: ExactRational, m: int
) -> ExactRational:
    """
    E[(xi - N p)^(2m)] for xi ~ Binomial(N, p).

    >>> central_moment_univariate(2, Fraction(1, 2), 1)
    Fraction(1, 2)
    """
    if trials < 1 or m < 1:
        raise InvalidInputException(
            f"need N >= 1 and m >= 1, got N={trials}, m={m}"
        )
    if not 0 < p < 1:
        raise InvalidInputException(f"need 0 < p < 1, got p={p}")
    return _univariate(trials, Fraction(p), m)


def scaled_gap_finite(
    spec: MultinomialSpec, m: int, budget: int | None = None
) -> ExactRational:
    """
    {E[prod (xi_i - N p_i)^(2m)] - prod E[(xi_i - N p_i)^(2m)]} / N^(md), exact.
    """
    mixed = central_mixed_moment(spec, m, budget=budget)
    marginals = math.prod(
        (_univariate(spec.trials, p, m) for p in spec.probs), start=Fraction(1)
    )
    gap = (mixed - marginals) / Fraction(spec.trials) ** (m * spec.d)
    logger.debug(f"scaled finite gap N={spec.trials}, m={m}, p={spec.probs.render()}")
    return gap
