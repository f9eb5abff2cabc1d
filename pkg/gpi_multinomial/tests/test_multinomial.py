import math
from fractions import Fraction
from itertools import product

import pytest
from assertpy import assert_that

from gpi_multinomial.combinatorics import falling_factorial
from gpi_multinomial.exceptions import (
    BudgetExceededException,
    DimensionMismatchException,
    InvalidInputException,
)
from gpi_multinomial.multinomial import (
    MultinomialSpec,
    ProbVector,
    brute_force_expectation,
    central_mixed_moment,
    central_moment_univariate,
    factorial_moment,
    pmf,
    scaled_gap_finite,
    support_iter,
    support_size,
)

ORACLE_POINTS = [
    ("1/2", "1/4", "1/8"),
    ("1/3", "1/3", "1/4"),
    ("1/10", "3/10", "1/2"),
    ("2/7", "1/5", "1/9"),
    ("1/100", "97/200", "1/4"),
]


class TestProbVector:
    def test_that_entries_are_coerced_to_fractions(self):
        p = ProbVector(("1/2", 0.25))
        assert_that(p.entries).is_equal_to((Fraction(1, 2), Fraction(1, 4)))
        assert_that(p.d).is_equal_to(2)
        assert_that(p.remainder).is_equal_to(Fraction(1, 4))

    def test_that_parse_reads_decimals_exactly(self):
        p = ProbVector.parse("0.1, 0.2")
        assert_that(p.entries).is_equal_to((Fraction(1, 10), Fraction(1, 5)))
        assert_that(p.render()).is_equal_to("1/10,1/5")

    @pytest.mark.parametrize(
        "entries",
        [(), ("1/2", "1/2"), ("0", "1/2"), ("-1/4", "1/2"), ("3/4", "1/2")],
    )
    def test_that_points_outside_the_open_simplex_are_rejected(self, entries):
        with pytest.raises(InvalidInputException):
            ProbVector(tuple(Fraction(e) for e in entries))

    def test_that_boundary_points_are_admitted_on_request(self):
        p = ProbVector((Fraction(0), Fraction(1)), allow_boundary=True)
        assert_that(p.remainder).is_zero()
        with pytest.raises(InvalidInputException):
            ProbVector((Fraction(3, 4), Fraction(1, 2)), allow_boundary=True)

    def test_that_garbage_entries_are_rejected(self):
        with pytest.raises(InvalidInputException):
            ProbVector(("half",))

    def test_that_permuted_reorders_entries(self, point):
        p = point("1/2", "1/4", "1/8")
        assert_that(p.permuted((2, 0, 1)).render()).is_equal_to("1/8,1/2,1/4")


def test_that_multinomial_spec_needs_a_trial(half_quarter):
    with pytest.raises(InvalidInputException):
        MultinomialSpec(0, half_quarter)


def test_that_pmf_matches_hand_values(half_quarter):
    spec = MultinomialSpec(2, half_quarter)
    assert_that(pmf(spec, (1, 1))).is_equal_to(Fraction(1, 4))
    assert_that(pmf(spec, (0, 0))).is_equal_to(Fraction(1, 16))
    assert_that(pmf(spec, (2, 1))).is_zero()


def test_that_pmf_sums_to_one_over_the_support(point):
    spec = MultinomialSpec(5, point("1/3", "1/5", "1/7"))
    points = list(support_iter(spec))
    assert_that(points).is_length(support_size(spec))
    assert_that(set(points)).is_length(len(points))
    assert_that(sum(pmf(spec, k) for k in points)).is_equal_to(1)


def test_that_pmf_handles_a_zero_remainder():
    spec = MultinomialSpec(3, ProbVector(("1/2", "1/2"), allow_boundary=True))
    assert_that(pmf(spec, (1, 2))).is_equal_to(Fraction(3, 8))
    assert_that(pmf(spec, (1, 1))).is_zero()


def test_that_pmf_rejects_bad_counts(half_quarter):
    spec = MultinomialSpec(2, half_quarter)
    with pytest.raises(DimensionMismatchException):
        pmf(spec, (1,))
    with pytest.raises(InvalidInputException):
        pmf(spec, (-1, 1))


def test_that_brute_force_respects_the_budget(half_quarter):
    spec = MultinomialSpec(10, half_quarter)
    with pytest.raises(BudgetExceededException):
        brute_force_expectation(spec, lambda counts: 1, budget=5)
    assert_that(brute_force_expectation(spec, lambda counts: 1)).is_equal_to(1)


@pytest.mark.parametrize("entries", ORACLE_POINTS)
def test_that_factorial_moments_match_the_brute_force_oracle(entries):
    for trials, d in product(range(1, 5), range(1, 4)):
        spec = MultinomialSpec(trials, ProbVector(entries[:d]))
        for orders in product(range(5), repeat=d):
            if sum(orders) > 4:
                continue
            expected = brute_force_expectation(
                spec,
                lambda counts: math.prod(
                    falling_factorial(c, j) for c, j in zip(counts, orders)
                ),
            )
            assert_that(factorial_moment(spec, orders)).is_equal_to(expected)


@pytest.mark.parametrize("entries", ORACLE_POINTS)
def test_that_central_moments_match_the_brute_force_oracle(entries):
    for trials, d, m in product(range(1, 5), (1, 2, 3), (1, 2)):
        spec = MultinomialSpec(trials, ProbVector(entries[:d]))
        expected = brute_force_expectation(
            spec,
            lambda counts: math.prod(
                (c - trials * p) ** (2 * m) for c, p in zip(counts, spec.probs)
            ),
        )
        assert_that(central_mixed_moment(spec, m)).is_equal_to(expected)


def test_that_univariate_central_moments_match_the_binomial_formulas():
    trials, p = 10, Fraction(1, 3)
    variance = trials * p * (1 - p)
    assert_that(central_moment_univariate(trials, p, 1)).is_equal_to(variance)
    assert_that(central_moment_univariate(trials, p, 2)).is_equal_to(
        variance * (1 + 3 * (trials - 2) * p * (1 - p))
    )
    assert_that(central_moment_univariate(2, Fraction(1, 2), 1)).is_equal_to(
        Fraction(1, 2)
    )


@pytest.mark.parametrize("p", [Fraction(0), Fraction(1), Fraction(3, 2)])
def test_that_univariate_central_moment_needs_an_interior_p(p):
    with pytest.raises(InvalidInputException):
        central_moment_univariate(4, p, 1)


def test_that_central_moment_cost_does_not_grow_with_n(half_quarter):
    spec = MultinomialSpec(10**6, half_quarter)
    moment = central_mixed_moment(spec, 2, budget=10_000)
    assert_that(moment).is_greater_than(0)


def test_that_scaled_gap_matches_the_hand_value(half_quarter):
    spec = MultinomialSpec(2, half_quarter)
    assert_that(scaled_gap_finite(spec, 1)).is_equal_to(Fraction(1, 64))


def test_that_scaled_gap_vanishes_in_one_dimension(point):
    for trials, m in product((1, 7, 50), (1, 2, 3)):
        spec = MultinomialSpec(trials, point("2/5"))
        assert_that(scaled_gap_finite(spec, m)).is_zero()


def test_that_scaled_gap_is_invariant_under_permutation(point):
    p = point("1/2", "1/5", "1/7")
    for m in (1, 2):
        expected = scaled_gap_finite(MultinomialSpec(6, p), m)
        shuffled = scaled_gap_finite(MultinomialSpec(6, p.permuted((2, 0, 1))), m)
        assert_that(shuffled).is_equal_to(expected)


@pytest.mark.parametrize(
    "trials,d,expected",
    [(1, 2, {(0, 0), (1, 0), (0, 1)}), (2, 2, 6), (3, 3, 20)],
)
def test_that_support_sizes_match_binomials(point, trials, d, expected):
    spec = MultinomialSpec(trials, point(*["1/5"] * d))
    points = set(support_iter(spec))
    if isinstance(expected, set):
        assert_that(points).is_equal_to(expected)
    else:
        assert_that(points).is_length(expected)
        assert_that(support_size(spec)).is_equal_to(expected)


def test_that_brute_force_matches_hand_values(half_quarter):
    three = MultinomialSpec(3, half_quarter)
    assert_that(brute_force_expectation(three, lambda k: k[0] * k[1])).is_equal_to(
        Fraction(3, 4)
    )
    two = MultinomialSpec(2, half_quarter)
    assert_that(
        brute_force_expectation(
            two, lambda k: (k[0] - 1) ** 2 * (k[1] - Fraction(1, 2)) ** 2
        )
    ).is_equal_to(Fraction(1, 4))


def test_that_centred_coordinates_have_zero_mean(point):
    spec = MultinomialSpec(4, point("1/3", "1/6"))
    for i, p in enumerate(spec.probs):
        assert_that(
            brute_force_expectation(spec, lambda k: k[i] - spec.trials * p)
        ).is_zero()


def test_that_factorial_moments_match_hand_values(half_quarter):
    spec = MultinomialSpec(3, half_quarter)
    assert_that(factorial_moment(spec, (1, 1))).is_equal_to(Fraction(3, 4))
    assert_that(factorial_moment(spec, (2, 0))).is_equal_to(Fraction(3, 2))
    assert_that(factorial_moment(spec, (0, 0))).is_equal_to(1)
    assert_that(factorial_moment(spec, (3, 1))).is_zero()
    with pytest.raises(DimensionMismatchException):
        factorial_moment(spec, (1,))


@pytest.mark.parametrize(
    "trials,entries,m,expected",
    [
        (3, ("1/2",), 1, Fraction(3, 4)),
        (2, ("1/2", "1/4"), 1, Fraction(1, 4)),
        (1, ("1/2",), 2, Fraction(1, 16)),
    ],
)
def test_that_central_moments_match_hand_values(point, trials, entries, m, expected):
    spec = MultinomialSpec(trials, point(*entries))
    assert_that(central_mixed_moment(spec, m)).is_equal_to(expected)


def test_that_one_dimensional_mixed_moment_is_the_univariate_one():
    for trials, p, m in product((1, 5, 40), (Fraction(1, 7), Fraction(1, 2)), (1, 2, 3)):
        spec = MultinomialSpec(trials, ProbVector((p,)))
        assert_that(central_mixed_moment(spec, m)).is_equal_to(
            central_moment_univariate(trials, p, m)
        )


def test_that_central_moment_respects_the_budget(half_quarter):
    with pytest.raises(BudgetExceededException):
        central_mixed_moment(MultinomialSpec(3, half_quarter), 2, budget=10)
