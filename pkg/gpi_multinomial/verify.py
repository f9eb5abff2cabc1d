"""
The cross-check battery behind ``gpi verify``.

Hard invariants are registered with `invariant` and must all hold for the
report to pass. The sign survey and the Gaussian nonnegativity watch are
reported as findings and never fail the run.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Final

from gpi_multinomial import combinatorics, gaussian, gpi_condition, multinomial
from gpi_multinomial.common import render_rational
from gpi_multinomial.exceptions import InvariantFailedException
from gpi_multinomial.multinomial import MultinomialSpec, ProbVector
from gpi_multinomial.sampling import Sampler, cell_generator, sample_simplex
from gpi_multinomial.sweep import SweepConfig, render_csv, run_sweep

logger = logging.getLogger(__name__)

INVARIANTS: dict[str, Callable[[], None]] = {}

# Bell numbers B_0 .. B_8
BELL_NUMBERS: Final = (1, 1, 2, 5, 15, 52, 203, 877, 4140)

ORACLE_POINTS: Final = (
    (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)),
    (Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)),
)
SURVEY_M: Final = (1, 2, 3)
SURVEY_D: Final = (2, 3)
SURVEY_SAMPLES_PER_CELL: Final = 34


def invariant(name: str) -> Callable[[Callable[[], None]], Callable[[], None]]:
    def register(check: Callable[[], None]) -> Callable[[], None]:
        INVARIANTS[name] = check
        return check

    return register


def expect(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantFailedException(message)


@invariant("stirling-table")
def _check_stirling_table() -> None:
    expect(
        combinatorics.stirling2(4, 2) == 7,
        f"S2(4, 2) = {combinatorics.stirling2(4, 2)}, expected 7",
    )
    for n, bell in enumerate(BELL_NUMBERS):
        row_sum = sum(combinatorics.stirling2(n, j) for j in range(n + 1))
        expect(row_sum == bell, f"sum_j S2({n}, j) = {row_sum}, expected {bell}")


@invariant("monomial-to-falling")
def _check_monomial_to_falling() -> None:
    for k, x in product(range(7), range(7)):
        expansion = combinatorics.monomial_to_falling(k)
        expect(expansion.evaluate(x) == x**k, f"x^{k} expansion wrong at x={x}")


@invariant("falling-product-expansion")
def _check_falling_product() -> None:
    for j, jp, x in product(range(5), range(5), range(9)):
        left = combinatorics.falling_factorial(x, j)
        right = combinatorics.falling_factorial(x, jp)
        expected = left * right
        value = combinatorics.falling_product_expand(j, jp).evaluate(x)
        expect(value == expected, f"x^({j}) x^({jp}) expansion wrong at x={x}")
    many = combinatorics.falling_product_expand_many((2, 1, 3))
    for x in range(9):
        expected = math.prod(
            combinatorics.falling_factorial(x, j) for j in (2, 1, 3)
        )
        expect(many.evaluate(x) == expected, f"three-factor expansion wrong at x={x}")


@invariant("deficit-vanishing")
def _check_deficit_vanishing() -> None:
    for m in range(1, 6):
        for delta in range(m):
            value = combinatorics.deficit_coefficient(m, delta)
            expect(value == 0, f"c_{delta}({m}) = {value}, expected 0")


@invariant("factorial-moment-oracle")
def _check_factorial_moments() -> None:
    for entries, trials in product(ORACLE_POINTS, range(1, 5)):
        for d in range(1, 4):
            spec = MultinomialSpec(trials, ProbVector(entries[:d]))
            for orders in product(range(5), repeat=d):
                if sum(orders) > 4:
                    continue
                expected = multinomial.brute_force_expectation(
                    spec,
                    lambda counts: math.prod(
                        combinatorics.falling_factorial(c, j)
                        for c, j in zip(counts, orders)
                    ),
                )
                value = multinomial.factorial_moment(spec, orders)
                expect(
                    value == expected,
                    f"factorial moment {orders} at N={trials}, p={spec.probs.render()}",
                )


@invariant("central-moment-oracle")
def _check_central_moments() -> None:
    for entries, trials, m in product(ORACLE_POINTS, range(1, 5), (1, 2)):
        for d in range(1, 4):
            spec = MultinomialSpec(trials, ProbVector(entries[:d]))
            expected = multinomial.brute_force_expectation(
                spec,
                lambda counts: math.prod(
                    (c - trials * p) ** (2 * m) for c, p in zip(counts, spec.probs)
                ),
            )
            value = multinomial.central_mixed_moment(spec, m)
            expect(
                value == expected,
                f"central moment m={m} at N={trials}, p={spec.probs.render()}",
            )


@invariant("wick-univariate")
def _check_wick_univariate() -> None:
    variance = Fraction(3, 16)
    cov = gaussian.CovMatrix(((variance,),))
    for m in range(1, 7):
        expected = combinatorics.double_factorial(2 * m - 1) * variance**m
        expect(
            gaussian.wick_moment(cov, (2 * m,)) == expected,
            f"univariate Wick moment wrong for m={m}",
        )


@invariant("wick-pairing-count")
def _check_pairing_counts() -> None:
    for r in range(1, 7):
        ones = gaussian.CovMatrix(tuple((1,) * (2 * r) for _ in range(2 * r)))
        expected = combinatorics.double_factorial(2 * r - 1)
        value = gaussian.wick_moment(ones, (1,) * (2 * r))
        expect(value == expected, f"{2 * r} items give {value} pairings")
        if r <= 4:
            naive = gaussian.wick_moment(ones, (1,) * (2 * r), naive=True)
            expect(naive == expected, f"naive pairing count wrong for {2 * r} items")


@invariant("gaussian-golden-values")
def _check_gaussian_golden() -> None:
    for entries, m, expected in (
        ((Fraction(1, 2), Fraction(1, 4)), 1, Fraction(1, 32)),
        ((Fraction(1, 4), Fraction(1, 4)), 2, Fraction(21, 2048)),
    ):
        value = gaussian.gaussian_gpi_gap(ProbVector(entries), m)
        expect(value == expected, f"Gaussian gap m={m} is {value}, expected {expected}")


@invariant("one-dimensional-gaps")
def _check_one_dimensional() -> None:
    p = ProbVector((Fraction(2, 7),))
    for m in range(1, 6):
        expect(gaussian.gaussian_gpi_gap(p, m) == 0, f"d=1 Gaussian gap nonzero, m={m}")
        expect(
            gpi_condition.theorem_gap(p, m) == 0,
            f"d=1 equality-constrained gap nonzero, m={m}",
        )
    for m in range(1, 5):
        expect(
            gpi_condition.script_literal_gap(p, m)
            == gpi_condition.theorem_gap(p, m, gpi_condition.ConstraintVariant.SLACK),
            f"d=1 script construction differs from the slack filter, m={m}",
        )


def equal_p_battery(d: int) -> tuple[Fraction, ...]:
    """Common probabilities at which the equal-p identity is checked."""
    candidates = (Fraction(1, 8), Fraction(1, d + 1), Fraction(1, 4))
    return tuple(sorted({q for q in candidates if d * q < 1}))


@invariant("equal-p-identity")
def _check_equal_p_identity() -> None:
    for d, m in product(range(1, 4), range(1, 4)):
        for q in equal_p_battery(d):
            lhs = gpi_condition.equal_p_sum(d, m) * q ** (m * d)
            expect(
                lhs == gpi_condition.theorem_gap(ProbVector((q,) * d), m),
                f"equal-p identity fails at d={d}, m={m}, p={render_rational(q)}",
            )


@invariant("pruned-enumeration")
def _check_pruning() -> None:
    for d, m, variant in product((1, 2), (1, 2, 3), gpi_condition.ConstraintVariant):
        pruned = {
            (term.k, term.j)
            for term in gpi_condition.enumerate_constrained_terms(d, m, variant)
        }
        unpruned = {
            (term.k, term.j)
            for term in gpi_condition.enumerate_constrained_terms_unpruned(
                d, m, variant
            )
        }
        expect(
            pruned == unpruned,
            f"pruned {variant.value} enumeration differs at d={d}, m={m}",
        )


@invariant("deficit-grouping")
def _check_deficit_grouping() -> None:
    for d, m, variant in product((2, 3), (1, 2, 3), gpi_condition.ConstraintVariant):
        p = ProbVector(ORACLE_POINTS[1][:d])
        expect(
            gpi_condition.theorem_gap(p, m, variant)
            == gpi_condition.theorem_gap_by_deficit(p, m, variant),
            f"{variant.value} gap by deficit differs at d={d}, m={m}",
        )


@invariant("finite-n-golden-value")
def _check_finite_golden() -> None:
    spec = MultinomialSpec(2, ProbVector((Fraction(1, 2), Fraction(1, 4))))
    value = multinomial.scaled_gap_finite(spec, 1)
    expect(value == Fraction(1, 64), f"scaled gap at N=2 is {value}, expected 1/64")


@invariant("simplex-sampling")
def _check_sampling() -> None:
    grid = 12
    for sampler, sample in product((Sampler.UNIFORM, Sampler.DIRICHLET_RAMP), range(20)):
        for d in range(1, 5):
            p = sample_simplex(d, sampler, grid, cell_generator(0, 1, d, sample))
            expect(
                min(p) >= Fraction(1, grid) and p.remainder >= Fraction(1, grid),
                f"{sampler.value} draw {p.render()} leaves the grid interior",
            )


@invariant("sweep-determinism")
def _check_determinism() -> None:
    config = SweepConfig(m_max=2, d_max=2, samples_per_cell=2, workers=1)
    expect(
        render_csv(run_sweep(config)) == render_csv(run_sweep(config)),
        "repeated sweeps disagree",
    )


@dataclass
class VerificationReport:
    passed: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)
    survey_records: int = 0
    findings: list[dict[str, Any]] = field(default_factory=list)
    conjecture_violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict[str, Any]:
        return {
            "status": "pass" if self.ok else "fail",
            "invariants_run": len(self.passed) + len(self.failed),
            "invariants_passed": len(self.passed),
            "invariants_failed": len(self.failed),
            "passed": self.passed,
            "failed": self.failed,
            "survey_records": self.survey_records,
            "findings_logged": len(self.findings),
            "findings": self.findings,
            "conjecture_violations": self.conjecture_violations,
        }


def _finding(record) -> dict[str, Any]:
    return {
        "m": record.m,
        "d": record.d,
        "sample": record.sample,
        "variant": record.variant,
        "p": [render_rational(p) for p in record.p],
        "theorem_sign": record.theorem_sign,
        "gaussian_sign": record.gaussian_sign,
    }


def sign_survey(report: VerificationReport, seed: int = 0) -> None:
    """
    Seeded survey over (m, d) in {1, 2, 3} x {2, 3}: every condition variant
    against the Gaussian gap, with negative Gaussian gaps as conjecture-watch
    violations.
    """
    config = SweepConfig(
        m_max=max(SURVEY_M),
        d_max=max(SURVEY_D),
        samples_per_cell=SURVEY_SAMPLES_PER_CELL,
        seed=seed,
        variants=("equality", "slack", "script"),
        workers=1,
    )
    records = [r for r in run_sweep(config).records if r.d in SURVEY_D]
    report.survey_records = len({(r.m, r.d, r.sample) for r in records})
    report.findings.extend(_finding(r) for r in records if r.is_finding)
    for record in records:
        if record.variant == config.variants[0] and record.gaussian_sign == -1:
            logger.error(
                "CONJECTURE WATCH: negative Gaussian gap"
                f" {record.gaussian_gap} at m={record.m},"
                f" p={','.join(map(render_rational, record.p))}"
            )
            report.conjecture_violations.append(_finding(record))
    logger.info(
        f"Sign survey: {report.survey_records} points,"
        f" {len(report.findings)} disagreements,"
        f" {len(report.conjecture_violations)} negative Gaussian gaps"
    )


def verify_all(survey: bool = True, seed: int = 0) -> VerificationReport:
    report = VerificationReport()
    for name, check in INVARIANTS.items():
        try:
            check()
        except InvariantFailedException as ex:
            logger.error(f"Invariant {name} failed: {ex}")
            report.failed[name] = str(ex)
        except Exception as ex:
            logger.exception(f"Invariant {name} raised")
            report.failed[name] = f"{type(ex).__name__}: {ex}"
        else:
            logger.debug(f"Invariant {name} passed")
            report.passed.append(name)
    if survey:
        sign_survey(report, seed=seed)
    return report
