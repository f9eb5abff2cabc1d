from fractions import Fraction

import pytest
from assertpy import assert_that

from gpi_multinomial import verify
from gpi_multinomial.exceptions import InvariantFailedException
from gpi_multinomial.verify import (
    INVARIANTS,
    VerificationReport,
    equal_p_battery,
    expect,
    verify_all,
)


def test_that_every_invariant_passes_on_a_clean_tree():
    report = verify_all(survey=False)
    assert_that(report.failed).is_empty()
    assert_that(report.passed).is_equal_to(list(INVARIANTS))
    assert_that(report.ok).is_true()


def test_that_a_mutated_stirling_table_fails_by_name(mutated_stirling):
    report = verify_all(survey=False)
    assert_that(report.ok).is_false()
    assert_that(report.failed).contains_key("stirling-table")
    assert_that(report.failed["stirling-table"]).contains("S2(4, 2) = 8")


def test_that_crashing_checks_are_reported_as_failures(monkeypatch):
    def boom():
        raise RuntimeError("kaput")

    monkeypatch.setitem(verify.INVARIANTS, "boom", boom)
    report = verify_all(survey=False)
    assert_that(report.failed).is_equal_to({"boom": "RuntimeError: kaput"})


def test_that_expect_raises_on_false():
    expect(True, "fine")
    with pytest.raises(InvariantFailedException, match="broken"):
        expect(False, "broken")


def test_that_report_counts_runs_and_findings():
    report = VerificationReport(
        passed=["a", "b"],
        failed={"c": "wrong"},
        survey_records=3,
        findings=[{"m": 1}],
    )
    document = report.as_dict()
    assert_that(document).contains_entry(
        {"status": "fail"},
        {"invariants_run": 3},
        {"invariants_passed": 2},
        {"invariants_failed": 1},
        {"findings_logged": 1},
    )


@pytest.mark.slow
@pytest.mark.conjecture_watch
def test_that_the_gaussian_gap_is_nonnegative_across_the_survey():
    report = verify_all(survey=True, seed=2024)
    assert_that(report.survey_records).is_greater_than_or_equal_to(200)
    assert_that(report.conjecture_violations).is_empty()
    assert_that(report.ok).is_true()
    for finding in report.findings:
        assert_that(finding["theorem_sign"]).is_not_equal_to(
            finding["gaussian_sign"]
        )


@pytest.mark.parametrize(
    "d,expected",
    [
        (1, (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))),
        (2, (Fraction(1, 8), Fraction(1, 4), Fraction(1, 3))),
        (3, (Fraction(1, 8), Fraction(1, 4))),
    ],
)
def test_that_equal_p_battery_keeps_points_inside_the_simplex(d, expected):
    assert_that(equal_p_battery(d)).is_equal_to(expected)
