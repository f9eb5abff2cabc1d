from fractions import Fraction
from typing import Callable

import pytest

from gpi_multinomial import combinatorics
from gpi_multinomial.config import get_settings
from gpi_multinomial.multinomial import ProbVector

GPI_ENV_VARS = (
    "GPI_ENUMERATION_BUDGET",
    "GPI_WICK_DEGREE_CAP",
    "GPI_NAIVE_WICK_DEGREE_CAP",
    "GPI_MEMO_CAP",
    "GPI_WORKERS",
    "GPI_LOG_LEVEL",
)


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in GPI_ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def point() -> Callable[..., ProbVector]:
    """Build a ProbVector from "a/b" strings or numbers"""

    def make(*entries) -> ProbVector:
        return ProbVector(tuple(Fraction(entry) for entry in entries))

    return make


@pytest.fixture
def half_quarter(point) -> ProbVector:
    return point("1/2", "1/4")


@pytest.fixture
def quarter_quarter(point) -> ProbVector:
    return point("1/4", "1/4")


@pytest.fixture
def mutated_stirling(monkeypatch):
    """Corrupts S2(4, 2) for the negative-control checks"""
    original = combinatorics.stirling2

    def wrong(k: int, j: int) -> int:
        return 8 if (k, j) == (4, 2) else original(k, j)

    monkeypatch.setattr(combinatorics, "stirling2", wrong)
    combinatorics.deficit_coefficient.cache_clear()
    yield wrong
    combinatorics.deficit_coefficient.cache_clear()
