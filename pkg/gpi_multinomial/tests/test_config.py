import pytest
from assertpy import assert_that

from gpi_multinomial.config import (
    DEFAULT_ENUMERATION_BUDGET,
    Settings,
    get_settings,
    resolve_budget,
)
from gpi_multinomial.exceptions import InvalidInputException


def test_that_settings_fall_back_to_defaults():
    settings = Settings()
    assert_that(settings.enumeration_budget).is_equal_to(DEFAULT_ENUMERATION_BUDGET)
    assert_that(settings.wick_degree_cap).is_equal_to(24)
    assert_that(settings.naive_wick_degree_cap).is_equal_to(10)
    assert_that(settings.memo_cap).is_equal_to(16)
    assert_that(settings.workers).is_equal_to(1)
    assert_that(settings.log_level).is_equal_to("INFO")


def test_that_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("GPI_ENUMERATION_BUDGET", "1_000")
    monkeypatch.setenv("GPI_WORKERS", "4")
    monkeypatch.setenv("GPI_LOG_LEVEL", "debug")
    settings = Settings()
    assert_that(settings.enumeration_budget).is_equal_to(1000)
    assert_that(settings.workers).is_equal_to(4)
    assert_that(settings.log_level).is_equal_to("DEBUG")


def test_that_get_settings_is_cached_until_cleared(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("GPI_ENUMERATION_BUDGET", "77")
    assert_that(get_settings()).is_same_as(first)
    get_settings.cache_clear()
    assert_that(resolve_budget(None)).is_equal_to(77)
    assert_that(resolve_budget(5)).is_equal_to(5)


@pytest.mark.parametrize(
    "name,value",
    [
        ("GPI_ENUMERATION_BUDGET", "lots"),
        ("GPI_WICK_DEGREE_CAP", "0"),
        ("GPI_WORKERS", "-2"),
        ("GPI_LOG_LEVEL", "chatty"),
    ],
)
def test_that_settings_reject_bad_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(InvalidInputException):
        Settings()
