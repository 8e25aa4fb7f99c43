from importlib.resources import files
from pathlib import Path

import pytest

from umlinst import load_model

FIXTURES = Path(__file__).parent / "fixtures"
BUNDLED = files("umlinst") / "fixtures"


def bundled(name: str) -> str:
    return (BUNDLED / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bank_use() -> str:
    return bundled("bank.use")


@pytest.fixture(scope="session")
def bank_soil() -> str:
    return bundled("bank.soil")


@pytest.fixture(scope="session")
def bank_model(bank_use):
    return load_model(bank_use)


@pytest.fixture(scope="session")
def hotel_model():
    return load_model(bundled("hotel.use"))


@pytest.fixture(scope="session")
def address_book_model():
    return load_model(bundled("address_book.use"))


# acceptance criteria report: one line per criterion in the terminal summary
_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    outcomes = _CRITERIA.setdefault(number, (title, []))[1]
    if report.when == "call" or report.outcome != "passed":
        outcomes.append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        verdict = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
