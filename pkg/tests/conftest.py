import os

import pytest

from binstretch import _backend

BACKENDS = ["python"] + (["compiled"] if _backend._kernel is not None else [])
# kept small so the suite never allocates the production-size caches
TEST_CACHE_BITS = int(os.environ.get("BINSTRETCH_TEST_CACHE_BITS", "20"))


def pytest_addoption(parser):
    parser.addoption("--overnight", action="store_true", default=False,
                     help="also run the multi-hour table rows")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--overnight"):
        return
    skip = pytest.mark.skip(reason="overnight row; pass --overnight to run")
    for item in items:
        if "overnight" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


# acceptance criterion -> list of (passed, detail); filled by tests/test_acceptance.py
CRITERIA: dict[int, list[tuple[bool, str]]] = {}


def record(number: int, passed: bool, detail: str) -> None:
    CRITERIA.setdefault(number, []).append((passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        parts = CRITERIA[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {verdict}  {details}")
