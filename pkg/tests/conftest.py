import pytest


def pytest_addoption(parser):
    parser.addoption("--double-only", action="store_true", default=False,
                     help="skip any test that creates an extended-precision context")


@pytest.fixture(autouse=True)
def _double_only(request, monkeypatch):
    if not request.config.getoption("--double-only"):
        return
    from fourext import _mp

    def refuse(digits):
        pytest.skip("extended precision disabled by --double-only")

    monkeypatch.setattr(_mp, "new_context", refuse)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
