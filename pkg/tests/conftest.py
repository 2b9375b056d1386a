import pytest

from saxt import corpus
from saxt.pipeline import load

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def programs():
    """Every positive corpus program, front end already run."""
    out = {}
    for name in corpus.POSITIVE:
        prog = load(corpus.source(name))
        assert prog.ok, prog.errors
        out[name] = prog
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, what = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {what}")
