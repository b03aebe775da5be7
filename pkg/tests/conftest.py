import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def dual5():
    from tricolor.harness import _dual

    return _dual(5)


@pytest.fixture(scope="session")
def dual7():
    from tricolor.harness import _dual

    return _dual(7)


# --------------------------------------------------------------------------
# Acceptance summary: tests record one line per criterion, printed at the end
# --------------------------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def record(request):
    """``record(n, ok, detail)`` stores the verdict line of criterion ``n``."""
    store = request.config.stash[_ACCEPTANCE]

    def rec(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}: {detail}"
        store[n] = line
        print(line)

    return rec


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_ACCEPTANCE, {})
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(store):
        terminalreporter.write_line(store[n])
