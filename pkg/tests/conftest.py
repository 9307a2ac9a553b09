import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    from catsim.scenarios import SCENARIOS

    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, name in enumerate(SCENARIOS, 1):
        rep = RESULTS.get(name)
        if rep is None:
            continue
        tr.write_line(f"{k}. {name}: {'PASS' if rep.passed else 'FAIL'}")
        for c in rep.checks:
            tr.write_line("     " + c.line())
