"""Acceptance suite: one scenario per criterion at its stated tolerance.

Each test prints a PASS/FAIL line per criterion (collected in the terminal
summary) and fails if any sub-check fails.
"""
import pytest

from catsim.scenarios import SCENARIOS, resolve_config, run_scenario

RESULTS = {}


def run(name):
    rep = run_scenario(resolve_config({"scenario": name, "seed": 0}))
    RESULTS[name] = rep
    return rep


@pytest.mark.parametrize("name", SCENARIOS)
def test_criterion(name):
    rep = run(name)
    failed = [c.line() for c in rep.checks if not c.passed]
    assert not failed, "\n".join(failed)


if __name__ == "__main__":
    for k, name in enumerate(SCENARIOS, 1):
        rep = run(name)
        print(f"{k}. {name}: {'PASS' if rep.passed else 'FAIL'}")
        for c in rep.checks:
            print("   " + c.line())
