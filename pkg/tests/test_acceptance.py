"""Acceptance criteria at full-suite sizes; one line per check is printed in the summary."""
import pytest

from polygrowth.acceptance import CRITERIA

SUITE = "full"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    fn, _ = CRITERIA[number]
    results = fn(SUITE)
    for c in results:
        line = c.line()
        print(line)
        acceptance_log.append(line)
    failed = [c.id for c in results if not c.passed]
    assert not failed, f"criterion {number} failed: {', '.join(failed)}"
