"""The ten acceptance criteria at their stated tolerances, one line each.

The pass/fail table is printed in the terminal summary.
"""
import pytest
from conftest import ACCEPTANCE_LINES

from ddeperiodic.verify import CRITERIA, check_examples, run_check

TIME_LIMIT = 60.0


@pytest.mark.parametrize("name, fn", CRITERIA, ids=[n.split()[0] for n, _ in CRITERIA])
def test_criterion(name, fn):
    result = run_check(name, fn)
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.detail
    assert result.seconds < TIME_LIMIT, f"took {result.seconds:.1f}s"


def test_built_in_examples():
    result = run_check("built-in examples", check_examples)
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.detail
