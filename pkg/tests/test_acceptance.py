"""Verification gate: every numbered criterion must pass at its frozen
tolerance.  Run with -v to get one line per criterion."""

import pytest

from cascadesim.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("name", sorted(CRITERIA))
def test_criterion(name):
    result = run_criterion(name)
    for check in result.checks:
        direction = ">" if check.larger_is_better else "<"
        status = "PASS" if check.passed else "FAIL"
        print(f"{result.name} {status}: {check.label} = {check.measured:.3g} "
              f"(required {direction} {check.tolerance:g}) [{result.seconds:.1f}s]")
    assert result.passed, (
        f"{result.name} failed: "
        + "; ".join(f"{c.label}={c.measured:.3g} vs tolerance {c.tolerance:g}"
                    for c in result.checks if not c.passed)
    )
