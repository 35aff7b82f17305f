"""Acceptance suite: one line per criterion, run with ``pytest tests/test_acceptance.py -s``.

Each criterion runs at its stated tolerance; a failing criterion fails its test.
"""

import pytest

from guessing_secrets.acceptance import CRITERIA, SEED


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    report = CRITERIA[number](SEED)
    print(f"\n{'PASS' if report.passed else 'FAIL'} criterion {report.title}")
    if not report.passed:
        print(report.to_text())
    assert report.passed, report.to_text()
