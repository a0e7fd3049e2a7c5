import json

import pytest

from discflow.checks import GROUPS, SELECTORS, corrupted_basis, run_suite


@pytest.mark.parametrize("selector", sorted(GROUPS))
def test_groups_pass_on_clean_basis(small, selector):
    report = run_suite(selector, small, acceptance=False)
    assert report.passed, [r.line() for r in report.failures()]
    assert all(r.name.startswith(selector + ".") for r in report.results)


def test_informational_results_do_not_gate(small):
    report = run_suite("action", small, acceptance=False)
    info = [r for r in report.results if r.informational]
    assert info and all(r.line().startswith("INFO") for r in info)


def test_corrupted_zero_is_named(small):
    bad = corrupted_basis(small, 2, 3)
    report = run_suite("basis", bad, acceptance=False)
    assert not report.passed
    names = {r.name for r in report.failures()}
    assert {"basis.zero_residual", "basis.orthonormality"} <= names
    flagged = [r for r in report.failures() if r.offenders]
    assert flagged and all((2, 3) in r.offenders for r in flagged)
    blob = json.loads(report.to_json())
    assert blob["selector"] == "basis" and blob["passed"] is False


def test_all_without_acceptance_covers_every_group(small):
    report = run_suite("all", small, acceptance=False)
    prefixes = {r.name.split(".")[0] for r in report.results}
    assert prefixes == set(GROUPS)


def test_unknown_selector(small):
    with pytest.raises(ValueError):
        run_suite("nope", small)
    assert "all" in SELECTORS
