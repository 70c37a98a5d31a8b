"""The randomized law suites: structure, determinism, self-test."""

import pytest

from delmc import (
    DEFAULT_CASES,
    InvariantViolation,
    SUITES,
    Report,
    run_all,
    run_suite,
    self_test,
)

SMALL_CASES = {
    "rel-laws": 40,
    "duality": 40,
    "beck-chevalley": 60,
    "topological": 25,
    "pal-reduction": 80,
    "del-reduction": 80,
    "sheaf": 12,
    "fo-reduction": 12,
}


@pytest.mark.parametrize("name", list(SMALL_CASES))
def test_each_suite_passes_at_small_sizes(name):
    rep = run_suite(name, seed=1, cases=SMALL_CASES[name])
    assert rep.ok, rep.failures
    assert rep.suite == name
    assert rep.cases >= SMALL_CASES[name]
    assert rep.seconds >= 0


def test_suite_names_are_consistent():
    assert list(SUITES) == list(DEFAULT_CASES)
    assert len(SUITES) == 8


def test_unknown_suite_rejected():
    with pytest.raises(InvariantViolation):
        run_suite("nonsense")


def test_runs_are_deterministic():
    a = run_suite("duality", seed=9, cases=30)
    b = run_suite("duality", seed=9, cases=30)
    assert a.cases == b.cases
    assert a.failures == b.failures == ()


def test_summary_format():
    rep = run_suite("duality", seed=2, cases=20)
    text = rep.summary()
    assert "duality" in text and "ok" in text
    failing = Report(suite="x", cases=3, failures=("bad [seed 1]",), seconds=0.1)
    assert "FAILED" in failing.summary() or "failed" in failing.summary()


def test_run_all_covers_every_suite():
    reports = run_all(seed=3, cases=12)
    assert [r.suite for r in reports] == list(SUITES)


def test_self_test_catches_planted_defect():
    rep = self_test(seed=0)
    assert rep.caught
    assert rep.tried > 0
    assert rep.witness
