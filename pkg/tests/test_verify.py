import os

import pytest

from indexbench import verify
from indexbench.errors import IndexbenchError


@pytest.mark.parametrize("suite", ["complex", "cocycles", "indices",
                                   "transgressions", "reduction", "appendix"])
def test_suite_passes(suite):
    rep = verify.run_suite(suite, seed=0)
    failed = [c for c in rep["checks"] if not c["pass"]]
    assert rep["pass"], failed


def test_all_aggregates():
    rep = verify.run_suite("all", seed=1)
    assert rep["pass"]
    assert {s["suite"] for s in rep["suites"]} == set(verify.SUITES) - {"all"}


def test_unknown_suite():
    with pytest.raises(IndexbenchError) as err:
        verify.run_suite("nonsense")
    assert "complex" in str(err.value)


@pytest.mark.skipif(not os.environ.get("INDEXBENCH_SLOW"),
                    reason="slow suite; set INDEXBENCH_SLOW=1 to run")
def test_slow_suite_includes_alpha_transgression():
    rep = verify.run_suite("transgressions", seed=0, slow=True)
    names = {c["name"] for c in rep["checks"]}
    assert "alpha transgression (slow)" in names
    assert "alpha transgression flat spectrum" in names
    assert rep["pass"]
