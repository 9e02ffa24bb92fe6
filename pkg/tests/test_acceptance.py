"""The twelve acceptance criteria, one test each, at their stated tolerances."""
import pytest

from lk_sharp.acceptance import CHECKS, run_checks


@pytest.mark.parametrize("cid", sorted(CHECKS), ids=lambda i: f"criterion_{i:02d}")
def test_criterion(cid, acceptance_log):
    (res,) = run_checks([cid])
    acceptance_log.append(res.line())
    print(res.line())
    assert res.passed, res.detail
