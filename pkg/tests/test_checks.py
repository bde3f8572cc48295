import pytest

from hessquot.checks import IDENTITIES, TOLERANCES, identity_suite


def test_suite_passes_small():
    results = identity_suite(range(1, 6), samples=800, seed=5)
    assert len(results) == sum(range(1, 6)) * len(TOLERANCES)
    bad = [r for r in results if not r.passed]
    assert not bad, bad[:3]


def test_degenerate_n1():
    results = identity_suite([1], samples=200, seed=0)
    assert all(r.passed for r in results)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_sign_flip_is_detected(n):
    results = identity_suite([n], samples=200, seed=1, fault="sign_flip")
    flagged = {r.name for r in results if not r.passed}
    assert "quadratic_split" in flagged


def test_result_direction():
    r = identity_suite([3], [2], samples=100, seed=0)
    for item in r:
        d = item.as_dict()
        assert d["passed"] is item.passed
        if item.name in IDENTITIES:
            assert item.worst >= 0.0
