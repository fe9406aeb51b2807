import pytest

from gsim.config import EXPERIMENTS, parse_config
from gsim.verify import Check, verification_size, verify_experiment


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_suite_passes(experiment):
    checks = verify_experiment(parse_config({"experiment": experiment}))
    assert checks
    failed = [c.row() for c in checks if not c.ok]
    assert not failed


@pytest.mark.parametrize(
    "data, n", [({"experiment": "benchmark", "n_values": [3, 50]}, 3), ({"experiment": "magic"}, 6), ({"experiment": "compile", "mode": "anderson", "n": 4}, 4)]
)  # fmt: skip
def test_verification_size(data, n):
    assert verification_size(parse_config(data)) == n


def test_check_flags_non_finite():
    assert not Check("nan", float("nan"), 1.0).ok
    assert Check("ok", 1e-12, 1e-10).ok
    assert not Check("big", 1e-3, 1e-10).ok
    assert Check("row", 0.0, 1.0).row() == {"check": "row", "error": 0.0, "tol": 1.0, "ok": True}
