import numpy as np
import pytest

from slicebde import ActionSet, CostParams, Ranges, StateBuckets
from slicebde.controller import BdeConfig


@pytest.fixture
def actions4():
    return ActionSet((20, 40, 60, 90))


@pytest.fixture
def buckets_s1():
    return StateBuckets(Ranges((0, 64)), Ranges((0, 12, 28)), Ranges((0, 20, 40, 61, 63)))


@pytest.fixture
def buckets_s2():
    return StateBuckets(Ranges((0, 2, 8, 12)), Ranges((0, 12, 28)), Ranges((0, 20, 40, 61, 63)))


@pytest.fixture
def config4(actions4, buckets_s2):
    return BdeConfig(buckets=buckets_s2, actions=actions4, cost=CostParams.for_actions(actions4, qc=50.0),
                     t0=5, period=3, eps=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
